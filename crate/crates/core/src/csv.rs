//! Locale-independent number formatting for CSV output.

/// Scientific notation with 17 significant digits, '.' decimal separator.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

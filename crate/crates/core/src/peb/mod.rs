//! Channel generation, pilot-based estimation and the resulting
//! pilot-estimation-beamforming (PEB) gain curves.

mod channel;
mod gain;
mod monte_carlo;
mod qualify;

use std::io::Write;

pub use channel::{
    draw_channel, draw_channel_indexed, friis_gain, ChannelConfig, ChannelSample, SPEED_OF_LIGHT,
};
pub use gain::{
    concavity_threshold, g_asymptotic, g_asymptotic_derivative, g_hat, g_hat_derivative,
    PebGainModel,
};
pub use monte_carlo::{rician_covariance, EstimatorKind, Expectation, MonteCarloGain};
pub use qualify::{log_grid, qualify_gain, qualify_gain_on, QualifyReport};

use crate::csv::fmt_f64;
use crate::error::Result;

/// Writes `p_pilot_watts,gain,stderr` rows for `g` on `grid`.
pub fn write_gain_curve<W: Write>(out: &mut W, g: &PebGainModel, grid: &[f64]) -> Result<()> {
    writeln!(out, "p_pilot_watts,gain,stderr")?;
    for &p in grid {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(p),
            fmt_f64(g.gain(p)),
            fmt_f64(g.stderr(p))
        )?;
    }
    Ok(())
}

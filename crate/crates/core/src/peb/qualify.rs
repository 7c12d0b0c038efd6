//! Numerical check of the gain qualification conditions: increasing,
//! concave and bounded by the array-gain ceiling.

use super::gain::PebGainModel;

const GRID_POINTS: usize = 200;
const CLOSED_FORM_TOL: f64 = 1e-12;
const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualifyReport {
    pub monotone: bool,
    pub concave: bool,
    pub bounded: bool,
}

impl QualifyReport {
    pub fn passes(&self) -> bool {
        self.monotone && self.concave && self.bounded
    }
}

/// Log-spaced grid with `n` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| match k {
            0 => lo,
            k if k == n - 1 => hi,
            k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Qualifies `g` on a 200-point log grid spanning six decades below
/// `p_max_probe`.
pub fn qualify_gain(g: &PebGainModel, p_max_probe: f64) -> QualifyReport {
    qualify_gain_on(g, &log_grid(p_max_probe * 1e-6, p_max_probe, GRID_POINTS))
}

/// Qualifies `g` on an explicit increasing grid.
///
/// Second differences are taken against the chord of the two neighbours, so
/// they are in gain units on any grid spacing. Monte Carlo tolerances are
/// three standard errors of each difference, computed per sample.
pub fn qualify_gain_on(g: &PebGainModel, grid: &[f64]) -> QualifyReport {
    assert!(grid.len() >= 3, "grid needs at least three points");
    let ceiling = g.ceiling();
    let closed_tol = CLOSED_FORM_TOL * ceiling;

    let first = |a: f64, b: f64| -> (f64, f64) {
        match g {
            PebGainModel::MonteCarlo(mc) => {
                let (m, se) = mc.combination(&[(b, 1.0), (a, -1.0)]);
                (m, MC_SIGMAS * se)
            }
            _ => (g.gain(b) - g.gain(a), closed_tol),
        }
    };
    let second = |a: f64, b: f64, c: f64| -> (f64, f64) {
        // g(b) minus the chord through (a, g(a)) and (c, g(c)); >= 0 when concave
        let wa = (c - b) / (c - a);
        let wc = (b - a) / (c - a);
        match g {
            PebGainModel::MonteCarlo(mc) => {
                let (m, se) = mc.combination(&[(b, 1.0), (a, -wa), (c, -wc)]);
                (m, MC_SIGMAS * se)
            }
            _ => (g.gain(b) - wa * g.gain(a) - wc * g.gain(c), closed_tol),
        }
    };

    let monotone = grid.windows(2).all(|w| {
        let (d, tol) = first(w[0], w[1]);
        d > -tol
    });
    let concave = grid.windows(3).all(|w| {
        let (d, tol) = second(w[0], w[1], w[2]);
        -d < tol
    });
    let bounded = grid
        .iter()
        .all(|&p| g.gain(p) <= ceiling * (1.0 + 1e-9) && g.gain(p) >= 0.0);
    QualifyReport {
        monotone,
        concave,
        bounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_qualify() {
        let r = PebGainModel::rational(4.97e-4, 100, 1e-12);
        assert!(qualify_gain(&r, 0.1).passes());
        let a = PebGainModel::asymptotic(1e-8, 512, 1e-12);
        assert!(qualify_gain(&a, 10.0).passes());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1e-1, 4);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[1] - 1e-3).abs() < 1e-15);
        assert!((g[3] - 1e-1).abs() < 1e-15);
    }
}

//! RF-to-DC energy harvesting models.
//!
//! An [`EhModel`] maps received RF energy (Joules per block) to harvested DC
//! energy. Every model is non-negative, zero at zero input and strictly
//! increasing on its domain, so it has a well defined inverse below its
//! ceiling. The solver only ever needs three things from a model: the forward
//! map, its inverse and the slope of the tightest linear upper bound
//! ([`EhModel::eta_max`]).
//!
//! [`ZdcToyModel`] is the two-tone rectifier surrogate used to check whether a
//! waveform strategy keeps harvested power monotone in received power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Energy harvesting function family.
#[derive(Debug, Clone, PartialEq)]
pub enum EhModel {
    /// `eta(x) = alpha * x`.
    Linear { alpha: f64 },
    /// `eta(x) = p_max * (1 - exp(-eta_max * x / p_max))`.
    SaturatingExponential { p_max: f64, eta_max: f64 },
    /// Piecewise-linear interpolation through measured points, held at the
    /// last output beyond the last input.
    Tabulated(HarvestTable),
}

/// Ordered `(input, output)` pairs in Joules, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestTable {
    points: Vec<(f64, f64)>,
}

impl HarvestTable {
    /// Builds a table. An `(0, 0)` point is prepended when the first input is
    /// positive; inputs and outputs must both be strictly increasing.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidModel("harvest table is empty".into()));
        }
        let mut pts = Vec::with_capacity(points.len() + 1);
        if points[0].0 > 0.0 {
            pts.push((0.0, 0.0));
        }
        pts.extend_from_slice(points);
        if pts[0] != (0.0, 0.0) {
            return Err(Error::InvalidModel(
                "harvest table must start at (0, 0)".into(),
            ));
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x1.is_finite() && y1.is_finite()) || x1 <= x0 || y1 <= y0 {
                return Err(Error::InvalidModel(format!(
                    "harvest table not strictly increasing at ({x1}, {y1})"
                )));
            }
        }
        if pts.len() < 2 {
            return Err(Error::InvalidModel(
                "harvest table needs a point besides the origin".into(),
            ));
        }
        Ok(Self { points: pts })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        // first index with input > x; exists because x < last input
        let k = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    fn inverse(&self, y: f64) -> f64 {
        let pts = &self.points;
        let k = pts.partition_point(|p| p.1 <= y).max(1);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        x0 + (x1 - x0) * (y - y0) / (y1 - y0)
    }
}

impl EhModel {
    pub fn linear(alpha: f64) -> Self {
        EhModel::Linear { alpha }
    }

    pub fn saturating(p_max: f64, eta_max: f64) -> Self {
        EhModel::SaturatingExponential { p_max, eta_max }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EhModel::Linear { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "linear conversion rate must be positive, got {alpha}"
                    )));
                }
            }
            EhModel::SaturatingExponential { p_max, eta_max } => {
                if !(p_max.is_finite() && *p_max > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "p_max must be positive, got {p_max}"
                    )));
                }
                if !(eta_max.is_finite() && *eta_max > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "eta_max must be positive, got {eta_max}"
                    )));
                }
            }
            EhModel::Tabulated(_) => {}
        }
        Ok(())
    }

    /// Harvested energy for `received` Joules of RF energy.
    pub fn eval(&self, received: f64) -> Result<f64> {
        if received.is_nan() || received < 0.0 {
            return Err(Error::Domain(format!(
                "received energy must be non-negative, got {received}"
            )));
        }
        Ok(match self {
            EhModel::Linear { alpha } => alpha * received,
            EhModel::SaturatingExponential { p_max, eta_max } => {
                -p_max * (-eta_max * received / p_max).exp_m1()
            }
            EhModel::Tabulated(t) => t.eval(received),
        })
    }

    /// Received energy needed to harvest `harvested` Joules.
    ///
    /// Demands at or above [`EhModel::ceiling`] return
    /// [`Error::SaturationInfeasible`].
    pub fn inverse(&self, harvested: f64) -> Result<f64> {
        if harvested.is_nan() || harvested < 0.0 {
            return Err(Error::Domain(format!(
                "harvested energy must be non-negative, got {harvested}"
            )));
        }
        let ceiling = self.ceiling();
        if harvested >= ceiling {
            return Err(Error::SaturationInfeasible {
                demand: harvested,
                ceiling,
            });
        }
        Ok(match self {
            EhModel::Linear { alpha } => harvested / alpha,
            EhModel::SaturatingExponential { p_max, eta_max } => {
                -(p_max / eta_max) * (-harvested / p_max).ln_1p()
            }
            EhModel::Tabulated(t) => t.inverse(harvested),
        })
    }

    /// `sup_{x > 0} eta(x) / x`, the slope of the tightest linear upper bound.
    ///
    /// The saturating family is concave with its supremum at the `x -> 0`
    /// limit, which is exactly the `eta_max` parameter. For a table through
    /// the origin the ratio is monotone along each segment, so the supremum
    /// sits on a vertex.
    pub fn eta_max(&self) -> f64 {
        match self {
            EhModel::Linear { alpha } => *alpha,
            EhModel::SaturatingExponential { eta_max, .. } => *eta_max,
            EhModel::Tabulated(t) => t
                .points
                .iter()
                .skip(1)
                .map(|(x, y)| y / x)
                .fold(0.0, f64::max),
        }
    }

    /// Supremum of the harvested energy (infinite for the linear model).
    pub fn ceiling(&self) -> f64 {
        match self {
            EhModel::Linear { .. } => f64::INFINITY,
            EhModel::SaturatingExponential { p_max, .. } => *p_max,
            EhModel::Tabulated(t) => t.points[t.points.len() - 1].1,
        }
    }
}

/// How a transmitter splits average RF power across the two tones.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitStrategy {
    /// All power on the tone with the larger channel amplitude.
    AdaptiveSingleSine,
    /// Fixed amplitude ratio `s0 / s1`.
    EqualRatio(f64),
    /// Grid search over the power fraction maximizing `z_DC`.
    OptimalGrid { points: usize },
    /// Power fraction redrawn for every call, keyed on `(seed, power)`.
    RandomSplit { seed: u64 },
}

/// Two-sinewave rectifier surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct ZdcToyModel {
    pub k2: f64,
    pub k4: f64,
    pub a0: f64,
    pub a1: f64,
    pub strategy: SplitStrategy,
}

impl ZdcToyModel {
    pub fn new(k2: f64, k4: f64, a0: f64, a1: f64, strategy: SplitStrategy) -> Result<Self> {
        for (name, v) in [("k2", k2), ("k4", k4), ("a0", a0), ("a1", a1)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidModel(format!("{name} must be positive, got {v}")));
            }
        }
        if let SplitStrategy::EqualRatio(r) = strategy {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidModel(format!("ratio must be positive, got {r}")));
            }
        }
        if let SplitStrategy::OptimalGrid { points } = strategy {
            if points < 2 {
                return Err(Error::InvalidModel("grid needs at least two points".into()));
            }
        }
        Ok(Self { k2, k4, a0, a1, strategy })
    }

    /// Rectifier output proxy for tone amplitudes `s0`, `s1`.
    pub fn eval(&self, s0: f64, s1: f64) -> f64 {
        let r0 = s0 * s0 * self.a0 * self.a0;
        let r1 = s1 * s1 * self.a1 * self.a1;
        let sum = r0 + r1;
        self.k2 * sum + self.k4 * (sum * sum + 2.0 * r0 * r1)
    }

    /// Amplitudes `(s0, s1)` meeting `0.5 (s0^2 A0^2 + s1^2 A1^2) = p_ave_rf`.
    pub fn allocate(&self, p_ave_rf: f64) -> Result<(f64, f64)> {
        if p_ave_rf.is_nan() || p_ave_rf < 0.0 {
            return Err(Error::Domain(format!(
                "average RF power must be non-negative, got {p_ave_rf}"
            )));
        }
        let fraction = match &self.strategy {
            SplitStrategy::AdaptiveSingleSine => {
                if self.a0 >= self.a1 {
                    1.0
                } else {
                    0.0
                }
            }
            SplitStrategy::EqualRatio(ratio) => {
                // received power ratio r0/r1 = ratio^2 A0^2 / A1^2
                let q = ratio * ratio * self.a0 * self.a0 / (self.a1 * self.a1);
                q / (1.0 + q)
            }
            SplitStrategy::OptimalGrid { points } => {
                let n = points - 1;
                let mut best = (f64::NEG_INFINITY, 0.0);
                for k in 0..=n {
                    let theta = k as f64 / n as f64;
                    let (s0, s1) = self.amplitudes(p_ave_rf, theta);
                    let z = self.eval(s0, s1);
                    if z > best.0 {
                        best = (z, theta);
                    }
                }
                best.1
            }
            SplitStrategy::RandomSplit { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p_ave_rf.to_bits().rotate_left(17));
                rng.random::<f64>()
            }
        };
        Ok(self.amplitudes(p_ave_rf, fraction))
    }

    /// Amplitudes putting `theta` of the received power on tone 0.
    fn amplitudes(&self, p: f64, theta: f64) -> (f64, f64) {
        let s0 = (2.0 * p * theta).sqrt() / self.a0;
        let s1 = (2.0 * p * (1.0 - theta)).sqrt() / self.a1;
        (s0, s1)
    }
}

//! Seeded scenario generation and experiment harnesses.
//!
//! Every random quantity of trial `t` is drawn from a ChaCha stream keyed by
//! `(seed, t)`, with one stream per node. Results therefore do not depend on
//! the order in which trials run, and adding nodes leaves the placement of
//! the existing ones unchanged.

mod experiments;

pub use experiments::{
    compare_eh_models, compare_eh_models_with, median, run_convergence, run_sweep, solve_optimal,
    write_compare_csv, CompareRow, ConvergenceRun, Method, SweepParameter, SweepResult, SweepRow,
    SweepSpec, TrialRecord,
};

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eh::EhModel;
use crate::error::{Error, Result};
use crate::peb::{friis_gain, ChannelConfig, EstimatorKind, Expectation, MonteCarloGain, PebGainModel};
use crate::solver::{NodeProfile, ProblemInstance, DEFAULT_INNER_TOL};

/// Deployment region around the base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Disk { radius_m: f64 },
    Annulus { inner_m: f64, outer_m: f64 },
    /// Every node at the same distance.
    FixedRing { radius_m: f64 },
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Geometry::Disk { radius_m } | Geometry::FixedRing { radius_m } => {
                radius_m > 0.0 && radius_m.is_finite()
            }
            Geometry::Annulus { inner_m, outer_m } => {
                inner_m >= 0.0 && outer_m > inner_m && outer_m.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("invalid geometry {self:?}")))
        }
    }

    /// Distance for a uniform draw `u` in `(0, 1]`, uniform in area.
    pub fn distance(&self, u: f64) -> f64 {
        match *self {
            Geometry::Disk { radius_m } => radius_m * u.sqrt(),
            Geometry::Annulus { inner_m, outer_m } => {
                (inner_m * inner_m + u * (outer_m * outer_m - inner_m * inner_m)).sqrt()
            }
            Geometry::FixedRing { radius_m } => radius_m,
        }
    }

    /// Outer radius of the region.
    pub fn radius(&self) -> f64 {
        match *self {
            Geometry::Disk { radius_m } | Geometry::FixedRing { radius_m } => radius_m,
            Geometry::Annulus { outer_m, .. } => outer_m,
        }
    }

    /// Same shape with the outer radius moved to `r`.
    pub fn with_radius(&self, r: f64) -> Self {
        match *self {
            Geometry::Disk { .. } => Geometry::Disk { radius_m: r },
            Geometry::FixedRing { .. } => Geometry::FixedRing { radius_m: r },
            Geometry::Annulus { inner_m, .. } => Geometry::Annulus { inner_m, outer_m: r },
        }
    }
}

/// How per-node gain curves are built from the channel statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainBackend {
    /// Rational approximation with `E|h|^2 = Nt * path gain`.
    Rational,
    /// Large-array limit with per-element power equal to the path gain.
    Asymptotic,
    /// Sample average over channel and noise draws.
    MonteCarlo { samples: usize, mmse: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_nodes: usize,
    pub geometry: Geometry,
    /// Energy budget per block (J).
    pub budget: f64,
    pub pilot_time: f64,
    pub n_antennas: usize,
    pub carrier_hz: f64,
    /// Noise power (W).
    pub noise_power: f64,
    pub rician_k: f64,
    /// Per-bit energy is `e_coeff * d^2` (J/bit/m^2).
    pub e_coeff: f64,
    /// Static energy per block (J).
    pub c_static: f64,
    pub eh: EhModel,
    pub epsilon: f64,
    pub inner_tol: f64,
    pub trials: usize,
    pub seed: u64,
    pub gain: GainBackend,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_nodes: 20,
            geometry: Geometry::Disk { radius_m: 10.0 },
            budget: 3.0,
            pilot_time: 0.1,
            n_antennas: 32,
            carrier_hz: 915e6,
            noise_power: 1e-12,
            rician_k: 10.0,
            e_coeff: 1e-7,
            c_static: 3e-6,
            eh: EhModel::saturating(0.02, 0.3),
            epsilon: 1e-3,
            inner_tol: DEFAULT_INNER_TOL,
            trials: 1000,
            seed: 0,
            gain: GainBackend::Rational,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.n_nodes == 0 {
            return bad("n_nodes must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.e_coeff > 0.0 && self.e_coeff.is_finite()) {
            return bad(format!("e_coeff must be positive, got {}", self.e_coeff));
        }
        if !(self.c_static >= 0.0 && self.c_static.is_finite()) {
            return bad(format!("c_static must be non-negative, got {}", self.c_static));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return bad(format!("carrier must be positive, got {}", self.carrier_hz));
        }
        if let GainBackend::MonteCarlo { samples: 0, .. } = self.gain {
            return bad("Monte Carlo backend needs at least one sample".into());
        }
        self.geometry.validate()?;
        self.channel(0).validate()?;
        self.eh.validate()?;
        // instance-level checks on a one-node stand-in
        ProblemInstance {
            nodes: vec![NodeProfile::new(1.0, 0.0, PebGainModel::rational(1.0, 1, 1.0))],
            budget: self.budget,
            pilot_time: self.pilot_time,
            eh: self.eh.clone(),
            epsilon: self.epsilon,
            inner_tol: self.inner_tol,
        }
        .validate()
    }

    pub fn channel(&self, rng_seed: u64) -> ChannelConfig {
        ChannelConfig {
            n_antennas: self.n_antennas,
            carrier_hz: self.carrier_hz,
            rician_k: self.rician_k,
            noise_power: self.noise_power,
            rng_seed,
        }
    }
}

/// Stream for node `node` of trial `trial`.
pub fn node_stream(seed: u64, trial: u64, node: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(node);
    rng
}

/// Seed for per-trial randomness that is not tied to a node (stream
/// `u64::MAX` of the trial key).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    node_stream(seed, trial, u64::MAX).next_u64()
}

/// Node distances and channel seeds of one trial.
pub fn deploy(cfg: &ScenarioConfig, trial: u64) -> Vec<(f64, u64)> {
    (0..cfg.n_nodes as u64)
        .map(|i| {
            let mut rng = node_stream(cfg.seed, trial, i);
            let u = 1.0 - rng.random::<f64>();
            (cfg.geometry.distance(u), rng.next_u64())
        })
        .collect()
}

/// Builds the gain curve of a node at `distance_m`.
pub fn gain_model(cfg: &ScenarioConfig, distance_m: f64, channel_seed: u64) -> Result<PebGainModel> {
    let path = friis_gain(cfg.carrier_hz, distance_m)?;
    Ok(match cfg.gain {
        GainBackend::Rational => {
            PebGainModel::rational(cfg.n_antennas as f64 * path, cfg.n_antennas, cfg.noise_power)
        }
        GainBackend::Asymptotic => PebGainModel::asymptotic(path, cfg.n_antennas, cfg.noise_power),
        GainBackend::MonteCarlo { samples, mmse } => {
            let est = if mmse {
                EstimatorKind::Mmse { covariance: None }
            } else {
                EstimatorKind::LeastSquares
            };
            let mc = MonteCarloGain::new(
                &est,
                &cfg.channel(channel_seed),
                distance_m,
                samples,
                Expectation::ChannelAndNoise,
            )?;
            PebGainModel::MonteCarlo(Arc::new(mc))
        }
    })
}

/// The problem instance of trial `trial`; deterministic in `(cfg.seed, trial)`.
pub fn generate_instance(cfg: &ScenarioConfig, trial: u64) -> Result<ProblemInstance> {
    cfg.validate()?;
    let nodes = deploy(cfg, trial)
        .into_iter()
        .map(|(d, s)| {
            Ok(NodeProfile::new(
                cfg.e_coeff * d * d,
                cfg.c_static,
                gain_model(cfg, d, s)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProblemInstance {
        nodes,
        budget: cfg.budget,
        pilot_time: cfg.pilot_time,
        eh: cfg.eh.clone(),
        epsilon: cfg.epsilon,
        inner_tol: cfg.inner_tol,
    })
}

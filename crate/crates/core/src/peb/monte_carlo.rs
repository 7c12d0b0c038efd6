//! Monte Carlo PEB gain for LS and MMSE estimation with MRT beamforming.
//!
//! Channel and noise realizations are drawn once and reused for every pilot
//! power, so a gain curve evaluated on a grid uses common random numbers and
//! differences between grid points carry far less noise than the points
//! themselves.
//!
//! For the LS estimator the beamformer is `b = sqrt(P) h + sqrt(Nt) n` (the
//! scaled estimate), and the received-power ratio `|b^H h|^2 / |b|^2` depends
//! on each realization only through `|h|^2`, `h^H n` and `|n|^2`. Those four
//! scalars are all that is stored.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::channel::{complex_gaussian, draw_channel_indexed, friis_gain, ChannelConfig};
use crate::error::{Error, Result};

/// Channel estimator feeding the MRT beamformer.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    LeastSquares,
    /// MMSE with channel covariance `R_h`; `None` uses the Rician population
    /// covariance implied by the channel config.
    Mmse { covariance: Option<DMatrix<Complex64>> },
}

/// What the expectation in the gain is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Expectation {
    /// Fresh channel and noise for every sample.
    #[default]
    ChannelAndNoise,
    /// One fixed channel (sample index 0), fresh noise for every sample.
    NoiseOnly,
}

#[derive(Debug, Clone, Copy)]
struct LsStats {
    h2: f64,
    re_hn: f64,
    hn2: f64,
    n2: f64,
}

#[derive(Debug, Clone)]
enum Samples {
    Ls(Vec<LsStats>),
    Mmse {
        covariance: DMatrix<Complex64>,
        draws: Vec<(DVector<Complex64>, DVector<Complex64>)>,
    },
}

/// Monte Carlo estimate of `g(P) = E[|b^H h|^2 / |b|^2]`.
#[derive(Debug, Clone)]
pub struct MonteCarloGain {
    n_antennas: usize,
    noise_power: f64,
    sigma_h2: f64,
    samples: Samples,
}

impl MonteCarloGain {
    pub fn new(
        estimator: &EstimatorKind,
        cfg: &ChannelConfig,
        distance_m: f64,
        samples: usize,
        mode: Expectation,
    ) -> Result<Self> {
        cfg.validate()?;
        if samples == 0 {
            return Err(Error::InvalidModel("at least one Monte Carlo sample is required".into()));
        }
        let nt = cfg.n_antennas;
        let fixed = match mode {
            Expectation::NoiseOnly => Some(draw_channel_indexed(cfg, distance_m, 0)?.h),
            Expectation::ChannelAndNoise => None,
        };
        let pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let h = match &fixed {
                    Some(h) => h.clone(),
                    None => draw_channel_indexed(cfg, distance_m, i)?.h,
                };
                let mut rng = cfg.stream(2 * i + 1);
                let n = complex_gaussian(&mut rng, nt, cfg.noise_power);
                Ok((h, n))
            })
            .collect::<Result<_>>()?;

        let sigma_h2 = pairs
            .iter()
            .map(|(h, _)| h.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / samples as f64;

        let samples = match estimator {
            EstimatorKind::LeastSquares => Samples::Ls(
                pairs
                    .iter()
                    .map(|(h, n)| {
                        let hn: Complex64 = h.iter().zip(n).map(|(a, b)| a.conj() * b).sum();
                        LsStats {
                            h2: h.iter().map(|z| z.norm_sqr()).sum(),
                            re_hn: hn.re,
                            hn2: hn.norm_sqr(),
                            n2: n.iter().map(|z| z.norm_sqr()).sum(),
                        }
                    })
                    .collect(),
            ),
            EstimatorKind::Mmse { covariance } => {
                let covariance = match covariance {
                    Some(r) => {
                        check_covariance(r, nt)?;
                        r.clone()
                    }
                    None => rician_covariance(cfg, distance_m)?,
                };
                Samples::Mmse {
                    covariance,
                    draws: pairs
                        .into_iter()
                        .map(|(h, n)| (DVector::from_vec(h), DVector::from_vec(n)))
                        .collect(),
                }
            }
        };
        Ok(Self {
            n_antennas: nt,
            noise_power: cfg.noise_power,
            sigma_h2,
            samples,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Sample mean of `|h|^2`, the large-pilot-power plateau of the curve.
    pub fn sigma_h2(&self) -> f64 {
        self.sigma_h2
    }

    pub fn len(&self) -> usize {
        match &self.samples {
            Samples::Ls(s) => s.len(),
            Samples::Mmse { draws, .. } => draws.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-sample received-power ratios at pilot power `p_pilot`.
    pub fn sample_ratios(&self, p_pilot: f64) -> Vec<f64> {
        let p = p_pilot.max(0.0);
        let nt = self.n_antennas as f64;
        match &self.samples {
            Samples::Ls(stats) => {
                let cross = 2.0 * (p * nt).sqrt();
                stats
                    .iter()
                    .map(|s| {
                        let num = p * s.h2 * s.h2 + cross * s.h2 * s.re_hn + nt * s.hn2;
                        let den = p * s.h2 + cross * s.re_hn + nt * s.n2;
                        num / den
                    })
                    .collect()
            }
            Samples::Mmse { covariance, draws } => {
                let filter = mmse_filter(covariance, p, self.noise_power);
                let amp = (p / nt).sqrt();
                draws
                    .iter()
                    .map(|(h, n)| {
                        let b = match &filter {
                            Some(w) => w * (h * Complex64::from(amp) + n),
                            None => covariance * n,
                        };
                        b.dotc(h).norm_sqr() / b.norm_squared()
                    })
                    .collect()
            }
        }
    }

    pub fn gain(&self, p_pilot: f64) -> f64 {
        mean(&self.sample_ratios(p_pilot))
    }

    /// Standard error of [`MonteCarloGain::gain`].
    pub fn stderr(&self, p_pilot: f64) -> f64 {
        mean_and_stderr(&self.sample_ratios(p_pilot)).1
    }

    /// Mean and standard error of `sum_k w_k g(P_k)`, computed per sample so
    /// the correlation between grid points is accounted for.
    pub fn combination(&self, terms: &[(f64, f64)]) -> (f64, f64) {
        let mut acc = vec![0.0; self.len()];
        for &(p, w) in terms {
            for (a, r) in acc.iter_mut().zip(self.sample_ratios(p)) {
                *a += w * r;
            }
        }
        mean_and_stderr(&acc)
    }
}

/// Rician population covariance `pg (K/(K+1) a a^H + 1/(K+1) I)`.
pub fn rician_covariance(cfg: &ChannelConfig, distance_m: f64) -> Result<DMatrix<Complex64>> {
    let pg = friis_gain(cfg.carrier_hz, distance_m)?;
    let a = DVector::from_vec(cfg.steering_vector());
    let (w_los, w_sc) = if cfg.rician_k.is_infinite() {
        (1.0, 0.0)
    } else {
        let k = cfg.rician_k;
        (k / (k + 1.0), 1.0 / (k + 1.0))
    };
    let nt = cfg.n_antennas;
    let r = (&a * a.adjoint()) * Complex64::from(w_los)
        + DMatrix::<Complex64>::identity(nt, nt) * Complex64::from(w_sc);
    Ok(r * Complex64::from(pg))
}

fn check_covariance(r: &DMatrix<Complex64>, nt: usize) -> Result<()> {
    if r.nrows() != nt || r.ncols() != nt {
        return Err(Error::InvalidModel(format!(
            "covariance must be {nt}x{nt}, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if (r - r.adjoint()).iter().any(|z| z.norm() > 1e-9 * scale) {
        return Err(Error::InvalidModel("covariance is not Hermitian".into()));
    }
    let eig = r.clone().symmetric_eigenvalues();
    if eig.iter().any(|&l| l < -1e-9 * scale) {
        return Err(Error::InvalidModel("covariance is not positive semidefinite".into()));
    }
    Ok(())
}

// W = R sqrt(P/Nt) (P/Nt R + s2 I)^{-1}; None at P = 0 where the estimate
// direction degenerates to R n.
fn mmse_filter(r: &DMatrix<Complex64>, p: f64, noise: f64) -> Option<DMatrix<Complex64>> {
    if p == 0.0 {
        return None;
    }
    let nt = r.nrows();
    let q = p / nt as f64;
    let m = r * Complex64::from(q) + DMatrix::<Complex64>::identity(nt, nt) * Complex64::from(noise);
    let inv = m.try_inverse().expect("regularized covariance is invertible");
    Some(r * inv * Complex64::from(q.sqrt()))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (m, (var / v.len() as f64).sqrt())
}

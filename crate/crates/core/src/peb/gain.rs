//! PEB gain models `g(P)`: expected ratio of received to transmitted energy
//! as a function of pilot power.

use std::sync::Arc;

use super::monte_carlo::MonteCarloGain;
use crate::special::gamma_p_inv;

/// Rational approximation of the LS/MRT gain:
/// `s (P s + Nt n) / (P s + Nt^2 n)` with `s = E|h|^2`, `n` the noise power.
pub fn g_hat(sigma_h2: f64, n_antennas: usize, noise_power: f64, p_pilot: f64) -> f64 {
    let nt = n_antennas as f64;
    let ps = p_pilot * sigma_h2;
    sigma_h2 * (ps + nt * noise_power) / (ps + nt * nt * noise_power)
}

/// `d g_hat / dP = s^2 Nt n (Nt - 1) / (P s + Nt^2 n)^2`.
pub fn g_hat_derivative(sigma_h2: f64, n_antennas: usize, noise_power: f64, p_pilot: f64) -> f64 {
    let nt = n_antennas as f64;
    let den = p_pilot * sigma_h2 + nt * nt * noise_power;
    sigma_h2 * sigma_h2 * nt * noise_power * (nt - 1.0) / (den * den)
}

/// Large-array limit `Nt s^2 P / (s P + Nt n)` with `s` the per-element
/// channel power.
pub fn g_asymptotic(sigma_elem2: f64, n_antennas: usize, noise_power: f64, p_pilot: f64) -> f64 {
    let nt = n_antennas as f64;
    nt * sigma_elem2 * sigma_elem2 * p_pilot / (sigma_elem2 * p_pilot + nt * noise_power)
}

pub fn g_asymptotic_derivative(
    sigma_elem2: f64,
    n_antennas: usize,
    noise_power: f64,
    p_pilot: f64,
) -> f64 {
    let nt = n_antennas as f64;
    let den = sigma_elem2 * p_pilot + nt * noise_power;
    nt * nt * sigma_elem2 * sigma_elem2 * noise_power / (den * den)
}

/// Pilot power above which the LS/MRT gain of a channel with `|h|^2 =
/// h_norm2` is concave with probability 0.99 over the noise.
pub fn concavity_threshold(n_antennas: usize, noise_power: f64, h_norm2: f64) -> f64 {
    let nt = n_antennas as f64;
    (2.0 * 3f64.sqrt() - 1.0) * gamma_p_inv(nt, 0.99) * nt * noise_power / h_norm2
}

/// A per-node PEB gain function.
#[derive(Debug, Clone)]
pub enum PebGainModel {
    /// Sample average over stored realizations. Slopes come from a
    /// [`g_hat`] surrogate fitted to the sample plateau.
    MonteCarlo(Arc<MonteCarloGain>),
    RationalApprox {
        sigma_h2: f64,
        n_antennas: usize,
        noise_power: f64,
    },
    Asymptotic {
        sigma_elem2: f64,
        n_antennas: usize,
        noise_power: f64,
    },
    /// Incoherent transmission: no array gain, independent of pilot power.
    Broadcast { sigma_h2: f64, n_antennas: usize },
}

impl PebGainModel {
    pub fn rational(sigma_h2: f64, n_antennas: usize, noise_power: f64) -> Self {
        PebGainModel::RationalApprox {
            sigma_h2,
            n_antennas,
            noise_power,
        }
    }

    pub fn asymptotic(sigma_elem2: f64, n_antennas: usize, noise_power: f64) -> Self {
        PebGainModel::Asymptotic {
            sigma_elem2,
            n_antennas,
            noise_power,
        }
    }

    pub fn gain(&self, p_pilot: f64) -> f64 {
        match self {
            PebGainModel::MonteCarlo(mc) => mc.gain(p_pilot),
            PebGainModel::RationalApprox {
                sigma_h2,
                n_antennas,
                noise_power,
            } => g_hat(*sigma_h2, *n_antennas, *noise_power, p_pilot),
            PebGainModel::Asymptotic {
                sigma_elem2,
                n_antennas,
                noise_power,
            } => g_asymptotic(*sigma_elem2, *n_antennas, *noise_power, p_pilot),
            PebGainModel::Broadcast { sigma_h2, n_antennas } => sigma_h2 / *n_antennas as f64,
        }
    }

    /// `dg/dP`.
    pub fn slope(&self, p_pilot: f64) -> f64 {
        match self {
            PebGainModel::MonteCarlo(mc) => {
                g_hat_derivative(mc.sigma_h2(), mc.n_antennas(), mc.noise_power(), p_pilot)
            }
            PebGainModel::RationalApprox {
                sigma_h2,
                n_antennas,
                noise_power,
            } => g_hat_derivative(*sigma_h2, *n_antennas, *noise_power, p_pilot),
            PebGainModel::Asymptotic {
                sigma_elem2,
                n_antennas,
                noise_power,
            } => g_asymptotic_derivative(*sigma_elem2, *n_antennas, *noise_power, p_pilot),
            PebGainModel::Broadcast { .. } => 0.0,
        }
    }

    /// Array-gain ceiling `E|h|^2`.
    pub fn ceiling(&self) -> f64 {
        match self {
            PebGainModel::MonteCarlo(mc) => mc.sigma_h2(),
            PebGainModel::RationalApprox { sigma_h2, .. } => *sigma_h2,
            PebGainModel::Asymptotic {
                sigma_elem2,
                n_antennas,
                ..
            } => sigma_elem2 * *n_antennas as f64,
            PebGainModel::Broadcast { sigma_h2, .. } => *sigma_h2,
        }
    }

    pub fn n_antennas(&self) -> usize {
        match self {
            PebGainModel::MonteCarlo(mc) => mc.n_antennas(),
            PebGainModel::RationalApprox { n_antennas, .. }
            | PebGainModel::Asymptotic { n_antennas, .. }
            | PebGainModel::Broadcast { n_antennas, .. } => *n_antennas,
        }
    }

    /// Gain of an incoherent broadcast through the same channel.
    pub fn broadcast_gain(&self) -> f64 {
        self.ceiling() / self.n_antennas() as f64
    }

    /// Standard error of [`PebGainModel::gain`]; zero for closed forms.
    pub fn stderr(&self, p_pilot: f64) -> f64 {
        match self {
            PebGainModel::MonteCarlo(mc) => mc.stderr(p_pilot),
            _ => 0.0,
        }
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            PebGainModel::MonteCarlo(_) => "monte_carlo",
            PebGainModel::RationalApprox { .. } => "rational",
            PebGainModel::Asymptotic { .. } => "asymptotic",
            PebGainModel::Broadcast { .. } => "broadcast",
        }
    }
}

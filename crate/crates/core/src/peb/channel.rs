//! Free-space path loss and Rician channel draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Speed of light used by the Friis model, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

// Stream reserved for per-node geometry (line-of-sight angle).
const GEOMETRY_STREAM: u64 = u64::MAX;

/// Friis power gain `(lambda / (4 pi d))^2` with unit antenna gains.
pub fn friis_gain(carrier_hz: f64, distance_m: f64) -> Result<f64> {
    if distance_m.is_nan() || distance_m <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    if carrier_hz.is_nan() || carrier_hz <= 0.0 {
        return Err(Error::Domain(format!(
            "carrier frequency must be positive, got {carrier_hz}"
        )));
    }
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let r = lambda / (4.0 * std::f64::consts::PI * distance_m);
    Ok(r * r)
}

/// Channel parameters for one BS-to-node link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub n_antennas: usize,
    pub carrier_hz: f64,
    /// Rician factor; `f64::INFINITY` gives a pure line-of-sight channel.
    pub rician_k: f64,
    /// Receiver noise power in Watts.
    pub noise_power: f64,
    pub rng_seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_antennas: 32,
            carrier_hz: 915e6,
            rician_k: 10.0,
            noise_power: 1e-12,
            rng_seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::InvalidModel("n_antennas must be at least 1".into()));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "noise power must be positive, got {}",
                self.noise_power
            )));
        }
        if self.rician_k.is_nan() || self.rician_k < 0.0 {
            return Err(Error::InvalidModel(format!(
                "rician factor must be non-negative, got {}",
                self.rician_k
            )));
        }
        Ok(())
    }

    /// Line-of-sight and scattered amplitude weights.
    fn rician_weights(&self) -> (f64, f64) {
        if self.rician_k.is_infinite() {
            (1.0, 0.0)
        } else {
            let k = self.rician_k;
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        }
    }

    /// Broadside angle of the node, drawn once per seed.
    pub fn los_angle(&self) -> f64 {
        let mut rng = self.stream(GEOMETRY_STREAM);
        rng.random_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2)
    }

    /// Unit-modulus steering vector of a half-wavelength uniform linear array.
    pub fn steering_vector(&self) -> Vec<Complex64> {
        let s = self.los_angle().sin();
        (0..self.n_antennas)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 * s))
            .collect()
    }

    pub(crate) fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(index);
        rng
    }
}

/// One realization of the channel vector `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h: Vec<Complex64>,
    pub distance_m: f64,
}

impl ChannelSample {
    pub fn norm_sqr(&self) -> f64 {
        self.h.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Draws `CN(0, 1)` entries.
pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R, n: usize, variance: f64) -> Vec<Complex64> {
    let scale = (0.5 * variance).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect()
}

/// Draws the channel for sample index 0.
pub fn draw_channel(cfg: &ChannelConfig, distance_m: f64) -> Result<ChannelSample> {
    draw_channel_indexed(cfg, distance_m, 0)
}

/// Draws the channel for an arbitrary sample index. Every index owns an
/// independent RNG stream, so draws can be generated in any order.
pub fn draw_channel_indexed(
    cfg: &ChannelConfig,
    distance_m: f64,
    index: u64,
) -> Result<ChannelSample> {
    cfg.validate()?;
    let gain = friis_gain(cfg.carrier_hz, distance_m)?;
    let (w_los, w_sc) = cfg.rician_weights();
    let amp = gain.sqrt();
    let los = cfg.steering_vector();
    let mut rng = cfg.stream(2 * index);
    let scatter = complex_gaussian(&mut rng, cfg.n_antennas, 1.0);
    let h = los
        .iter()
        .zip(&scatter)
        .map(|(l, s)| (l * w_los + s * w_sc) * amp)
        .collect();
    Ok(ChannelSample { h, distance_m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friis_inverse_square() {
        let g1 = friis_gain(915e6, 10.0).unwrap();
        let g2 = friis_gain(915e6, 20.0).unwrap();
        assert!((g1 / g2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn friis_reference_values() {
        // (lambda / (4 pi d))^2 with lambda = 2.998e8 / 915e6
        let g = friis_gain(915e6, 11.69).unwrap();
        assert!((g - 4.974762117272281e-06).abs() < 1e-15);
        let g = friis_gain(915e6, 50.0).unwrap();
        assert!((g - 2.7193263574966905e-07).abs() < 1e-16);
    }

    #[test]
    fn friis_rejects_nonpositive_distance() {
        assert!(friis_gain(915e6, 0.0).is_err());
        assert!(friis_gain(915e6, -3.0).is_err());
    }

    #[test]
    fn pure_los_has_exact_element_power() {
        let cfg = ChannelConfig {
            rician_k: f64::INFINITY,
            ..Default::default()
        };
        let pg = friis_gain(cfg.carrier_hz, 20.0).unwrap();
        let s = draw_channel(&cfg, 20.0).unwrap();
        for z in &s.h {
            assert!((z.norm_sqr() - pg).abs() < 1e-12 * pg);
        }
    }

    #[test]
    fn rayleigh_second_moment() {
        let cfg = ChannelConfig {
            n_antennas: 1,
            rician_k: 0.0,
            rng_seed: 11,
            ..Default::default()
        };
        let pg = friis_gain(cfg.carrier_hz, 30.0).unwrap();
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|i| draw_channel_indexed(&cfg, 30.0, i).unwrap().norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean / pg - 1.0).abs() < 0.02, "{}", mean / pg);
    }

    #[test]
    fn same_seed_same_sample() {
        let cfg = ChannelConfig {
            rng_seed: 42,
            ..Default::default()
        };
        let a = draw_channel_indexed(&cfg, 12.0, 7).unwrap();
        let b = draw_channel_indexed(&cfg, 12.0, 7).unwrap();
        assert_eq!(a, b);
        let c = draw_channel_indexed(&cfg, 12.0, 8).unwrap();
        assert_ne!(a, c);
    }
}

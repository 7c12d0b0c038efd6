#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpsn::eh::EhModel;
use wpsn::peb::{friis_gain, PebGainModel};
use wpsn::solver::{NodeProfile, ProblemInstance};

pub const NT: usize = 32;
pub const NOISE: f64 = 1e-12;

pub fn rational_node(d: f64, c: f64) -> NodeProfile {
    let s = NT as f64 * friis_gain(915e6, d).unwrap();
    NodeProfile::new(1e-7 * d * d, c, PebGainModel::rational(s, NT, NOISE))
}

/// 2-5 nodes between 2 and 12 m with rational gains; alternates the harvester.
pub fn random_instance(seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5);
    let nodes = (0..n)
        .map(|_| rational_node(rng.random_range(2.0..12.0), rng.random_range(0.0..1e-5)))
        .collect();
    let eh = if seed.is_multiple_of(2) {
        EhModel::saturating(0.02, 0.3)
    } else {
        EhModel::linear(0.3)
    };
    ProblemInstance::new(nodes, 3.0, 0.1, eh, 1e-3)
}

/// `E_s(P; w)` evaluated from the definitions.
pub fn block_energy(inst: &ProblemInstance, w: f64, p: f64) -> f64 {
    inst.pilot_time * p
        + inst
            .nodes
            .iter()
            .map(|n| inst.eh.inverse(n.e * w + n.c).unwrap() / n.gain.gain(p))
            .sum::<f64>()
}

/// Minimum of `E_s(.; w)` over `points` evenly spaced pilot powers in `[0, E/t_p]`.
pub fn grid_min_energy(inst: &ProblemInstance, w: f64, points: usize) -> f64 {
    let p_max = inst.budget / inst.pilot_time;
    (0..points)
        .map(|k| block_energy(inst, w, p_max * k as f64 / (points - 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

//! Closed-form special cases: identical rational gains, and the large-array
//! limit with a linear harvester.

use super::inner::{allocation, block_energy, demand, Infeasibility, InnerOutcome, InnerSolution};
use super::outer::{bisect_rate, upper_bound_rate};
use super::{AllocationSolution, ProblemInstance};
use crate::eh::EhModel;
use crate::error::{Error, Result};
use crate::peb::{g_asymptotic, PebGainModel};

/// Rate bisection where the pilot power comes from the stationarity
/// condition of the rational gain, `P = sqrt(sum_i d_i Nt n (Nt-1) / (t_p s^2))
/// - Nt n / s`, clamped at zero. All nodes must share one
/// [`PebGainModel::RationalApprox`] curve.
pub fn solve_closed_form_identical(inst: &ProblemInstance) -> Result<AllocationSolution> {
    let (sigma_h2, nt, noise) = shared_rational(inst)?;
    let w_upper = upper_bound_rate(inst);
    bisect_rate(inst, w_upper, |w| {
        let Some(demands) = demand(inst, w)? else {
            return Ok(InnerOutcome::Infeasible(Infeasibility::Saturation));
        };
        let p = identical_pilot_power(&demands, inst.pilot_time, sigma_h2, nt, noise);
        if p >= inst.max_pilot_power() {
            return Ok(InnerOutcome::Infeasible(Infeasibility::Budget));
        }
        let e_t = allocation(inst, &demands, p).expect("rational gain is positive");
        Ok(InnerOutcome::Solved(InnerSolution {
            e_s: block_energy(inst, &demands, p),
            p_pilot: p,
            e_t,
            iterations: 0,
        }))
    })
}

/// Stationary pilot power for identical rational gains, clamped at zero.
pub fn identical_pilot_power(demands: &[f64], pilot_time: f64, sigma_h2: f64, nt: usize, noise: f64) -> f64 {
    let nt = nt as f64;
    let total: f64 = demands.iter().sum();
    let root = (total * nt * noise * (nt - 1.0) / (pilot_time * sigma_h2 * sigma_h2)).sqrt();
    (root - nt * noise / sigma_h2).max(0.0)
}

fn shared_rational(inst: &ProblemInstance) -> Result<(f64, usize, f64)> {
    let mut shared = None;
    for n in &inst.nodes {
        let PebGainModel::RationalApprox {
            sigma_h2,
            n_antennas,
            noise_power,
        } = n.gain
        else {
            return Err(Error::InvalidModel(
                "identical closed form needs rational gains on every node".into(),
            ));
        };
        let params = (sigma_h2, n_antennas, noise_power);
        match shared {
            None => shared = Some(params),
            Some(s) if s == params => {}
            Some(_) => {
                return Err(Error::InvalidModel(
                    "identical closed form needs the same gain curve on every node".into(),
                ))
            }
        }
    }
    shared.ok_or_else(|| Error::InvalidModel("instance has no nodes".into()))
}

/// Coefficients of `E_s*(w) = 2 sqrt(A w + B) + C w + D` in the large-array
/// limit with a linear harvester of rate `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AsymptoticConstants {
    pub fn min_energy(&self, w: f64) -> f64 {
        2.0 * (self.a * w + self.b).sqrt() + self.c * w + self.d
    }

    /// Largest `w` with `min_energy(w) = budget`; `None` when even `w = 0`
    /// exceeds the budget.
    pub fn max_rate(&self, budget: f64) -> Result<Option<f64>> {
        let AsymptoticConstants { a, b, c, d } = *self;
        if self.min_energy(0.0) > budget {
            return Ok(None);
        }
        let k = (budget - d) * c + 2.0 * a;
        let disc = k * k - c * c * ((budget - d) * (budget - d) - 4.0 * b);
        if disc < 0.0 {
            return Err(Error::Domain(format!("negative discriminant {disc:e}")));
        }
        Ok(Some(((k - disc.sqrt()) / (c * c)).max(0.0)))
    }
}

struct AsymptoticNode {
    e: f64,
    c: f64,
    sigma2: f64,
}

fn asymptotic_nodes(inst: &ProblemInstance) -> Result<(f64, usize, f64, Vec<AsymptoticNode>)> {
    let EhModel::Linear { alpha } = inst.eh else {
        return Err(Error::InvalidModel("asymptotic closed form needs a linear harvester".into()));
    };
    let mut shared: Option<(usize, f64)> = None;
    let mut nodes = Vec::with_capacity(inst.nodes.len());
    for n in &inst.nodes {
        let PebGainModel::Asymptotic {
            sigma_elem2,
            n_antennas,
            noise_power,
        } = n.gain
        else {
            return Err(Error::InvalidModel(
                "asymptotic closed form needs asymptotic gains on every node".into(),
            ));
        };
        match shared {
            None => shared = Some((n_antennas, noise_power)),
            Some(s) if s == (n_antennas, noise_power) => {}
            Some(_) => {
                return Err(Error::InvalidModel(
                    "asymptotic closed form needs one antenna count and noise power".into(),
                ))
            }
        }
        nodes.push(AsymptoticNode {
            e: n.e,
            c: n.c,
            sigma2: sigma_elem2,
        });
    }
    let (nt, noise) = shared.ok_or_else(|| Error::InvalidModel("instance has no nodes".into()))?;
    Ok((alpha, nt, noise, nodes))
}

/// Computes `A`, `B`, `C`, `D` for an instance with asymptotic gains and a
/// linear harvester.
pub fn asymptotic_constants(inst: &ProblemInstance) -> Result<AsymptoticConstants> {
    inst.validate()?;
    let (alpha, nt, noise, nodes) = asymptotic_nodes(inst)?;
    let nt = nt as f64;
    let t = inst.pilot_time;
    let mut k = AsymptoticConstants { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    for n in &nodes {
        let s4 = alpha * n.sigma2 * n.sigma2;
        let s2 = alpha * nt * n.sigma2;
        k.a += noise * n.e * t / s4;
        k.b += noise * n.c * t / s4;
        k.c += n.e / s2;
        k.d += n.c / s2;
    }
    Ok(k)
}

/// Solves the large-array, linear-harvester case without any search.
pub fn solve_asymptotic(inst: &ProblemInstance) -> Result<AllocationSolution> {
    let k = asymptotic_constants(inst)?;
    let (alpha, nt, noise, nodes) = asymptotic_nodes(inst)?;
    let w_upper = upper_bound_rate(inst);
    let Some(w) = k.max_rate(inst.budget)? else {
        return Ok(AllocationSolution::infeasible(nodes.len(), w_upper));
    };

    let sum: f64 = nodes
        .iter()
        .map(|n| noise * (n.e * w + n.c) / (alpha * n.sigma2 * n.sigma2 * inst.pilot_time))
        .sum();
    let p = sum.sqrt();
    let e_t: Vec<f64> = nodes
        .iter()
        .map(|n| (n.e * w + n.c) / (alpha * g_asymptotic(n.sigma2, nt, noise, p)))
        .collect();

    let used = inst.pilot_time * p + e_t.iter().sum::<f64>();
    if ((used - inst.budget) / inst.budget).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "closed-form energy {used} does not meet the budget {}",
            inst.budget
        )));
    }
    Ok(AllocationSolution {
        w_min: w,
        p_pilot: p,
        e_t,
        feasible: true,
        w_upper,
        trace: Default::default(),
    })
}

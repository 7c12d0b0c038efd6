//! Minimum block energy for a fixed target rate.
//!
//! With `d_i = eta^-1(e_i w + c_i)` the energy needed at pilot power `P` is
//! `E_s(P) = t_p P + sum_i d_i / g_i(P)`. Concave increasing gains make
//! `E_s` convex, so its minimum over `[0, E / t_p]` is either at `P = 0`
//! (slope already non-negative there), beyond the interval (rate
//! unreachable), or at the unique root of `E_s'`.

use super::{NodeProfile, ProblemInstance};
use crate::eh::EhModel;
use crate::error::{Error, Result};

/// Why a target rate cannot be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// `E_s'` is still non-positive at `E / t_p`: the budget cannot cover it.
    Budget,
    /// Some node demands at least the harvester ceiling.
    Saturation,
    /// Some node has zero gain at the chosen pilot power.
    ZeroGain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub e_s: f64,
    pub p_pilot: f64,
    pub e_t: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InnerOutcome {
    Solved(InnerSolution),
    Infeasible(Infeasibility),
}

impl InnerOutcome {
    /// `E_s*`, or infinity when the rate is unreachable.
    pub fn energy(&self) -> f64 {
        match self {
            InnerOutcome::Solved(s) => s.e_s,
            InnerOutcome::Infeasible(_) => f64::INFINITY,
        }
    }

    pub fn solved(&self) -> Option<&InnerSolution> {
        match self {
            InnerOutcome::Solved(s) => Some(s),
            InnerOutcome::Infeasible(_) => None,
        }
    }
}

/// Received energy each node needs, `eta^-1(e_i w + c_i)`; `None` if any
/// demand is at or above the harvester ceiling.
pub fn demand(inst: &ProblemInstance, w: f64) -> Result<Option<Vec<f64>>> {
    if w.is_nan() || w < 0.0 {
        return Err(Error::Domain(format!("rate must be non-negative, got {w}")));
    }
    let mut out = Vec::with_capacity(inst.nodes.len());
    for n in &inst.nodes {
        match inst.eh.inverse(n.e * w + n.c) {
            Ok(d) => out.push(d),
            Err(Error::SaturationInfeasible { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

/// `f_i = eta^-1(e_i w + c_i) / g_i(P)`.
pub fn required_transmit_energy(node: &NodeProfile, eh: &EhModel, w: f64, p_pilot: f64) -> Result<f64> {
    if w.is_nan() || w < 0.0 || p_pilot.is_nan() || p_pilot < 0.0 {
        return Err(Error::Domain(format!(
            "rate and pilot power must be non-negative, got w={w}, P={p_pilot}"
        )));
    }
    let d = eh.inverse(node.e * w + node.c)?;
    let g = node.gain.gain(p_pilot);
    if g <= 0.0 {
        if d == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::ZeroGain { p_pilot });
    }
    Ok(d / g)
}

/// `t_p P + sum_i d_i / g_i(P)`, infinite where a demanding node has zero gain.
pub(crate) fn block_energy(inst: &ProblemInstance, demands: &[f64], p: f64) -> f64 {
    inst.pilot_time * p
        + inst
            .nodes
            .iter()
            .zip(demands)
            .map(|(n, &d)| transmit(d, n.gain.gain(p)))
            .sum::<f64>()
}

pub(crate) fn transmit(d: f64, g: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d / g
    }
}

/// `E_s'(P) = t_p - sum_i d_i g_i'(P) / g_i(P)^2`.
fn slope(inst: &ProblemInstance, demands: &[f64], p: f64) -> f64 {
    let mut s = inst.pilot_time;
    for (n, &d) in inst.nodes.iter().zip(demands) {
        if d == 0.0 {
            continue;
        }
        let g = n.gain.gain(p);
        s -= d * n.gain.slope(p) / (g * g);
    }
    s
}

pub(crate) fn allocation(inst: &ProblemInstance, demands: &[f64], p: f64) -> Option<Vec<f64>> {
    let e_t: Vec<f64> = inst
        .nodes
        .iter()
        .zip(demands)
        .map(|(n, &d)| transmit(d, n.gain.gain(p)))
        .collect();
    e_t.iter().all(|e| e.is_finite()).then_some(e_t)
}

/// Solves `min_{0 <= P <= E/t_p} E_s(P; w)`.
pub fn subproblem_min_energy(inst: &ProblemInstance, w: f64) -> Result<InnerOutcome> {
    let Some(demands) = demand(inst, w)? else {
        return Ok(InnerOutcome::Infeasible(Infeasibility::Saturation));
    };
    let p_max = inst.max_pilot_power();

    let (p, iterations) = if slope(inst, &demands, 0.0) >= 0.0 {
        (0.0, 0)
    } else if slope(inst, &demands, p_max) <= 0.0 {
        return Ok(InnerOutcome::Infeasible(Infeasibility::Budget));
    } else {
        let tol = inst.inner_tol * p_max;
        let (mut lo, mut hi) = (0.0, p_max);
        let mut iterations = 0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if slope(inst, &demands, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        (0.5 * (lo + hi), iterations)
    };

    let Some(e_t) = allocation(inst, &demands, p) else {
        return Ok(InnerOutcome::Infeasible(Infeasibility::ZeroGain));
    };
    let e_s = inst.pilot_time * p + e_t.iter().sum::<f64>();
    Ok(InnerOutcome::Solved(InnerSolution {
        e_s,
        p_pilot: p,
        e_t,
        iterations,
    }))
}

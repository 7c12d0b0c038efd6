//! Reference allocators: fixed pilot share, random pilot power, and
//! incoherent energy broadcast.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::inner::{allocation, demand, Infeasibility, InnerOutcome, InnerSolution};
use super::outer::{bisect_rate, upper_bound_rate};
use super::{AllocationSolution, ProblemInstance};
use crate::error::{Error, Result};

/// Pilot power pinned to `pilot_fraction * E / t_p`; the rate is then the
/// largest one whose transmit energies fit in what is left of the budget.
pub fn solve_fixed(inst: &ProblemInstance, pilot_fraction: f64) -> Result<AllocationSolution> {
    if !(0.0..1.0).contains(&pilot_fraction) {
        return Err(Error::Domain(format!(
            "pilot fraction must lie in [0, 1), got {pilot_fraction}"
        )));
    }
    solve_fixed_power(inst, pilot_fraction * inst.max_pilot_power())
}

/// Rate bisection with the pilot power held at `p_pilot`.
pub fn solve_fixed_power(inst: &ProblemInstance, p_pilot: f64) -> Result<AllocationSolution> {
    if !(p_pilot >= 0.0 && p_pilot <= inst.max_pilot_power()) {
        return Err(Error::Domain(format!(
            "pilot power must lie in [0, E/t_p], got {p_pilot}"
        )));
    }
    let w_upper = upper_bound_rate(inst);
    bisect_rate(inst, w_upper, |w| {
        let Some(demands) = demand(inst, w)? else {
            return Ok(InnerOutcome::Infeasible(Infeasibility::Saturation));
        };
        let Some(e_t) = allocation(inst, &demands, p_pilot) else {
            return Ok(InnerOutcome::Infeasible(Infeasibility::ZeroGain));
        };
        Ok(InnerOutcome::Solved(InnerSolution {
            e_s: inst.pilot_time * p_pilot + e_t.iter().sum::<f64>(),
            p_pilot,
            e_t,
            iterations: 0,
        }))
    })
}

/// Pilot power drawn uniformly on `[0, E/t_p)`, then as [`solve_fixed_power`].
pub fn solve_random(inst: &ProblemInstance, seed: u64) -> Result<AllocationSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(0.0..inst.max_pilot_power());
    solve_fixed_power(inst, p)
}

/// No pilots; the array radiates `broadcast_power` incoherently for the
/// whole block and each node is exposed for an equal `1/N` share of it.
pub fn solve_broadcast(inst: &ProblemInstance, broadcast_power: f64) -> Result<AllocationSolution> {
    inst.validate()?;
    if !(broadcast_power > 0.0 && broadcast_power.is_finite()) {
        return Err(Error::Domain(format!(
            "broadcast power must be positive, got {broadcast_power}"
        )));
    }
    let n = inst.nodes.len();
    let share = broadcast_power / n as f64;
    let mut w = f64::INFINITY;
    for node in &inst.nodes {
        let harvested = inst.eh.eval(share * node.gain.broadcast_gain())?;
        w = w.min((harvested - node.c) / node.e);
    }
    let w = w.max(0.0);
    Ok(AllocationSolution {
        w_min: w,
        p_pilot: 0.0,
        e_t: vec![share; n],
        feasible: w > 0.0,
        w_upper: upper_bound_rate(inst),
        trace: Default::default(),
    })
}

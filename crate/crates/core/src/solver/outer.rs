//! Rate bisection and its bounds.

use super::inner::{subproblem_min_energy, InnerOutcome};
use super::{AllocationSolution, ConvergenceTrace, ProblemInstance, TraceStep};
use crate::error::Result;

// Keeps the largest searched rate strictly inside the harvester's range.
const SATURATION_MARGIN: f64 = 1e-12;

/// True when even perfect CSI at zero pilot cost cannot cover the static
/// consumption: `sum_i c_i / g_i(E/t_p) > eta_max E`.
pub fn infeasibility_gate(inst: &ProblemInstance) -> bool {
    let p = inst.max_pilot_power();
    let static_need: f64 = inst.nodes.iter().map(|n| n.c / n.gain.gain(p)).sum();
    static_need > inst.eh.eta_max() * inst.budget
}

/// Perfect-CSI bound on the network sensing rate,
/// `(eta_max E - sum c_i / g_i(E/t_p)) / sum e_i / g_i(E/t_p)`, clipped at
/// zero and capped so every demand stays below the harvester ceiling.
pub fn upper_bound_rate(inst: &ProblemInstance) -> f64 {
    let p = inst.max_pilot_power();
    let (mut c_sum, mut e_sum) = (0.0, 0.0);
    for n in &inst.nodes {
        let g = n.gain.gain(p);
        c_sum += n.c / g;
        e_sum += n.e / g;
    }
    let numerator = inst.eh.eta_max() * inst.budget - c_sum;
    if numerator.is_nan() || numerator <= 0.0 {
        return 0.0;
    }
    let mut w = numerator / e_sum;
    let ceiling = inst.eh.ceiling();
    if ceiling.is_finite() {
        let cap = inst
            .nodes
            .iter()
            .map(|n| (ceiling - n.c) / n.e)
            .fold(f64::INFINITY, f64::min)
            * (1.0 - SATURATION_MARGIN);
        w = w.min(cap.max(0.0));
    }
    w
}

/// Bisects the rate on `[0, w_upper]` using `inner` as the `E_s*(w)` oracle.
pub(crate) fn bisect_rate<F>(inst: &ProblemInstance, w_upper: f64, mut inner: F) -> Result<AllocationSolution>
where
    F: FnMut(f64) -> Result<InnerOutcome>,
{
    inst.validate()?;
    let n = inst.nodes.len();
    if infeasibility_gate(inst) {
        return Ok(AllocationSolution::infeasible(n, 0.0));
    }

    let mut trace = ConvergenceTrace::default();
    let (mut lo, mut hi) = (0.0_f64, w_upper);
    while hi - lo >= inst.epsilon {
        let mid = 0.5 * (lo + hi);
        let out = inner(mid)?;
        let e_s = out.energy();
        let (p_pilot, iters) = out.solved().map_or((f64::NAN, 0), |s| (s.p_pilot, s.iterations));
        trace.steps.push(TraceStep {
            w_lo: lo,
            w_hi: hi,
            w_mid: mid,
            e_s_star: e_s,
            p_pilot,
        });
        trace.inner_iterations.push(iters);
        if e_s - inst.budget > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    match inner(lo)? {
        InnerOutcome::Solved(s) if s.e_s <= inst.budget => Ok(AllocationSolution {
            w_min: lo,
            p_pilot: s.p_pilot,
            e_t: s.e_t,
            feasible: true,
            w_upper,
            trace,
        }),
        _ => {
            let mut sol = AllocationSolution::infeasible(n, w_upper);
            sol.trace = trace;
            Ok(sol)
        }
    }
}

/// Maximizes the minimum sensing rate by bisection on the rate with an exact
/// inner minimization of the block energy.
pub fn solve(inst: &ProblemInstance) -> Result<AllocationSolution> {
    let w_upper = upper_bound_rate(inst);
    bisect_rate(inst, w_upper, |w| subproblem_min_energy(inst, w))
}

//! Max-min sensing-rate allocation.
//!
//! For a target rate `w` the minimum block energy `E_s*(w)` is a
//! one-dimensional convex problem in the pilot power (see [`inner`]). Since
//! `E_s*` is non-decreasing in `w`, the largest sustainable rate is found by
//! bisecting `w` on `[0, w_u]`, where `w_u` is the perfect-CSI bound of
//! [`upper_bound_rate`].

mod baselines;
mod closed_form;
mod inner;
mod outer;

pub use baselines::{solve_broadcast, solve_fixed, solve_fixed_power, solve_random};
pub use closed_form::{asymptotic_constants, solve_asymptotic, solve_closed_form_identical, AsymptoticConstants};
pub use inner::{
    demand, required_transmit_energy, subproblem_min_energy, Infeasibility, InnerOutcome,
    InnerSolution,
};
pub use outer::{infeasibility_gate, solve, upper_bound_rate};

use std::io::Write;

use crate::csv::fmt_f64;
use crate::eh::EhModel;
use crate::error::{Error, Result};
use crate::peb::PebGainModel;

/// Default relative tolerance of the pilot-power root search.
pub const DEFAULT_INNER_TOL: f64 = 1e-9;

/// Per-node consumption and channel.
#[derive(Debug, Clone)]
pub struct NodeProfile {
    /// Energy per unit of sensed data (J/bit).
    pub e: f64,
    /// Static energy per block (J).
    pub c: f64,
    pub gain: PebGainModel,
}

impl NodeProfile {
    pub fn new(e: f64, c: f64, gain: PebGainModel) -> Self {
        Self { e, c, gain }
    }
}

/// One coherence block's allocation problem.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub nodes: Vec<NodeProfile>,
    /// Energy budget of the block (J).
    pub budget: f64,
    /// Fraction of the unit block spent on pilots.
    pub pilot_time: f64,
    pub eh: EhModel,
    /// Termination gap of the rate bisection (bits/s).
    pub epsilon: f64,
    /// Relative tolerance of the pilot-power root search.
    pub inner_tol: f64,
}

impl ProblemInstance {
    pub fn new(nodes: Vec<NodeProfile>, budget: f64, pilot_time: f64, eh: EhModel, epsilon: f64) -> Self {
        Self {
            nodes,
            budget,
            pilot_time,
            eh,
            epsilon,
            inner_tol: DEFAULT_INNER_TOL,
        }
    }

    /// Largest admissible pilot power, `E / t_p`.
    pub fn max_pilot_power(&self) -> f64 {
        self.budget / self.pilot_time
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.nodes.is_empty() {
            return bad("instance has no nodes".into());
        }
        if !(self.pilot_time > 0.0 && self.pilot_time < 1.0) {
            return bad(format!("pilot time must lie in (0, 1), got {}", self.pilot_time));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return bad(format!("budget must be positive, got {}", self.budget));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return bad(format!("inner tolerance must lie in (0, 1), got {}", self.inner_tol));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n.e > 0.0 && n.e.is_finite()) {
                return bad(format!("node {i}: e must be positive, got {}", n.e));
            }
            if !(n.c >= 0.0 && n.c.is_finite()) {
                return bad(format!("node {i}: c must be non-negative, got {}", n.c));
            }
        }
        self.eh.validate()
    }
}

/// One iteration of the rate bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub w_lo: f64,
    pub w_hi: f64,
    pub w_mid: f64,
    /// `E_s*(w_mid)`; infinite when the rate is unreachable.
    pub e_s_star: f64,
    pub p_pilot: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub steps: Vec<TraceStep>,
    /// Root-search iterations of each inner solve.
    pub inner_iterations: Vec<usize>,
}

impl ConvergenceTrace {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "iter,w_lo,w_hi,w_mid,e_s_star,p_pilot")?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                fmt_f64(s.w_lo),
                fmt_f64(s.w_hi),
                fmt_f64(s.w_mid),
                fmt_f64(s.e_s_star),
                fmt_f64(s.p_pilot)
            )?;
        }
        Ok(())
    }
}

/// Rate, pilot power and per-node transmit energies.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationSolution {
    pub w_min: f64,
    pub p_pilot: f64,
    pub e_t: Vec<f64>,
    /// False when no positive allocation satisfies every node.
    pub feasible: bool,
    /// Upper end of the rate search range.
    pub w_upper: f64,
    pub trace: ConvergenceTrace,
}

impl AllocationSolution {
    pub(crate) fn infeasible(n: usize, w_upper: f64) -> Self {
        Self {
            w_min: 0.0,
            p_pilot: 0.0,
            e_t: vec![0.0; n],
            feasible: false,
            w_upper,
            trace: ConvergenceTrace::default(),
        }
    }

    pub fn outer_iterations(&self) -> usize {
        self.trace.steps.len()
    }

    /// Total energy drawn from the budget.
    pub fn energy_used(&self, inst: &ProblemInstance) -> f64 {
        inst.pilot_time * self.p_pilot + self.e_t.iter().sum::<f64>()
    }

    /// Checks every constraint of the allocation problem; returns a message
    /// naming the first violation.
    pub fn check_constraints(&self, inst: &ProblemInstance) -> std::result::Result<(), String> {
        if self.w_min < 0.0 || self.p_pilot < 0.0 || self.e_t.iter().any(|&e| e < 0.0) {
            return Err("negative decision variable".into());
        }
        if self.e_t.len() != inst.nodes.len() {
            return Err("allocation length does not match node count".into());
        }
        let used = self.energy_used(inst);
        if used > inst.budget * (1.0 + 1e-9) {
            return Err(format!("budget exceeded: {used} > {}", inst.budget));
        }
        if !self.feasible {
            return Ok(());
        }
        for (i, (node, &et)) in inst.nodes.iter().zip(&self.e_t).enumerate() {
            let received = et * node.gain.gain(self.p_pilot);
            let harvested = inst.eh.eval(received).map_err(|e| e.to_string())?;
            let need = node.e * self.w_min + node.c;
            if need > harvested * (1.0 + 1e-6) {
                return Err(format!("node {i}: consumption {need} exceeds harvest {harvested}"));
            }
        }
        Ok(())
    }

    pub fn csv_header(n_nodes: usize) -> String {
        let mut h = String::from("w_min_bits_s,p_pilot_w,sum_et_j");
        for i in 0..n_nodes {
            h.push_str(&format!(",et_{i}_j"));
        }
        h.push_str(",outer_iters,feasible");
        h
    }

    pub fn csv_row(&self) -> String {
        let mut r = format!(
            "{},{},{}",
            fmt_f64(self.w_min),
            fmt_f64(self.p_pilot),
            fmt_f64(self.e_t.iter().sum::<f64>())
        );
        for e in &self.e_t {
            r.push(',');
            r.push_str(&fmt_f64(*e));
        }
        r.push_str(&format!(",{},{}", self.outer_iterations(), self.feasible));
        r
    }
}

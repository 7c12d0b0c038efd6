//! Convergence traces, parameter sweeps and the harvester-model comparison.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::{generate_instance, trial_seed, Geometry, ScenarioConfig};
use crate::csv::fmt_f64;
use crate::eh::EhModel;
use crate::error::{Error, Result};
use crate::peb::PebGainModel;
use crate::solver::{
    infeasibility_gate, solve, solve_broadcast, solve_closed_form_identical, solve_fixed,
    solve_random, subproblem_min_energy, upper_bound_rate, AllocationSolution, ProblemInstance,
};
use crate::units::dbm_to_watts;

/// [`solve`], switching to the closed-form pilot power when every node shares
/// one rational gain curve.
pub fn solve_optimal(inst: &ProblemInstance) -> Result<AllocationSolution> {
    let first = &inst.nodes[0].gain;
    let identical = matches!(first, PebGainModel::RationalApprox { .. })
        && inst.nodes.iter().all(|n| match (&n.gain, first) {
            (
                PebGainModel::RationalApprox {
                    sigma_h2: a,
                    n_antennas: na,
                    noise_power: sa,
                },
                PebGainModel::RationalApprox {
                    sigma_h2: b,
                    n_antennas: nb,
                    noise_power: sb,
                },
            ) => a == b && na == nb && sa == sb,
            _ => false,
        });
    if identical {
        solve_closed_form_identical(inst)
    } else {
        solve(inst)
    }
}

/// A solved convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub instance: ProblemInstance,
    pub solution: AllocationSolution,
    /// `E_s*(w_min)`.
    pub final_energy: f64,
    /// `E_s*(w_min + epsilon)`.
    pub next_energy: f64,
}

impl ConvergenceRun {
    /// Checks that the final rate is feasible and one step above it is not
    /// (unless the search hit its upper end).
    pub fn check(&self) -> std::result::Result<(), String> {
        let inst = &self.instance;
        let sol = &self.solution;
        if !sol.feasible {
            return Ok(());
        }
        if self.final_energy > inst.budget {
            return Err(format!("final energy {} exceeds the budget", self.final_energy));
        }
        if sol.w_min < sol.w_upper - inst.epsilon && self.next_energy <= inst.budget {
            return Err(format!(
                "rate {} + epsilon is still feasible",
                sol.w_min
            ));
        }
        Ok(())
    }
}

/// Solves trial 0 of `cfg` and records the bisection trace.
pub fn run_convergence(cfg: &ScenarioConfig) -> Result<ConvergenceRun> {
    let instance = generate_instance(cfg, 0)?;
    let solution = solve(&instance)?;
    let final_energy = subproblem_min_energy(&instance, solution.w_min)?.energy();
    let next_energy = subproblem_min_energy(&instance, solution.w_min + instance.epsilon)?.energy();
    Ok(ConvergenceRun {
        instance,
        solution,
        final_energy,
        next_energy,
    })
}

/// Allocation schemes compared in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Optimal,
    /// Fixed share of `E / t_p` spent on pilots.
    Fixed(f64),
    /// Pilot power uniform on `[0, E / t_p)`.
    Random,
    /// Incoherent broadcast at the given power (W).
    Broadcast(f64),
    /// Perfect-CSI bound.
    UpperBound,
}

impl Method {
    pub fn evaluate(&self, inst: &ProblemInstance, seed: u64) -> Result<f64> {
        Ok(match *self {
            Method::Optimal => solve_optimal(inst)?.w_min,
            Method::Fixed(f) => solve_fixed(inst, f)?.w_min,
            Method::Random => solve_random(inst, seed)?.w_min,
            Method::Broadcast(p) => solve_broadcast(inst, p)?.w_min,
            Method::UpperBound => {
                if infeasibility_gate(inst) {
                    0.0
                } else {
                    upper_bound_rate(inst)
                }
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Optimal => write!(f, "optimal"),
            Method::Fixed(x) => write!(f, "fixed:{x}"),
            Method::Random => write!(f, "random"),
            Method::Broadcast(p) => write!(f, "broadcast:{p}"),
            Method::UpperBound => write!(f, "upper_bound"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |default: f64| -> std::result::Result<f64, String> {
            arg.map_or(Ok(default), |a| a.parse().map_err(|_| format!("bad number `{a}`")))
        };
        match name {
            "optimal" if arg.is_none() => Ok(Method::Optimal),
            "fixed" => Ok(Method::Fixed(num(0.1)?)),
            "random" if arg.is_none() => Ok(Method::Random),
            "broadcast" => Ok(Method::Broadcast(num(3.0)?)),
            "upper_bound" if arg.is_none() => Ok(Method::UpperBound),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Outer radius of the deployment (m).
    Radius,
    NNodes,
    NoiseDbm,
    /// Static consumption per block (J).
    CStatic,
}

impl SweepParameter {
    pub fn apply(&self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = cfg.clone();
        match self {
            SweepParameter::Radius => out.geometry = cfg.geometry.with_radius(value),
            SweepParameter::NNodes => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidModel(format!("node count must be a positive integer, got {value}")));
                }
                out.n_nodes = value as usize;
            }
            SweepParameter::NoiseDbm => out.noise_power = dbm_to_watts(value),
            SweepParameter::CStatic => out.c_static = value,
        }
        out.validate()?;
        Ok(out)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Radius => "radius",
            SweepParameter::NNodes => "n_nodes",
            SweepParameter::NoiseDbm => "noise_dbm",
            SweepParameter::CStatic => "c_static",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "radius" => Ok(SweepParameter::Radius),
            "n_nodes" => Ok(SweepParameter::NNodes),
            "noise_dbm" => Ok(SweepParameter::NoiseDbm),
            "c_static" => Ok(SweepParameter::CStatic),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Radius,
            values: vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
            methods: vec![
                Method::Optimal,
                Method::Fixed(0.1),
                Method::Random,
                Method::Broadcast(3.0),
                Method::UpperBound,
            ],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidModel("sweep needs values and methods".into()));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::InvalidModel("sweep values must be strictly monotone".into()));
        }
        Ok(())
    }
}

/// Mean over trials of one (value, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter_value: f64,
    pub method: Method,
    pub mean_w: f64,
    pub stderr_w: f64,
    pub trials: usize,
}

/// One trial of one sweep value: the rate of every method on the same
/// instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub parameter_value: f64,
    pub trial: u64,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "parameter_value,method,mean_w,stderr_w,trials")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(r.parameter_value),
                r.method,
                fmt_f64(r.mean_w),
                fmt_f64(r.stderr_w),
                r.trials
            )?;
        }
        Ok(())
    }

    pub fn mean(&self, value_index: usize, method: Method) -> Option<f64> {
        let m = self.spec.methods.iter().position(|&x| x == method)?;
        self.rows.get(value_index * self.spec.methods.len() + m).map(|r| r.mean_w)
    }

    /// Per-trial violations of `baseline <= optimal + tol <= bound + 2 tol`.
    pub fn dominance_violations(&self, tol: f64) -> Vec<String> {
        let methods = &self.spec.methods;
        let Some(opt) = methods.iter().position(|&m| m == Method::Optimal) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for rec in &self.records {
            let w = rec.rates[opt];
            for (k, m) in methods.iter().enumerate() {
                let bad = match m {
                    Method::Optimal => false,
                    Method::UpperBound => w > rec.rates[k] + tol,
                    _ => rec.rates[k] > w + tol,
                };
                if bad {
                    out.push(format!(
                        "value {} trial {}: {m} = {} vs optimal {w}",
                        rec.parameter_value, rec.trial, rec.rates[k]
                    ));
                }
            }
        }
        out
    }
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Averages each method over `cfg.trials` instances per sweep value. Every
/// method sees the same instance for a given trial index.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &value in &spec.values {
        let c = spec.parameter.apply(cfg, value)?;
        let trials: Vec<TrialRecord> = (0..c.trials as u64)
            .into_par_iter()
            .map(|t| {
                let inst = generate_instance(&c, t)?;
                let seed = trial_seed(c.seed, t);
                let rates = spec
                    .methods
                    .iter()
                    .map(|m| m.evaluate(&inst, seed))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TrialRecord {
                    parameter_value: value,
                    trial: t,
                    rates,
                })
            })
            .collect::<Result<_>>()?;
        for (k, &method) in spec.methods.iter().enumerate() {
            let ws: Vec<f64> = trials.iter().map(|r| r.rates[k]).collect();
            let (mean_w, stderr_w) = mean_stderr(&ws);
            rows.push(SweepRow {
                parameter_value: value,
                method,
                mean_w,
                stderr_w,
                trials: ws.len(),
            });
        }
        records.extend(trials);
    }
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub trial: u64,
    pub w_nl: f64,
    pub w_l: f64,
    pub rel_err: f64,
}

/// Solves every trial under `cfg.eh` and under a linear harvester with
/// `alpha = eta_max`.
pub fn compare_eh_models(cfg: &ScenarioConfig) -> Result<Vec<CompareRow>> {
    compare_eh_models_with(cfg, cfg.eh.eta_max())
}

/// As [`compare_eh_models`] with an explicit linear rate.
pub fn compare_eh_models_with(cfg: &ScenarioConfig, alpha: f64) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let linear = EhModel::linear(alpha);
    linear.validate()?;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut inst = generate_instance(cfg, t)?;
            let w_nl = solve(&inst)?.w_min;
            inst.eh = linear.clone();
            let w_l = solve(&inst)?.w_min;
            let rel_err = if w_nl > 0.0 {
                (w_nl - w_l).abs() / w_nl
            } else if w_l == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(CompareRow { trial: t, w_nl, w_l, rel_err })
        })
        .collect()
}

pub fn write_compare_csv<W: Write>(out: &mut W, rows: &[CompareRow]) -> Result<()> {
    writeln!(out, "trial,w_nl,w_l,rel_err")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.trial,
            fmt_f64(r.w_nl),
            fmt_f64(r.w_l),
            fmt_f64(r.rel_err)
        )?;
    }
    Ok(())
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "median of an empty slice");
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl Geometry {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Geometry::Disk { .. } => "disk",
            Geometry::Annulus { .. } => "annulus",
            Geometry::FixedRing { .. } => "ring",
        }
    }
}

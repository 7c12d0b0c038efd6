//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 infeasible
//! problem (`solve` returned a zero rate), 3 numeric-domain error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::config::{parse_config, ProbeConfig, RunConfig};
use crate::error::{Error, Result};
use crate::peb::{log_grid, qualify_gain_on, write_gain_curve, PebGainModel};
use crate::sim::{
    compare_eh_models, gain_model, generate_instance, median, run_convergence, run_sweep,
    solve_optimal, trial_seed, write_compare_csv,
};
use crate::solver::AllocationSolution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// Solve trial 0 of the scenario.
    Solve,
    /// Average every method over the sweep values.
    Sweep,
    /// Record the bisection trace of trial 0.
    Convergence,
    /// Tabulate the gain curve at the probe distance.
    PebGain,
    /// Compare the configured harvester with its linear bound.
    CompareEh,
    /// Check the probe gain curve against the qualification conditions.
    Validate,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "wpsn", version, about = "Pilot and energy-beam power allocation")]
pub struct CliCommand {
    #[arg(value_enum)]
    pub verb: Verb,
    #[arg(long = "config")]
    pub config_path: PathBuf,
    #[arg(long = "out", default_value = ".")]
    pub output_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `key=value`, applied after the file.
    #[arg(long = "set")]
    pub overrides: Vec<String>,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidModel(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Domain(_) | Error::SaturationInfeasible { .. } | Error::ZeroGain { .. } => EXIT_NUMERIC,
    }
}

/// Runs the command, prints a one-line summary and returns the exit code.
pub fn dispatch(cmd: &CliCommand) -> i32 {
    match run(cmd) {
        Ok((code, summary)) => {
            println!("{summary}");
            code
        }
        Err(e) => {
            eprintln!("wpsn: {e}");
            exit_code(&e)
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn probe_gain(cfg: &RunConfig) -> Result<PebGainModel> {
    let s = &cfg.scenario;
    gain_model(s, cfg.probe.distance_m, trial_seed(s.seed, 0))
}

fn probe_grid(p: &ProbeConfig) -> Vec<f64> {
    log_grid(p.p_min, p.p_max, p.points)
}

/// Runs the command; returns the exit code and the summary line.
pub fn run(cmd: &CliCommand) -> Result<(i32, String)> {
    let mut cfg = parse_config(&cmd.config_path, &cmd.overrides)?;
    if let Some(seed) = cmd.seed {
        cfg.scenario.seed = seed;
    }
    let out = &cmd.output_dir;
    match cmd.verb {
        Verb::Solve => {
            let inst = generate_instance(&cfg.scenario, 0)?;
            let sol = solve_optimal(&inst)?;
            let mut f = create(out, "solution.csv")?;
            writeln!(f, "{}", AllocationSolution::csv_header(inst.nodes.len()))?;
            writeln!(f, "{}", sol.csv_row())?;
            f.flush()?;
            let code = if sol.feasible && sol.w_min > 0.0 {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            };
            Ok((
                code,
                format!(
                    "solve: w_min={:e} bits/s p_pilot={:e} W feasible={}",
                    sol.w_min, sol.p_pilot, sol.feasible
                ),
            ))
        }
        Verb::Sweep => {
            let res = run_sweep(&cfg.scenario, &cfg.sweep)?;
            let mut f = create(out, "sweep.csv")?;
            res.write_csv(&mut f)?;
            f.flush()?;
            Ok((
                EXIT_OK,
                format!(
                    "sweep: {} values x {} methods x {} trials",
                    cfg.sweep.values.len(),
                    cfg.sweep.methods.len(),
                    cfg.scenario.trials
                ),
            ))
        }
        Verb::Convergence => {
            let run = run_convergence(&cfg.scenario)?;
            let mut f = create(out, "convergence.csv")?;
            run.solution.trace.write_csv(&mut f)?;
            f.flush()?;
            run.check().map_err(Error::Domain)?;
            Ok((
                EXIT_OK,
                format!(
                    "convergence: {} iterations, w_min={:e} bits/s, E_s*={:e} J",
                    run.solution.outer_iterations(),
                    run.solution.w_min,
                    run.final_energy
                ),
            ))
        }
        Verb::PebGain => {
            let g = probe_gain(&cfg)?;
            let mut f = create(out, "gain_curve.csv")?;
            write_gain_curve(&mut f, &g, &probe_grid(&cfg.probe))?;
            f.flush()?;
            Ok((
                EXIT_OK,
                format!(
                    "peb-gain: {} backend, {} points at {} m",
                    g.backend_name(),
                    cfg.probe.points,
                    cfg.probe.distance_m
                ),
            ))
        }
        Verb::CompareEh => {
            let rows = compare_eh_models(&cfg.scenario)?;
            let mut f = create(out, "compare.csv")?;
            write_compare_csv(&mut f, &rows)?;
            f.flush()?;
            let errs: Vec<f64> = rows.iter().map(|r| r.rel_err).collect();
            Ok((
                EXIT_OK,
                format!("compare-eh: median relative error {:e} over {} trials", median(&errs), rows.len()),
            ))
        }
        Verb::Validate => {
            let g = probe_gain(&cfg)?;
            let r = qualify_gain_on(&g, &probe_grid(&cfg.probe));
            Ok((
                EXIT_OK,
                format!(
                    "validate: {} monotone={} concave={} bounded={}",
                    g.backend_name(),
                    r.monotone,
                    r.concave,
                    r.bounded
                ),
            ))
        }
    }
}

//! Flat `section.key = value` scenario files.
//!
//! Blank lines and lines starting with `#` are ignored. Overrides (`--set
//! key=value`) are applied after the file and report line 0 in errors.
//! Sections with a `kind` key (`geometry`, `eh`, `gain`) fall back to their
//! defaults only when none of their keys appear; once one does, every
//! parameter of the selected kind is required.
//!
//! | key | default |
//! |-----|---------|
//! | `scenario.n_nodes` | 20 |
//! | `scenario.budget_j` | 3 |
//! | `scenario.pilot_time` | 0.1 |
//! | `scenario.epsilon` | 0.001 |
//! | `scenario.inner_tol` | 1e-9 |
//! | `scenario.trials` | 1000 |
//! | `scenario.seed` | 0 |
//! | `geometry.kind` | `disk` (`disk`, `annulus`, `ring`) |
//! | `geometry.radius_m` | 10 (disk, ring) |
//! | `geometry.inner_m`, `geometry.outer_m` | annulus only |
//! | `channel.n_antennas` | 32 |
//! | `channel.carrier_hz` | 915e6 |
//! | `channel.rician_k` | 10 (`inf` for pure line of sight) |
//! | `channel.noise_dbm` or `channel.noise_w` | -90 dBm |
//! | `consumption.e_coeff` | 1e-7 |
//! | `consumption.c_static` | 3e-6 |
//! | `eh.kind` | `saturating_exp` (`linear`, `saturating_exp`, `tabulated`) |
//! | `eh.alpha` | linear only |
//! | `eh.p_max`, `eh.eta_max` | 0.02, 0.3 |
//! | `eh.table` | tabulated only, `x:y, x:y, ...` |
//! | `gain.backend` | `rational` (`rational`, `asymptotic`, `monte_carlo`) |
//! | `gain.samples`, `gain.estimator` | monte_carlo only: 1000, `ls` (`ls`, `mmse`) |
//! | `sweep.parameter` | `radius` (`radius`, `n_nodes`, `noise_dbm`, `c_static`) |
//! | `sweep.values` | `4, 6, 8, 10, 12, 14, 16` |
//! | `sweep.methods` | `optimal, fixed:0.1, random, broadcast:3, upper_bound` |
//! | `probe.distance_m` | 11.69 |
//! | `probe.p_min_w`, `probe.p_max_w` | 1e-6, 1 |
//! | `probe.points` | 50 |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::eh::{EhModel, HarvestTable};
use crate::error::{Error, Result};
use crate::sim::{GainBackend, Geometry, Method, ScenarioConfig, SweepSpec};
use crate::units::dbm_to_watts;

/// Where `peb-gain` and `validate` evaluate a single gain curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub distance_m: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            distance_m: 11.69,
            p_min: 1e-6,
            p_max: 1.0,
            points: 50,
        }
    }
}

/// Everything a CLI run reads from its config file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepSpec,
    pub probe: ProbeConfig,
}

const KEYS: &[&str] = &[
    "scenario.n_nodes",
    "scenario.budget_j",
    "scenario.pilot_time",
    "scenario.epsilon",
    "scenario.inner_tol",
    "scenario.trials",
    "scenario.seed",
    "geometry.kind",
    "geometry.radius_m",
    "geometry.inner_m",
    "geometry.outer_m",
    "channel.n_antennas",
    "channel.carrier_hz",
    "channel.rician_k",
    "channel.noise_dbm",
    "channel.noise_w",
    "consumption.e_coeff",
    "consumption.c_static",
    "eh.kind",
    "eh.alpha",
    "eh.p_max",
    "eh.eta_max",
    "eh.table",
    "gain.backend",
    "gain.samples",
    "gain.estimator",
    "sweep.parameter",
    "sweep.values",
    "sweep.methods",
    "probe.distance_m",
    "probe.p_min_w",
    "probe.p_max_w",
    "probe.points",
];

fn config_err(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn insert(&mut self, key: &str, value: &str, line: usize, from_file: bool) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(config_err(key, line, "unknown key"));
        }
        if from_file && self.map.contains_key(key) {
            return Err(config_err(key, line, "duplicate key"));
        }
        self.map.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.map.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn section_line(&self, section: &str) -> Option<usize> {
        let prefix = format!("{section}.");
        self.map
            .iter()
            .filter(|(k, _)| k.starts_with(&prefix))
            .map(|(_, (_, l))| *l)
            .min()
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<(T, usize)>> {
        let Some((v, line)) = self.raw(key) else {
            return Ok(None);
        };
        v.parse::<T>()
            .map(|x| Some((x, line)))
            .map_err(|_| config_err(key, line, format!("cannot parse `{v}`")))
    }

    fn f64_where(&self, key: &str, ok: impl Fn(f64) -> bool, what: &str) -> Result<Option<f64>> {
        match self.get::<f64>(key)? {
            None => Ok(None),
            Some((x, _)) if ok(x) => Ok(Some(x)),
            Some((x, line)) => Err(config_err(key, line, format!("must be {what}, got {x}"))),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        self.f64_where(key, |x| x > 0.0 && x.is_finite(), "positive")
    }

    fn non_negative(&self, key: &str) -> Result<Option<f64>> {
        self.f64_where(key, |x| x >= 0.0 && x.is_finite(), "non-negative")
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.get::<usize>(key)? {
            Some((0, line)) => Err(config_err(key, line, "must be at least 1")),
            other => Ok(other.map(|(x, _)| x)),
        }
    }

    fn required<T>(&self, key: &str, section_line: usize, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| config_err(key, section_line, "required by the selected kind"))
    }

    fn reject_unused(&self, section: &str, used: &[&str], kind: &str) -> Result<()> {
        let prefix = format!("{section}.");
        for (k, (_, line)) in &self.map {
            if let Some(rest) = k.strip_prefix(&prefix) {
                if rest != "kind" && rest != "backend" && !used.contains(&rest) {
                    return Err(config_err(k, *line, format!("not used by kind `{kind}`")));
                }
            }
        }
        Ok(())
    }
}

fn split_line(text: &str, line: usize) -> Result<Option<(String, String)>> {
    let t = text.trim();
    if t.is_empty() || t.starts_with('#') {
        return Ok(None);
    }
    let Some((k, v)) = t.split_once('=') else {
        return Err(config_err(t, line, "expected `key = value`"));
    };
    Ok(Some((k.trim().to_string(), v.trim().to_string())))
}

/// Reads and validates a config file, then applies `overrides`.
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err("", 0, format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text, overrides)
}

/// As [`parse_config`] for in-memory text.
pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut entries = Entries { map: BTreeMap::new() };
    for (i, l) in text.lines().enumerate() {
        if let Some((k, v)) = split_line(l, i + 1)? {
            entries.insert(&k, &v, i + 1, true)?;
        }
    }
    for o in overrides {
        match split_line(o, 0)? {
            Some((k, v)) => entries.insert(&k, &v, 0, false)?,
            None => return Err(config_err(o, 0, "empty override")),
        }
    }
    build(&entries)
}

fn build(en: &Entries) -> Result<RunConfig> {
    let d = ScenarioConfig::default();
    let mut s = ScenarioConfig {
        n_nodes: en.count("scenario.n_nodes")?.unwrap_or(d.n_nodes),
        budget: en.positive("scenario.budget_j")?.unwrap_or(d.budget),
        pilot_time: en
            .f64_where("scenario.pilot_time", |x| x > 0.0 && x < 1.0, "in (0, 1)")?
            .unwrap_or(d.pilot_time),
        epsilon: en.positive("scenario.epsilon")?.unwrap_or(d.epsilon),
        inner_tol: en
            .f64_where("scenario.inner_tol", |x| x > 0.0 && x < 1.0, "in (0, 1)")?
            .unwrap_or(d.inner_tol),
        trials: en.count("scenario.trials")?.unwrap_or(d.trials),
        seed: en.get::<u64>("scenario.seed")?.map_or(d.seed, |(x, _)| x),
        n_antennas: en.count("channel.n_antennas")?.unwrap_or(d.n_antennas),
        carrier_hz: en.positive("channel.carrier_hz")?.unwrap_or(d.carrier_hz),
        rician_k: en
            .f64_where("channel.rician_k", |x| x >= 0.0, "non-negative")?
            .unwrap_or(d.rician_k),
        e_coeff: en.positive("consumption.e_coeff")?.unwrap_or(d.e_coeff),
        c_static: en.non_negative("consumption.c_static")?.unwrap_or(d.c_static),
        ..d.clone()
    };

    let dbm = en.f64_where("channel.noise_dbm", f64::is_finite, "finite")?;
    let watts = en.positive("channel.noise_w")?;
    s.noise_power = match (dbm, watts) {
        (Some(_), Some(_)) => {
            let (_, line) = en.raw("channel.noise_w").unwrap();
            return Err(config_err("channel.noise_w", line, "conflicts with channel.noise_dbm"));
        }
        (Some(x), None) => dbm_to_watts(x),
        (None, Some(w)) => w,
        (None, None) => d.noise_power,
    };

    s.geometry = build_geometry(en, d.geometry)?;
    s.eh = build_eh(en, d.eh.clone())?;
    s.gain = build_gain(en, d.gain)?;

    let sweep = build_sweep(en)?;
    let probe = build_probe(en)?;

    // cross-field checks not covered above
    s.validate()
        .map_err(|e| config_err("scenario", 0, e.to_string()))?;
    Ok(RunConfig {
        scenario: s,
        sweep,
        probe,
    })
}

fn build_geometry(en: &Entries, default: Geometry) -> Result<Geometry> {
    let Some(line) = en.section_line("geometry") else {
        return Ok(default);
    };
    let kind = en.get::<String>("geometry.kind")?.map_or("disk".to_string(), |(k, _)| k);
    match kind.as_str() {
        "disk" | "ring" => {
            en.reject_unused("geometry", &["radius_m"], &kind)?;
            let r = en.required("geometry.radius_m", line, en.positive("geometry.radius_m")?)?;
            Ok(if kind == "disk" {
                Geometry::Disk { radius_m: r }
            } else {
                Geometry::FixedRing { radius_m: r }
            })
        }
        "annulus" => {
            en.reject_unused("geometry", &["inner_m", "outer_m"], &kind)?;
            let inner = en.required("geometry.inner_m", line, en.non_negative("geometry.inner_m")?)?;
            let outer = en.required("geometry.outer_m", line, en.positive("geometry.outer_m")?)?;
            if outer <= inner {
                let l = en.raw("geometry.outer_m").map_or(line, |(_, l)| l);
                return Err(config_err("geometry.outer_m", l, "must exceed geometry.inner_m"));
            }
            Ok(Geometry::Annulus {
                inner_m: inner,
                outer_m: outer,
            })
        }
        other => {
            let (_, l) = en.raw("geometry.kind").unwrap();
            Err(config_err("geometry.kind", l, format!("unknown kind `{other}`")))
        }
    }
}

fn parse_table(en: &Entries) -> Result<Option<HarvestTable>> {
    let Some((v, line)) = en.raw("eh.table") else {
        return Ok(None);
    };
    let bad = |m: String| config_err("eh.table", line, m);
    let mut pts = Vec::new();
    for pair in v.split(',') {
        let (x, y) = pair
            .split_once(':')
            .ok_or_else(|| bad(format!("expected `x:y`, got `{}`", pair.trim())))?;
        let x: f64 = x.trim().parse().map_err(|_| bad(format!("cannot parse `{x}`")))?;
        let y: f64 = y.trim().parse().map_err(|_| bad(format!("cannot parse `{y}`")))?;
        pts.push((x, y));
    }
    HarvestTable::new(&pts).map(Some).map_err(|e| bad(e.to_string()))
}

fn build_eh(en: &Entries, default: EhModel) -> Result<EhModel> {
    let Some(line) = en.section_line("eh") else {
        return Ok(default);
    };
    let kind = en
        .get::<String>("eh.kind")?
        .map_or("saturating_exp".to_string(), |(k, _)| k);
    match kind.as_str() {
        "linear" => {
            en.reject_unused("eh", &["alpha"], &kind)?;
            let alpha = en.required("eh.alpha", line, en.positive("eh.alpha")?)?;
            Ok(EhModel::linear(alpha))
        }
        "saturating_exp" => {
            en.reject_unused("eh", &["p_max", "eta_max"], &kind)?;
            let p_max = en.required("eh.p_max", line, en.positive("eh.p_max")?)?;
            let eta = en.required("eh.eta_max", line, en.positive("eh.eta_max")?)?;
            Ok(EhModel::saturating(p_max, eta))
        }
        "tabulated" => {
            en.reject_unused("eh", &["table"], &kind)?;
            let t = en.required("eh.table", line, parse_table(en)?)?;
            Ok(EhModel::Tabulated(t))
        }
        other => {
            let (_, l) = en.raw("eh.kind").unwrap();
            Err(config_err("eh.kind", l, format!("unknown kind `{other}`")))
        }
    }
}

fn build_gain(en: &Entries, default: GainBackend) -> Result<GainBackend> {
    if en.section_line("gain").is_none() {
        return Ok(default);
    }
    let backend = en
        .get::<String>("gain.backend")?
        .map_or("rational".to_string(), |(k, _)| k);
    match backend.as_str() {
        "rational" | "asymptotic" => {
            en.reject_unused("gain", &[], &backend)?;
            Ok(if backend == "rational" {
                GainBackend::Rational
            } else {
                GainBackend::Asymptotic
            })
        }
        "monte_carlo" => {
            let samples = en.count("gain.samples")?.unwrap_or(1000);
            let mmse = match en.raw("gain.estimator") {
                None | Some(("ls", _)) => false,
                Some(("mmse", _)) => true,
                Some((other, l)) => {
                    return Err(config_err("gain.estimator", l, format!("unknown estimator `{other}`")))
                }
            };
            Ok(GainBackend::MonteCarlo { samples, mmse })
        }
        other => {
            let (_, l) = en.raw("gain.backend").unwrap();
            Err(config_err("gain.backend", l, format!("unknown backend `{other}`")))
        }
    }
}

fn build_sweep(en: &Entries) -> Result<SweepSpec> {
    let mut spec = SweepSpec::default();
    if let Some((v, line)) = en.raw("sweep.parameter") {
        spec.parameter = v.parse().map_err(|m: String| config_err("sweep.parameter", line, m))?;
    }
    if let Some((v, line)) = en.raw("sweep.values") {
        spec.values = v
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| config_err("sweep.values", line, format!("cannot parse `{}`", x.trim())))
            })
            .collect::<Result<_>>()?;
    }
    if let Some((v, line)) = en.raw("sweep.methods") {
        spec.methods = v
            .split(',')
            .map(|m| m.parse::<Method>().map_err(|e| config_err("sweep.methods", line, e)))
            .collect::<Result<_>>()?;
    }
    spec.validate().map_err(|e| {
        let line = en.section_line("sweep").unwrap_or(0);
        config_err("sweep.values", line, e.to_string())
    })?;
    Ok(spec)
}

fn build_probe(en: &Entries) -> Result<ProbeConfig> {
    let d = ProbeConfig::default();
    let p = ProbeConfig {
        distance_m: en.positive("probe.distance_m")?.unwrap_or(d.distance_m),
        p_min: en.positive("probe.p_min_w")?.unwrap_or(d.p_min),
        p_max: en.positive("probe.p_max_w")?.unwrap_or(d.p_max),
        points: en.count("probe.points")?.unwrap_or(d.points),
    };
    if p.points < 2 {
        let line = en.raw("probe.points").map_or(0, |(_, l)| l);
        return Err(config_err("probe.points", line, "must be at least 2"));
    }
    if p.p_max <= p.p_min {
        let line = en.raw("probe.p_max_w").map_or(0, |(_, l)| l);
        return Err(config_err("probe.p_max_w", line, "must exceed probe.p_min_w"));
    }
    Ok(p)
}

fn num(x: f64) -> String {
    // both forms parse back to the same bits
    if x == 0.0 || (1e-3..1e7).contains(&x.abs()) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Serializes every key; [`parse_config_str`] reads it back unchanged.
pub fn write_config(cfg: &RunConfig) -> String {
    let s = &cfg.scenario;
    let mut o = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(o, "{k} = {v}");
    };
    kv("scenario.n_nodes", s.n_nodes.to_string());
    kv("scenario.budget_j", num(s.budget));
    kv("scenario.pilot_time", num(s.pilot_time));
    kv("scenario.epsilon", num(s.epsilon));
    kv("scenario.inner_tol", num(s.inner_tol));
    kv("scenario.trials", s.trials.to_string());
    kv("scenario.seed", s.seed.to_string());
    kv("geometry.kind", s.geometry.kind_name().into());
    match s.geometry {
        Geometry::Disk { radius_m } | Geometry::FixedRing { radius_m } => {
            kv("geometry.radius_m", num(radius_m))
        }
        Geometry::Annulus { inner_m, outer_m } => {
            kv("geometry.inner_m", num(inner_m));
            kv("geometry.outer_m", num(outer_m));
        }
    }
    kv("channel.n_antennas", s.n_antennas.to_string());
    kv("channel.carrier_hz", num(s.carrier_hz));
    kv("channel.rician_k", num(s.rician_k));
    kv("channel.noise_w", num(s.noise_power));
    kv("consumption.e_coeff", num(s.e_coeff));
    kv("consumption.c_static", num(s.c_static));
    match &s.eh {
        EhModel::Linear { alpha } => {
            kv("eh.kind", "linear".into());
            kv("eh.alpha", num(*alpha));
        }
        EhModel::SaturatingExponential { p_max, eta_max } => {
            kv("eh.kind", "saturating_exp".into());
            kv("eh.p_max", num(*p_max));
            kv("eh.eta_max", num(*eta_max));
        }
        EhModel::Tabulated(t) => {
            kv("eh.kind", "tabulated".into());
            let pts: Vec<String> = t
                .points()
                .iter()
                .map(|(x, y)| format!("{}:{}", num(*x), num(*y)))
                .collect();
            kv("eh.table", pts.join(", "));
        }
    }
    match s.gain {
        GainBackend::Rational => kv("gain.backend", "rational".into()),
        GainBackend::Asymptotic => kv("gain.backend", "asymptotic".into()),
        GainBackend::MonteCarlo { samples, mmse } => {
            kv("gain.backend", "monte_carlo".into());
            kv("gain.samples", samples.to_string());
            kv("gain.estimator", if mmse { "mmse" } else { "ls" }.into());
        }
    }
    let sw = &cfg.sweep;
    kv("sweep.parameter", sw.parameter.name().into());
    kv(
        "sweep.values",
        sw.values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", "),
    );
    kv(
        "sweep.methods",
        sw.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", "),
    );
    let p = &cfg.probe;
    kv("probe.distance_m", num(p.distance_m));
    kv("probe.p_min_w", num(p.p_min));
    kv("probe.p_max_w", num(p.p_max));
    kv("probe.points", p.points.to_string());
    o
}

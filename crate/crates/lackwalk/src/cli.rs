//! Command-line front end: config parsing, run dispatch and CSV/JSON
//! serialization.  File formats are the external contract; floats go out
//! with 17 significant digits so CSV round-trips are exact for doubles.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::WalkError;
use crate::experiments::{
    default_horizon, fit_scaling, geometric_grid, scaling_run, sweep_loop_weight, ClusterSpec,
    FitModel, FitResult, LoopWeightRule, ScalingRow, SweepRow, DEFAULT_PROMINENCE,
};
use crate::lattice::{CoinFamily, CoinSpec, LatticeGeometry, VertexId};
use crate::search::{evolve_trace, find_first_peak, PeakResult, Termination};

/// Config errors exit with code 2, runtime errors with code 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {}", msg),
            CliError::Runtime(msg) => write!(f, "runtime error: {}", msg),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn config_err(field: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {}", field, detail))
}

/// Serializes with 17 significant digits (exact f64 round-trip).
pub fn fmt_float(x: f64) -> String {
    format!("{:.16e}", x)
}

// ---------------------------------------------------------------------------
// field parsers

pub fn parse_family(s: &str) -> Result<CoinFamily, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "g" => Ok(CoinFamily::G),
        "akr" => Ok(CoinFamily::Akr),
        "skw" => Ok(CoinFamily::Skw),
        other => Err(config_err("coin", format!("expected g, akr or skw, got `{}`", other))),
    }
}

/// Either a literal weight or a `c/N` rule.
pub fn parse_weight_rule(s: &str) -> Result<LoopWeightRule, CliError> {
    let s = s.trim();
    if let Some(c) = s.strip_suffix("/N").or_else(|| s.strip_suffix("/n")) {
        let c: f64 = c
            .parse()
            .map_err(|_| config_err("loop-weight", format!("bad numerator in `{}`", s)))?;
        if !(c > 0.0) || !c.is_finite() {
            return Err(config_err("loop-weight", "numerator must be positive and finite"));
        }
        Ok(LoopWeightRule::OverN(c))
    } else {
        let a: f64 =
            s.parse().map_err(|_| config_err("loop-weight", format!("bad value `{}`", s)))?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(config_err("loop-weight", "must be positive and finite"));
        }
        Ok(LoopWeightRule::Constant(a))
    }
}

/// `run:m`, `block:kxl`, `diag` or `list:v0,v1,...`.
pub fn parse_cluster(s: &str) -> Result<ClusterSpec, CliError> {
    let s = s.trim();
    if s == "diag" {
        return Ok(ClusterSpec::Diagonal);
    }
    if let Some(m) = s.strip_prefix("run:") {
        let m = m.parse().map_err(|_| config_err("cluster", format!("bad run length `{}`", m)))?;
        return Ok(ClusterSpec::Run { m });
    }
    if let Some(kl) = s.strip_prefix("block:") {
        let (k, l) = kl
            .split_once('x')
            .ok_or_else(|| config_err("cluster", format!("expected block:kxl, got `{}`", s)))?;
        let k = k.parse().map_err(|_| config_err("cluster", format!("bad block width `{}`", k)))?;
        let l = l.parse().map_err(|_| config_err("cluster", format!("bad block height `{}`", l)))?;
        return Ok(ClusterSpec::Block { k, l });
    }
    if let Some(list) = s.strip_prefix("list:") {
        let ids = list
            .split(',')
            .map(|v| v.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| config_err("cluster", format!("bad vertex list `{}`", list)))?;
        if ids.is_empty() {
            return Err(config_err("cluster", "vertex list is empty"));
        }
        return Ok(ClusterSpec::Explicit(ids));
    }
    Err(config_err("cluster", format!("expected run:m, block:kxl, diag or list:..., got `{}`", s)))
}

/// `x` or `x,y`.
pub fn parse_anchor(s: &str) -> Result<(usize, usize), CliError> {
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| config_err("anchor", format!("bad coordinate `{}`", v)))
    };
    match s.split_once(',') {
        Some((x, y)) => Ok((parse(x)?, parse(y)?)),
        None => Ok((parse(s)?, 0)),
    }
}

/// `lo:hi:count` geometric grid or a comma-separated list.
pub fn parse_weights(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let lo: f64 =
            parts[0].parse().map_err(|_| config_err("weights", "bad lower bound"))?;
        let hi: f64 =
            parts[1].parse().map_err(|_| config_err("weights", "bad upper bound"))?;
        let count: usize =
            parts[2].parse().map_err(|_| config_err("weights", "bad point count"))?;
        if !(lo > 0.0) || !(hi >= lo) || count == 0 {
            return Err(config_err("weights", "grid must satisfy 0 < lo <= hi and count >= 1"));
        }
        geometric_grid(lo, hi, count)
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| config_err("weights", format!("bad weight list `{}`", s)))?
    };
    if grid.is_empty() {
        return Err(config_err("weights", "empty weight grid"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(config_err("weights", "weights must be sorted ascending"));
    }
    Ok(grid)
}

pub fn parse_fit_model(s: &str) -> Result<FitModel, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "power_law" => Ok(FitModel::PowerLaw),
        "linear_over_m" => Ok(FitModel::LinearOverM),
        "sqrt_log" => Ok(FitModel::SqrtLog),
        other => Err(config_err(
            "fit",
            format!("expected power_law, linear_over_m or sqrt_log, got `{}`", other),
        )),
    }
}

// ---------------------------------------------------------------------------
// config file

const KNOWN_KEYS: &[&str] = &[
    "dim", "side", "coin", "loop-weight", "cluster", "anchor", "horizon", "prominence",
    "weights", "sizes", "fit", "trace", "out", "jobs",
];

/// Flat `key = value` file, one key per line, `#` comments.  Unknown keys
/// are rejected.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err("config", format!("{}: {}", path.display(), e)))?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            config_err("config", format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(config_err("config", format!("unknown key `{}`", key)));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

// ---------------------------------------------------------------------------
// resolved run configuration

/// Fully validated single-run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub dimension: u8,
    pub side: usize,
    pub family: CoinFamily,
    pub weight_rule: LoopWeightRule,
    pub cluster: ClusterSpec,
    pub anchor: (usize, usize),
    pub horizon: Option<usize>,
    pub prominence: f64,
}

impl RunConfig {
    pub fn geometry(&self) -> Result<LatticeGeometry, CliError> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(config_err("dim", "dimension must be 1 or 2"));
        }
        LatticeGeometry::new(self.dimension, self.side)
            .map_err(|e| config_err("side", e))
    }

    pub fn marked(&self, geometry: &LatticeGeometry) -> Result<crate::operators::MarkedSet, CliError> {
        let anchor = if self.dimension == 1 {
            VertexId(self.anchor.0 % geometry.vertex_count().max(1))
        } else {
            geometry.vertex(self.anchor.0 % geometry.side(), self.anchor.1 % geometry.side())
        };
        self.cluster.build(geometry, anchor).map_err(|e| config_err("cluster", e))
    }

    pub fn loop_weight(&self, vertex_count: usize) -> f64 {
        self.weight_rule.weight(vertex_count)
    }

    pub fn horizon_for(&self, vertex_count: usize, marked_count: usize) -> usize {
        self.horizon
            .unwrap_or_else(|| default_horizon(self.dimension, vertex_count, marked_count))
    }
}

// ---------------------------------------------------------------------------
// run command

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub version: String,
    pub config: RunConfig,
    pub loop_weight: f64,
    pub horizon: usize,
    pub initial_probability: f64,
    pub peak: PeakResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<f64>>,
    pub duration_seconds: f64,
}

/// Executes one evolve/peak run, optionally writing the trace CSV and the
/// JSON record.
pub fn cmd_run(
    config: &RunConfig,
    trace_path: Option<&Path>,
    out_path: Option<&Path>,
    embed_trace: bool,
) -> Result<RunRecord, CliError> {
    let start = Instant::now();
    let geometry = config.geometry()?;
    let marked = config.marked(&geometry)?;
    if marked.is_empty() {
        return Err(config_err("cluster", "marked set is empty"));
    }
    let a = config.loop_weight(geometry.vertex_count());
    let spec = CoinSpec::new(config.family, a).map_err(|e| config_err("loop-weight", e))?;
    let horizon = config.horizon_for(geometry.vertex_count(), marked.len());
    if horizon < 2 {
        return Err(config_err("horizon", "horizon must be at least 2"));
    }
    if !(0.0..1.0).contains(&config.prominence) {
        return Err(config_err("prominence", "must lie in [0, 1)"));
    }

    let trace = evolve_trace(geometry, &spec, &marked, horizon)?;
    let peak = find_first_peak(&trace, config.prominence)?;

    let record = RunRecord {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        loop_weight: a,
        horizon,
        initial_probability: trace.values[0],
        peak,
        trace: embed_trace.then(|| trace.values.clone()),
        duration_seconds: start.elapsed().as_secs_f64(),
    };

    if let Some(path) = trace_path {
        let mut csv = String::from("step,probability\n");
        for (t, p) in trace.values.iter().enumerate() {
            let _ = writeln!(csv, "{},{}", t, fmt_float(*p));
        }
        write_file(path, &csv)?;
    }
    if let Some(path) = out_path {
        let json = serde_json::to_string_pretty(&record)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        write_file(path, &json)?;
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// sweep command

fn status_of(result: &Result<PeakResult, WalkError>) -> &'static str {
    match result {
        Ok(p) if p.terminated_by == Termination::PeakFound => "ok",
        Ok(_) => "horizon",
        Err(_) => "error",
    }
}

fn sweep_csv(rows: &[SweepRow], vertex_count: usize, one_dimensional: bool) -> String {
    let mut csv = String::new();
    if one_dimensional {
        csv.push_str("a,Na,t_peak,p_peak,status\n");
    } else {
        csv.push_str("a,t_peak,p_peak,status\n");
    }
    for row in rows {
        let a = fmt_float(row.loop_weight);
        let (t, p) = match &row.result {
            Ok(peak) => (peak.t_peak.to_string(), fmt_float(peak.p_peak)),
            Err(_) => (String::new(), String::new()),
        };
        if one_dimensional {
            let na = fmt_float(row.loop_weight * vertex_count as f64);
            let _ = writeln!(csv, "{},{},{},{},{}", a, na, t, p, status_of(&row.result));
        } else {
            let _ = writeln!(csv, "{},{},{},{}", a, t, p, status_of(&row.result));
        }
    }
    csv
}

/// Sweeps the self-loop weight over a grid and writes one CSV row per
/// weight, in input order.
pub fn cmd_sweep(config: &RunConfig, weights: &[f64], out: &Path) -> Result<Vec<SweepRow>, CliError> {
    if weights.is_empty() {
        return Err(config_err("weights", "empty weight grid"));
    }
    let geometry = config.geometry()?;
    let marked = config.marked(&geometry)?;
    if marked.is_empty() {
        return Err(config_err("cluster", "marked set is empty"));
    }
    let horizon = config.horizon_for(geometry.vertex_count(), marked.len());
    let rows = sweep_loop_weight(
        geometry,
        config.family,
        &marked,
        weights,
        horizon,
        config.prominence,
    );
    let csv = sweep_csv(&rows, geometry.vertex_count(), config.dimension == 1);
    write_file(out, &csv)?;
    Ok(rows)
}

// ---------------------------------------------------------------------------
// scale command

fn scale_csv(rows: &[ScalingRow]) -> String {
    let mut csv = String::from("N,M,t_peak,p_peak,status\n");
    for row in rows {
        let (t, p) = match &row.result {
            Ok(peak) => (peak.t_peak.to_string(), fmt_float(peak.p_peak)),
            Err(_) => (String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.vertex_count,
            row.marked_count,
            t,
            p,
            status_of(&row.result)
        );
    }
    csv
}

fn fit_path(out: &Path, model: FitModel) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("scale");
    let name = match model {
        FitModel::PowerLaw => format!("{}_fit_power_law.json", stem),
        FitModel::LinearOverM => format!("{}_fit_linear_over_m.json", stem),
        FitModel::SqrtLog => format!("{}_fit_sqrt_log.json", stem),
    };
    out.with_file_name(name)
}

/// Runs the scaling experiment over a size list, writes the CSV, and for
/// each requested model writes a fit JSON next to it.  A fit failure is
/// reported but does not discard the rows.
pub fn cmd_scale(
    config: &RunConfig,
    sizes: &[usize],
    fits: &[FitModel],
    out: &Path,
) -> Result<(Vec<ScalingRow>, Vec<Result<FitResult, WalkError>>), CliError> {
    if sizes.is_empty() {
        return Err(config_err("sizes", "empty size list"));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(config_err("sizes", "sizes must be sorted ascending"));
    }
    let rows = scaling_run(
        config.family,
        config.dimension,
        sizes,
        &config.cluster,
        config.weight_rule,
        config.horizon,
        config.prominence,
    );
    write_file(out, &scale_csv(&rows))?;

    let mut fit_results = Vec::new();
    for &model in fits {
        let fit = fit_scaling(&rows, model);
        if let Ok(result) = &fit {
            let json = serde_json::to_string_pretty(result)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&fit_path(out, model), &json)?;
        } else if let Err(e) = &fit {
            eprintln!("fit {:?} failed: {}", model, e);
        }
        fit_results.push(fit);
    }
    Ok((rows, fit_results))
}

// ---------------------------------------------------------------------------
// presets

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl std::str::FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => Err(config_err("preset", format!("unknown preset `{}`", other))),
        }
    }
}

fn preset_config(
    dimension: u8,
    side: usize,
    cluster: ClusterSpec,
    weight_rule: LoopWeightRule,
    horizon: Option<usize>,
) -> RunConfig {
    RunConfig {
        dimension,
        side,
        family: CoinFamily::G,
        weight_rule,
        cluster,
        anchor: (0, 0),
        horizon,
        prominence: DEFAULT_PROMINENCE,
    }
}

/// Runs a whole figure preset, writing one CSV (plus fit JSONs for the
/// scaling figures) per cluster into `out_dir`.  Returns the CSV paths.
pub fn run_preset(preset: Preset, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {}", out_dir.display(), e)))?;
    let mut written = Vec::new();
    match preset {
        Preset::Fig2 => {
            // Na from 0.01 to 10 on N = 1000; weights are a = Na / N
            let weights: Vec<f64> =
                geometric_grid(0.01, 10.0, 100).iter().map(|na| na / 1000.0).collect();
            for m in [1usize, 2, 5, 8] {
                let config = preset_config(
                    1,
                    1000,
                    ClusterSpec::Run { m },
                    LoopWeightRule::Constant(f64::NAN),
                    Some(20_000),
                );
                let out = out_dir.join(format!("fig2_m{}.csv", m));
                cmd_sweep(&config, &weights, &out)?;
                written.push(out);
            }
        }
        Preset::Fig3 => {
            for m in [1usize, 2, 5, 8] {
                let config = preset_config(
                    1,
                    0,
                    ClusterSpec::Run { m },
                    LoopWeightRule::OverN(0.1),
                    None,
                );
                let out = out_dir.join(format!("fig3_m{}.csv", m));
                cmd_scale(&config, &[200, 400, 600, 800, 1000], &[FitModel::PowerLaw], &out)?;
                written.push(out);
            }
        }
        Preset::Fig4 => {
            let weights = geometric_grid(1e-4, 0.1, 40);
            for cluster in [
                ClusterSpec::Block { k: 1, l: 1 },
                ClusterSpec::Block { k: 2, l: 1 },
                ClusterSpec::Block { k: 5, l: 5 },
                ClusterSpec::Block { k: 8, l: 8 },
                ClusterSpec::Diagonal,
            ] {
                let label = cluster.to_string().replace(':', "");
                let config = preset_config(
                    2,
                    40,
                    cluster,
                    LoopWeightRule::Constant(f64::NAN),
                    Some(20_000),
                );
                let out = out_dir.join(format!("fig4_{}.csv", label));
                cmd_sweep(&config, &weights, &out)?;
                written.push(out);
            }
        }
        Preset::Fig5 => {
            for cluster in [
                ClusterSpec::Block { k: 1, l: 1 },
                ClusterSpec::Block { k: 2, l: 1 },
                ClusterSpec::Block { k: 3, l: 3 },
                ClusterSpec::Block { k: 6, l: 6 },
                ClusterSpec::Diagonal,
            ] {
                let label = cluster.to_string().replace(':', "");
                let config = preset_config(
                    2,
                    0,
                    cluster,
                    LoopWeightRule::Constant(0.01),
                    None,
                );
                let out = out_dir.join(format!("fig5_{}.csv", label));
                cmd_scale(&config, &[20, 40, 60, 80, 100], &[FitModel::SqrtLog], &out)?;
                written.push(out);
            }
        }
    }
    Ok(written)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("{}: {}", parent.display(), e)))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))
}

//! `qos-energy` command line: config resolution, dispatch and output files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asymptotics::{self, Regime, RegimeParams, WidebandParams};
use crate::effcap::{self, CsiMode, QosConfig};
use crate::fading::{FadingKind, FadingModel};
use crate::quad;
use crate::queuesim::{self, QueueError, SimConfig};
use crate::sweep::{self, Curve, SweepError, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const CURVE_HEADER: &str = "ebn0_db,spectral_efficiency_bps_hz";
const SURFACE_DEFAULT_POINTS: usize = 16;
const QUEUE_DEFAULT_FRAMES: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("numerical failure in {operation}: {message}")]
    Numerical { operation: String, message: String },
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn numerical(operation: impl Into<String>, e: impl std::fmt::Display) -> CliError {
    CliError::Numerical {
        operation: operation.into(),
        message: e.to_string(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sweep,
    Asymptotics,
    AlphaStar,
    Surface,
    SimulateQueue,
    Limits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Rayleigh,
    Nakagami,
    Deterministic,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Csir,
    Csit,
}

impl From<ModeArg> for CsiMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Csir => CsiMode::Csir,
            ModeArg::Csit => CsiMode::Csit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Lowpower,
    Wideband,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Lowpower => Regime::LowPower,
            RegimeArg::Wideband => Regime::Wideband,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qos-energy",
    version,
    about = "Energy efficiency of fading channels under statistical QoS constraints",
    allow_negative_numbers = true
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Nakagami shape parameter.
    #[arg(long)]
    pub m: Option<f64>,
    /// Mean channel gain (the constant gain for `deterministic`).
    #[arg(long)]
    pub mean: Option<f64>,
    /// Comma-separated QoS exponents in 1/bit.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Frame duration in seconds.
    #[arg(long = "T")]
    pub frame_duration: Option<f64>,
    /// Bandwidth in Hz (low-power regime, queue, limits).
    #[arg(long = "B")]
    pub bandwidth: Option<f64>,
    /// Average power over noise density, P/N0, in Hz (wideband regime).
    #[arg(long)]
    pub pn0: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

/// Keys accepted in a `--config` file. Anything else is rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<ModelName>,
    m: Option<f64>,
    mean: Option<f64>,
    table: Option<Vec<(f64, f64)>>,
    theta: Option<OneOrMany>,
    #[serde(rename = "T")]
    frame_duration: Option<f64>,
    #[serde(rename = "B")]
    bandwidth: Option<f64>,
    pn0: Option<f64>,
    mode: Option<ModeArg>,
    regime: Option<RegimeArg>,
    grid_points: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    snr: Option<f64>,
    frames: Option<u64>,
    arrival_rate: Option<f64>,
    pn0_grid: Option<Vec<f64>>,
}

/// Every parameter of a run after merging defaults, config file and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub command: Command,
    pub model: FadingModel,
    pub theta: Vec<f64>,
    #[serde(rename = "T")]
    pub frame_duration: f64,
    #[serde(rename = "B")]
    pub bandwidth: f64,
    pub pn0: f64,
    pub mode: CsiMode,
    pub regime: Regime,
    pub grid_points: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub snr: f64,
    pub frames: u64,
    pub arrival_rate: Option<f64>,
    pub pn0_grid: Option<Vec<f64>>,
    pub quad_rel_tol: f64,
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err("config", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.contains("invalid"))
            .unwrap_or("config")
            .to_string();
        CliError::Config { field, reason: msg }
    })
}

fn positive(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn build_model(
    name: ModelName,
    m: Option<f64>,
    mean: Option<f64>,
    table: Option<Vec<(f64, f64)>>,
) -> Result<FadingModel, CliError> {
    let mean = positive("mean", mean.unwrap_or(1.0))?;
    let kind = match name {
        ModelName::Rayleigh => FadingKind::Rayleigh { mean },
        ModelName::Nakagami => {
            let m = m.ok_or_else(|| config_err("m", "required for the nakagami model"))?;
            FadingKind::NakagamiM {
                m: positive("m", m)?,
                mean,
            }
        }
        ModelName::Deterministic => FadingKind::Deterministic { z0: mean },
        ModelName::Table => FadingKind::BoundedTable {
            points: table.ok_or_else(|| {
                config_err(
                    "table",
                    "the table model needs `table` points in the config file",
                )
            })?,
        },
    };
    let field = match name {
        ModelName::Table => "table",
        ModelName::Nakagami => "m",
        _ => "mean",
    };
    FadingModel::new(kind).map_err(|e| config_err(field, e.to_string()))
}

/// Merges defaults, the config file and command-line flags, and validates
/// every field.
pub fn resolve(args: &Args) -> Result<ResolvedConfig, CliError> {
    let file = match &args.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let model_name = args.model.or(file.model).unwrap_or(ModelName::Rayleigh);
    let model = build_model(
        model_name,
        args.m.or(file.m),
        args.mean.or(file.mean),
        file.table,
    )?;
    let theta = match (&args.theta, file.theta) {
        (Some(t), _) => t.clone(),
        (None, Some(OneOrMany::One(t))) => vec![t],
        (None, Some(OneOrMany::Many(t))) => t,
        (None, None) => sweep::DEFAULT_THETAS.to_vec(),
    };
    if theta.is_empty() {
        return Err(config_err("theta", "list is empty"));
    }
    if let Some(t) = theta.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(config_err(
            "theta",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    if args.command == Command::SimulateQueue {
        if let Some(t) = theta.iter().find(|t| **t == 0.0) {
            return Err(config_err(
                "theta",
                format!("queue simulation needs theta > 0, got {t}"),
            ));
        }
    }
    let frame_duration = positive(
        "T",
        args.frame_duration
            .or(file.frame_duration)
            .unwrap_or(sweep::DEFAULT_FRAME_DURATION),
    )?;
    let bandwidth = positive(
        "B",
        args.bandwidth
            .or(file.bandwidth)
            .unwrap_or(sweep::DEFAULT_BANDWIDTH),
    )?;
    let pn0 = positive(
        "pn0",
        args.pn0.or(file.pn0).unwrap_or(sweep::DEFAULT_PBAR_OVER_N0),
    )?;
    let default_points = match args.command {
        Command::Surface => SURFACE_DEFAULT_POINTS,
        _ => sweep::DEFAULT_GRID_POINTS,
    };
    let grid_points = args
        .grid_points
        .or(file.grid_points)
        .unwrap_or(default_points);
    if grid_points < 2 {
        return Err(config_err(
            "grid-points",
            format!("need at least 2, got {grid_points}"),
        ));
    }
    let snr = positive("snr", file.snr.unwrap_or(1.0))?;
    let frames = file.frames.unwrap_or(QUEUE_DEFAULT_FRAMES);
    if frames < 100 {
        return Err(config_err(
            "frames",
            format!("need at least 100, got {frames}"),
        ));
    }
    let arrival_rate = file
        .arrival_rate
        .map(|a| positive("arrival_rate", a))
        .transpose()?;
    if let Some(g) = &file.pn0_grid {
        if g.is_empty() {
            return Err(config_err("pn0_grid", "empty"));
        }
        for &v in g {
            positive("pn0_grid", v)?;
        }
    }
    Ok(ResolvedConfig {
        command: args.command,
        model,
        theta,
        frame_duration,
        bandwidth,
        pn0,
        mode: args.mode.or(file.mode).unwrap_or(ModeArg::Csir).into(),
        regime: args
            .regime
            .or(file.regime)
            .unwrap_or(RegimeArg::Lowpower)
            .into(),
        grid_points,
        seed: args.seed.or(file.seed).unwrap_or(1),
        out: args
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("qos-energy-out")),
        format: args.format.or(file.format).unwrap_or(Format::Both),
        snr,
        frames,
        arrival_rate,
        pn0_grid: file.pn0_grid,
        quad_rel_tol: quad::default_rel_tol(),
    })
}

/// `x` with 12 significant digits, `%.12g` style: fixed notation for
/// decimal exponents in `[-4, 12)`, scientific otherwise, trailing zeros
/// dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        trim(&format!("{x:.*}", (11 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// Renders a curve as CSV text; gaps become empty fields.
pub fn curve_csv(curve: &Curve) -> String {
    let mut s = String::with_capacity(32 * (curve.points.len() + 1));
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            s,
            "{},{}",
            optional(p.ebn0_db),
            optional(p.spectral_efficiency)
        );
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

pub fn write_curve_csv(curve: &Curve, path: &Path) -> Result<(), CliError> {
    if curve.points.is_empty() {
        return Err(config_err("curve", "no points to write"));
    }
    write_file(path, &curve_csv(curve))
}

fn slug(theta: f64) -> String {
    format!("theta_{theta}")
}

struct Output {
    files: Vec<String>,
    warnings: usize,
    results: Value,
}

impl Output {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            warnings: 0,
            results: Value::Null,
        }
    }

    fn csv(&mut self, cfg: &ResolvedConfig, name: String, body: &str) -> Result<(), CliError> {
        if cfg.format.csv() {
            write_file(&cfg.out.join(&name), body)?;
            self.files.push(name);
        }
        Ok(())
    }
}

fn run_sweep(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = SweepSpec {
        mode: cfg.mode,
        regime: cfg.regime,
        model: cfg.model.clone(),
        theta_list: cfg.theta.clone(),
        frame_duration: cfg.frame_duration,
        bandwidth: cfg.bandwidth,
        pbar_over_n0: cfg.pn0,
        grid: sweep::default_grid(cfg.regime, cfg.grid_points),
    };
    let curves = sweep::tradeoff_curve(&spec).map_err(|e| match e {
        SweepError::InvalidSpec { field, reason } => config_err(field, reason),
        e => numerical("sweep", e),
    })?;
    let mut entries = Vec::new();
    for c in &curves {
        let name = format!("sweep_{}_{}_{}.csv", cfg.mode, cfg.regime, slug(c.theta));
        out.csv(cfg, name.clone(), &curve_csv(c))?;
        out.warnings += c.gaps.len();
        entries.push(json!({
            "label": c.label,
            "theta": c.theta,
            "csv": cfg.format.csv().then_some(name),
            "asymptote": c.asymptote,
            "gaps": c.gaps,
            "points": c.points,
        }));
    }
    out.results = json!({ "curves": entries });
    Ok(())
}

fn run_asymptotics(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut csv = String::from("theta,ebn0_min_db,s0\n");
    for &theta in &cfg.theta {
        let params = match cfg.regime {
            Regime::LowPower => RegimeParams::LowPower(
                QosConfig::new(theta, cfg.frame_duration, cfg.bandwidth)
                    .map_err(|e| config_err("theta", e.to_string()))?,
            ),
            Regime::Wideband => RegimeParams::Wideband(
                WidebandParams::new(theta, cfg.frame_duration, cfg.pn0)
                    .map_err(|e| config_err("theta", e.to_string()))?,
            ),
        };
        let s = asymptotics::summary(cfg.regime, cfg.mode, &cfg.model, params)
            .map_err(|e| numerical(format!("asymptotics (theta = {theta})"), e))?;
        let _ = writeln!(
            csv,
            "{},{},{}",
            format_sig(theta),
            format_sig(s.ebn0_min_db),
            format_sig(s.slope_s0)
        );
        let mut v = serde_json::to_value(s).expect("serializable");
        v["theta"] = json!(theta);
        rows.push(v);
    }
    out.csv(
        cfg,
        format!("asymptotics_{}_{}.csv", cfg.mode, cfg.regime),
        &csv,
    )?;
    out.results = json!({ "summaries": rows });
    Ok(())
}

fn run_alpha_star(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &theta in &cfg.theta {
        let p = WidebandParams::new(theta, cfg.frame_duration, cfg.pn0)
            .map_err(|e| config_err("theta", e.to_string()))?;
        let sol = asymptotics::solve_alpha_star(&cfg.model, &p)
            .map_err(|e| numerical(format!("alpha-star (theta = {theta})"), e))?;
        let mut v = serde_json::to_value(sol).expect("serializable");
        v["theta"] = json!(theta);
        rows.push(v);
    }
    let grid = sweep::default_grid(Regime::Wideband, cfg.grid_points);
    let curves = sweep::alpha_vs_zeta(&cfg.model, &cfg.theta, cfg.frame_duration, cfg.pn0, &grid)
        .map_err(|e| numerical("alpha-star", e))?;
    for c in &curves {
        out.warnings += c.gaps.len();
        let mut csv = String::from("zeta,alpha\n");
        for &(zeta, a) in &c.points {
            let _ = writeln!(csv, "{},{}", format_sig(zeta), optional(a));
        }
        out.csv(cfg, format!("alpha_vs_zeta_{}.csv", slug(c.theta)), &csv)?;
    }
    out.results = json!({ "solutions": rows, "alpha_vs_zeta": curves });
    Ok(())
}

fn run_surface(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let thetas = if cfg.theta.len() > 1 {
        cfg.theta.clone()
    } else {
        sweep::log_grid(1e-3, 1.0, cfg.grid_points)
    };
    let pn0s = cfg
        .pn0_grid
        .clone()
        .unwrap_or_else(|| sweep::log_grid(1e2, 1e5, cfg.grid_points));
    let s = sweep::ebn0_min_surface(cfg.mode, &cfg.model, &thetas, &pn0s, cfg.frame_duration);
    out.warnings += s.failures();
    let mut csv = String::from("theta,pbar_over_n0,ebn0_min_db\n");
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for (t, p, v) in s.long_format() {
        let value = v.as_ref().ok().copied();
        let _ = writeln!(
            csv,
            "{},{},{}",
            format_sig(t),
            format_sig(p),
            optional(value)
        );
        if let Err(e) = v {
            failures.push(json!({ "theta": t, "pbar_over_n0": p, "error": e }));
        }
        cells.push(json!([
            t,
            p,
            value.map(|x| if x.is_finite() {
                json!(x)
            } else {
                json!("-inf")
            })
        ]));
    }
    out.csv(cfg, format!("surface_{}.csv", cfg.mode), &csv)?;
    out.results = json!({
        "thetas": thetas,
        "pbar_over_n0": pn0s,
        "cells": cells,
        "failures": failures,
    });
    Ok(())
}

fn run_simulate_queue(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &theta in &cfg.theta {
        let qos = QosConfig::new(theta, cfg.frame_duration, cfg.bandwidth)
            .map_err(|e| config_err("theta", e.to_string()))?;
        let arrival = match cfg.arrival_rate {
            Some(a) => a,
            None => effcap::effective_capacity(cfg.mode, cfg.snr, &qos, &cfg.model)
                .map_err(|e| numerical("effective capacity", e))?,
        };
        let mut sim = SimConfig::new(
            cfg.model.clone(),
            cfg.snr,
            qos,
            cfg.mode,
            arrival,
            cfg.frames,
            cfg.seed,
        );
        sim.warmup_frames = cfg.frames / 100;
        let op = format!("simulate-queue (theta = {theta})");
        let est = queuesim::simulate_queue(&sim).map_err(|e| match e {
            QueueError::Unstable { .. } => config_err("arrival_rate", e.to_string()),
            QueueError::InvalidConfig { field, reason } => config_err(field, reason),
            e => numerical(op.clone(), e),
        })?;
        let mut csv = String::from("q_bits,log_tail_prob\n");
        for (q, l) in est.thresholds.iter().zip(&est.log_tail_probs) {
            let _ = writeln!(csv, "{},{}", format_sig(*q), format_sig(*l));
        }
        out.csv(cfg, format!("queue_tail_{}.csv", slug(theta)), &csv)?;
        rows.push(json!({
            "theta": theta,
            "arrival_rate": arrival,
            "tail": est,
            "decay_ratio": est.fitted_decay / theta,
        }));
    }
    out.results = json!({ "runs": rows });
    Ok(())
}

fn run_limits(cfg: &ResolvedConfig, out: &mut Output) -> Result<(), CliError> {
    let shannon = effcap::shannon_limit(cfg.snr, cfg.mode, &cfg.model)
        .map_err(|e| numerical("shannon limit", e))?;
    let delay = effcap::delay_limited_limit(cfg.snr, cfg.mode, &cfg.model)
        .map_err(|e| numerical("delay-limited limit", e))?;
    let mut csv =
        String::from("theta,spectral_efficiency_bps_hz,shannon_bps_hz,delay_limited_bps_hz\n");
    let mut rows = Vec::new();
    for &theta in &cfg.theta {
        let qos = QosConfig::new(theta, cfg.frame_duration, cfg.bandwidth)
            .map_err(|e| config_err("theta", e.to_string()))?;
        let se = effcap::spectral_efficiency(cfg.mode, cfg.snr, &qos, &cfg.model)
            .map_err(|e| numerical(format!("spectral efficiency (theta = {theta})"), e))?;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_sig(theta),
            format_sig(se),
            format_sig(shannon),
            format_sig(delay.spectral_efficiency)
        );
        rows.push(json!({ "theta": theta, "beta": qos.beta(), "spectral_efficiency": se }));
    }
    out.csv(cfg, format!("limits_{}.csv", cfg.mode), &csv)?;
    out.results = json!({
        "snr": cfg.snr,
        "shannon": shannon,
        "delay_limited": delay,
        "per_theta": rows,
    });
    Ok(())
}

/// Runs one resolved command and returns its JSON summary.
pub fn execute(cfg: &ResolvedConfig) -> Result<Value, CliError> {
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let mut out = Output::new();
    match cfg.command {
        Command::Sweep => run_sweep(cfg, &mut out)?,
        Command::Asymptotics => run_asymptotics(cfg, &mut out)?,
        Command::AlphaStar => run_alpha_star(cfg, &mut out)?,
        Command::Surface => run_surface(cfg, &mut out)?,
        Command::SimulateQueue => run_simulate_queue(cfg, &mut out)?,
        Command::Limits => run_limits(cfg, &mut out)?,
    }
    let command = serde_json::to_value(cfg.command).expect("serializable");
    let name = format!("{}.json", command.as_str().unwrap_or("summary"));
    if cfg.format.json() {
        out.files.push(name.clone());
    }
    let summary = json!({
        "command": command,
        "config": cfg,
        "results": out.results,
        "warnings": out.warnings,
        "files": out.files,
    });
    if cfg.format.json() {
        let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
        text.push('\n');
        write_file(&cfg.out.join(name), &text)?;
    }
    Ok(summary)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. The JSON summary goes to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = resolve(&args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(summary) => {
            let warnings = summary["warnings"].as_u64().unwrap_or(0);
            let mut stdout = io::stdout().lock();
            let _ = serde_json::to_writer_pretty(&mut stdout, &summary);
            let _ = writeln!(stdout);
            if warnings > 0 {
                eprintln!(
                    "warning: {warnings} point(s) could not be computed and were left as gaps"
                );
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::TradeoffPoint;

    fn parse(extra: &[&str]) -> Args {
        let mut v = vec!["qos-energy"];
        v.extend_from_slice(extra);
        Args::try_parse_from(v).unwrap()
    }

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-1.5917453895486), "-1.59174538955");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1.234e-7), "1.234e-7");
        assert_eq!(format_sig(12345678901234.0), "1.23456789012e13");
        assert_eq!(format_sig(999999999999.5), "1e12");
        assert_eq!(format_sig(0.0001), "0.0001");
        assert_eq!(format_sig(f64::NEG_INFINITY), "-inf");
        for x in [1.0 / 7.0, 2.5e-300, 6.02e23, -0.0123456789012345] {
            let back: f64 = format_sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
    }

    #[test]
    fn single_point_curve_is_two_lines() {
        let c = Curve {
            label: "x".into(),
            theta: 0.0,
            points: vec![TradeoffPoint {
                control: 1.0,
                snr: 1.0,
                ebn0_db: Some(0.0),
                spectral_efficiency: Some(1.0),
            }],
            gaps: vec![],
            asymptote: None,
        };
        assert_eq!(curve_csv(&c), "ebn0_db,spectral_efficiency_bps_hz\n0,1\n");
    }

    #[test]
    fn gaps_are_empty_fields() {
        let c = Curve {
            label: "x".into(),
            theta: 0.0,
            points: vec![TradeoffPoint {
                control: 1.0,
                snr: 1.0,
                ebn0_db: None,
                spectral_efficiency: None,
            }],
            gaps: vec![],
            asymptote: None,
        };
        assert!(curve_csv(&c).ends_with("\n,\n"));
    }

    #[test]
    fn defaults_resolve() {
        let cfg = resolve(&parse(&["sweep"])).unwrap();
        assert_eq!(cfg.frame_duration, 2e-3);
        assert_eq!(cfg.bandwidth, 1e5);
        assert_eq!(cfg.pn0, 1e4);
        assert_eq!(cfg.theta, sweep::DEFAULT_THETAS.to_vec());
        assert_eq!(cfg.mode, CsiMode::Csir);
        assert_eq!(cfg.regime, Regime::LowPower);
    }

    #[test]
    fn negative_theta_names_field() {
        let e = resolve(&parse(&["sweep", "--theta", "0.1,-1"])).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_CONFIG);
        assert!(matches!(e, CliError::Config { ref field, .. } if field == "theta"));
    }

    #[test]
    fn nakagami_needs_m() {
        let e = resolve(&parse(&["limits", "--model", "nakagami"])).unwrap_err();
        assert!(matches!(e, CliError::Config { ref field, .. } if field == "m"));
        assert!(resolve(&parse(&["limits", "--model", "nakagami", "--m", "2"])).is_ok());
    }
}

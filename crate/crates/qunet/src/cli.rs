//! `qunet` subcommands.
//!
//! Exit status: 0 on success, 1 when a physics check fails, 2 for usage,
//! parse and IO errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use qunet_core::accelerometer::{
    accelerometer_budget, default_detection_stage, AcceleroParams, DEFAULT_TRANSDUCTION_GAIN, PRESETS,
};
use qunet_core::cascade::{chain_scattering, StageChain};
use qunet_core::linalg::CMatrix;
use qunet_core::network::commutator_residual;
use qunet_core::spectra::{hz_to_angular, FrequencyGrid};
use qunet_core::Complex64;

use crate::model::{self, Model, ModelError};
use crate::netlist::{parse_with, NetlistDocument, ParseErrors, ParseOptions};
use crate::report::{chain_report, sweep_csv, AccelReport};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const TOLERANCE_ENV: &str = "QUNET_TOL";

#[derive(Debug, Parser)]
#[command(name = "qunet", version, about = "Quantum noise budgets of linear amplifier networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check commutator preservation over the sweep grid.
    Check(CheckArgs),
    /// Added-noise budget at one frequency.
    Budget(BudgetArgs),
    /// Added noise over the sweep grid, as CSV.
    Sweep(SweepArgs),
    /// Accelerometer noise report from a preset.
    Accel(AccelArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Netlist file (.qnet).
    pub netlist: PathBuf,
    /// Accept resistive feedback (not quantum-consistent).
    #[arg(long)]
    pub allow_resistive_feedback: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Residual tolerance [default: $QUNET_TOL, else 1e-10].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Check a single frequency (Hz) instead of the sweep grid.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Test hook: multiply the scattering matrix by this factor.
    #[arg(long, hide = true)]
    pub inject_gain: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Frequency in Hz [default: lower sweep bound].
    #[arg(long)]
    pub freq: Option<f64>,
    #[arg(long)]
    pub json: bool,
    /// Accelerometer transduction gain, N/sqrt(Hz) per field unit.
    #[arg(long)]
    pub transduction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AccelArgs {
    #[arg(long, default_value = "microscope")]
    pub preset: String,
    /// Mechanical bath effective temperature, K.
    #[arg(long)]
    pub theta_m: Option<f64>,
    /// Mechanical damping, kg/s.
    #[arg(long)]
    pub hm: Option<f64>,
    /// Transduction gain, N/sqrt(Hz) per field unit.
    #[arg(long)]
    pub transduction: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:\n{errors}")]
    Parse { path: PathBuf, errors: ParseErrors },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Core(#[from] qunet_core::Error),
    /// Physics check failed; the report was already printed.
    #[error("check failed")]
    CheckFailed,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed => 1,
            _ => 2,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::CheckFailed) {
                let _ = writeln!(err, "error: {e}");
            }
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Check(a) => check(a, out),
        Command::Budget(a) => budget(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Accel(a) => accel(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

pub fn load(input: &InputArgs) -> Result<NetlistDocument, CliError> {
    let path = &input.netlist;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let options = ParseOptions { strict: !input.allow_resistive_feedback };
    parse_with(&text, options).map_err(|errors| CliError::Parse { path: path.clone(), errors })
}

fn frequency(hz: f64) -> Result<f64, CliError> {
    if !(hz > 0.0 && hz.is_finite()) {
        return Err(CliError::Usage(format!("frequency must be positive and finite, got {hz}")));
    }
    Ok(hz)
}

/// `--tol`, then `$QUNET_TOL`, then the default.
pub fn tolerance(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOLERANCE_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{TOLERANCE_ENV}: malformed number `{v}`")))?,
            Err(_) => DEFAULT_TOLERANCE,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn check_grid(doc: &NetlistDocument, freq: Option<f64>) -> Result<FrequencyGrid, CliError> {
    if let Some(hz) = freq {
        return Ok(FrequencyGrid::single(hz_to_angular(frequency(hz)?))?);
    }
    let hz = model::sweep_grid_hz(doc)?
        .ok_or_else(|| CliError::Usage("no frequency: add a sweep directive or pass --freq".into()))?;
    Ok(FrequencyGrid::new(hz.points().iter().map(|&f| hz_to_angular(f)).collect(), hz.scale())?)
}

fn residual(matrix: &CMatrix, signature: &[f64], gain: Option<f64>) -> f64 {
    let m = match gain {
        Some(g) => matrix.scaled(Complex64::new(g, 0.0)),
        None => matrix.clone(),
    };
    commutator_residual(&m, signature).unwrap_or(f64::INFINITY)
}

/// Largest `|S J S† - J|` over the grid. Each stage is also solved as a
/// circuit so the check does not rely only on the closed-form rows.
pub fn chain_residual(chain: &StageChain, grid: &FrequencyGrid, inject_gain: Option<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for &w in grid.points() {
        let r = match chain_scattering(chain, w) {
            Ok(s) => residual(&s.matrix, &s.signature(), inject_gain),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(r);
        for (k, stage) in chain.stages().iter().enumerate() {
            let r = stage
                .to_network(&format!("stage{k}"), w)
                .and_then(|n| n.scattering(w))
                .map(|s| residual(&s.matrix, &s.signature(), inject_gain))
                .unwrap_or(f64::INFINITY);
            worst = worst.max(r);
        }
    }
    worst
}

fn check(a: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let tol = tolerance(a.tol)?;
    let doc = load(&a.input)?;
    let (chain, grid) = match model::build(&doc)? {
        Model::Chain(chain) => {
            let grid = check_grid(&doc, a.freq)?;
            (chain, grid)
        }
        Model::Accelerometer(p) => {
            let grid = match a.freq {
                Some(_) => check_grid(&doc, a.freq)?,
                None => FrequencyGrid::single(p.carrier_omega)?,
            };
            (StageChain::new(vec![default_detection_stage(&p)?])?, grid)
        }
    };
    let worst = chain_residual(&chain, &grid, a.inject_gain);
    let ok = worst < tol;
    emit(
        out,
        &format!(
            "max commutator residual: {worst:e} over {} frequencies (tolerance {tol:e})\n{}\n",
            grid.len(),
            if ok { "ok" } else { "FAILED" }
        ),
    )?;
    if ok {
        Ok(())
    } else {
        Err(CliError::CheckFailed)
    }
}

fn budget(a: &BudgetArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = load(&a.input)?;
    match model::build(&doc)? {
        Model::Chain(chain) => {
            let hz = match a.freq {
                Some(f) => f,
                None => doc
                    .sweep()
                    .map(|s| s.lo_hz)
                    .ok_or_else(|| CliError::Usage("no frequency: add a sweep directive or pass --freq".into()))?,
            };
            let report = chain_report(&chain, frequency(hz)?)?;
            emit(out, &if a.json { report.to_json() + "\n" } else { report.to_table() })
        }
        Model::Accelerometer(p) => {
            if a.freq.is_some() {
                return Err(CliError::Usage("--freq does not apply to a preset; its frequencies are fixed".into()));
            }
            let preset = doc.preset().unwrap_or_default().to_string();
            accel_report(&preset, &p, a.transduction, a.json, out)
        }
    }
}

fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let doc = load(&a.input)?;
    let Model::Chain(chain) = model::build(&doc)? else {
        return Err(CliError::Usage("sweep needs a network, not a preset".into()));
    };
    let grid = model::sweep_grid_hz(&doc)?.ok_or_else(|| CliError::Usage("no sweep directive".into()))?;
    let csv = sweep_csv(&chain, &grid)?;
    write_file(&a.output, &csv)?;
    emit(out, &format!("wrote {} rows to {}\n", grid.len(), a.output.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn accel(a: &AccelArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut p = AcceleroParams::preset(&a.preset).ok_or_else(|| {
        CliError::Usage(format!("unknown preset `{}` (available: {})", a.preset, PRESETS.join(", ")))
    })?;
    if let Some(t) = a.theta_m {
        p.mechanical_theta = t;
    }
    if let Some(h) = a.hm {
        p.mechanical_damping = h;
    }
    accel_report(&a.preset, &p, a.transduction, a.json, out)
}

fn accel_report(
    preset: &str,
    p: &AcceleroParams,
    transduction: Option<f64>,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    p.validate()?;
    let kappa = transduction.unwrap_or(DEFAULT_TRANSDUCTION_GAIN);
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(CliError::Usage(format!("transduction gain must be nonnegative, got {kappa}")));
    }
    let budget = accelerometer_budget(p, &default_detection_stage(p)?, Some(kappa))?;
    let report = AccelReport::new(preset, p, kappa, &budget);
    emit(out, &if json { report.to_json() + "\n" } else { report.to_table() })
}

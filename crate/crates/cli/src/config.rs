//! Run configuration shared by command-line flags and JSON config files.
//!
//! Every subcommand's flags deserialize from a JSON object with the same
//! (kebab-case) keys plus a `"command"` tag, so
//! `nlbeat scan --theta1 30 --n 5000` and
//! `{"command": "scan", "theta1": 30, "n": 5000}` describe the same run.
//! Keys missing from a file take the flag defaults; unknown keys are
//! rejected.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nlbeat_core::noise::PhaseModel;
use nlbeat_core::{BellPreparation, BenchConfig};

use crate::error::CliError;
use crate::grid;

pub const SEED_ENV: &str = "NLBEAT_SEED";

#[derive(Debug, Parser)]
#[command(name = "nlbeat", version, about = "Beat-signal simulator for polarization correlations, Bell tests and Ekert-style key distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<RunConfig>,

    /// Load the run from a JSON config file, or from the provenance header
    /// of a previous output file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Parent directory for run-stamped output folders.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Write directly into this directory instead of a run-stamped folder.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Single-shot beat traces of both detectors and their product.
    Trace(TraceArgs),
    /// Normalized correlation versus θ₂ at fixed θ₁.
    Scan(ScanArgs),
    /// Bell functional F(a,b,c) over a grid of c.
    Bell(BellArgs),
    /// Closed-form two-photon correlation curves.
    Quantum(QuantumArgs),
    /// Ekert-style key distribution session.
    Qkd(QkdArgs),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Trace(_) => "trace",
            RunConfig::Scan(_) => "scan",
            RunConfig::Bell(_) => "bell",
            RunConfig::Quantum(_) => "quantum",
            RunConfig::Qkd(_) => "qkd",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Trace(a) => Some(a.seed),
            RunConfig::Scan(a) => Some(a.seed),
            RunConfig::Bell(a) => Some(a.seed),
            RunConfig::Quantum(_) => None,
            RunConfig::Qkd(a) => Some(a.seed),
        }
    }

    pub fn format(&self) -> OutputFormat {
        match self {
            RunConfig::Trace(a) => a.format,
            RunConfig::Scan(a) => a.format,
            RunConfig::Bell(a) => a.format,
            RunConfig::Quantum(a) => a.format,
            RunConfig::Qkd(a) => a.format,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Canonical JSON, used for the provenance header and config hash.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Uniform phase held for `dwell` samples.
    Piecewise,
    /// Wrapped Gaussian random walk.
    Wiener,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prep {
    PsiMinus,
    PsiPlus,
    PhiPlus,
    PhiMinus,
}

impl From<Prep> for BellPreparation {
    fn from(p: Prep) -> Self {
        match p {
            Prep::PsiMinus => BellPreparation::PsiMinus,
            Prep::PsiPlus => BellPreparation::PsiPlus,
            Prep::PhiPlus => BellPreparation::PhiPlus,
            Prep::PhiMinus => BellPreparation::PhiMinus,
        }
    }
}

#[derive(Parser)]
struct DefaultsOf<T: Args> {
    #[command(flatten)]
    inner: T,
}

/// Flag defaults, reused as defaults for keys missing from a config file.
fn flag_defaults<T: Args>() -> T {
    DefaultsOf::<T>::parse_from(["nlbeat"]).inner
}

macro_rules! defaults_from_flags {
    ($($t:ty),*) => {
        $(impl Default for $t {
            fn default() -> Self {
                flag_defaults::<$t>()
            }
        })*
    };
}

defaults_from_flags!(TraceArgs, ScanArgs, BellArgs, QuantumArgs, QkdArgs);

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value = "psi-minus")]
    pub prep: Prep,
    /// Analyzer A angle (degrees).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta1: f64,
    /// Analyzer B angle (degrees).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta2: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "piecewise")]
    pub noise: NoiseKind,
    /// Samples per constant-phase segment (piecewise noise).
    #[arg(long, default_value_t = 1)]
    pub dwell: usize,
    /// Phase diffusion per sample in rad² (wiener noise).
    #[arg(long, default_value_t = 0.1)]
    pub diffusion_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal_amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_amplitude: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "psi-minus")]
    pub prep: Prep,
    /// Fixed analyzer A angle (degrees).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta1: f64,
    /// Analyzer B angles: `start:stop:step` or a comma list (degrees).
    #[arg(long, default_value = "0:90:5", allow_hyphen_values = true)]
    pub theta2_grid: String,
    /// Samples per grid point.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "piecewise")]
    pub noise: NoiseKind,
    #[arg(long, default_value_t = 1)]
    pub dwell: usize,
    #[arg(long, default_value_t = 0.1)]
    pub diffusion_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal_amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_amplitude: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct BellArgs {
    #[arg(long, value_enum, default_value = "psi-minus")]
    pub prep: Prep,
    /// Angle a (degrees).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Angle b (degrees).
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Angles c: `start:stop:step` or a comma list (degrees).
    #[arg(long, default_value = "0:90:5", allow_hyphen_values = true)]
    pub c_grid: String,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "piecewise")]
    pub noise: NoiseKind,
    #[arg(long, default_value_t = 1)]
    pub dwell: usize,
    #[arg(long, default_value_t = 0.1)]
    pub diffusion_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal_amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_amplitude: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct QuantumArgs {
    #[arg(long, value_enum, default_value = "psi-minus")]
    pub state: Prep,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, default_value = "0:90:5", allow_hyphen_values = true)]
    pub theta2_grid: String,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct QkdArgs {
    #[arg(long, value_enum, default_value = "psi-minus")]
    pub prep: Prep,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: usize,
    /// Std of the extra phase on Bob's noise field (radians).
    #[arg(long, default_value_t = 0.0)]
    pub decorrelation: f64,
    #[arg(long, default_value_t = 1)]
    pub samples_per_round: usize,
    /// Comparator dead zone.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Alice's analyzer angles (degrees).
    #[arg(long, default_value = "0,30,60")]
    pub alice_angles: String,
    /// Bob's analyzer angles (degrees).
    #[arg(long, default_value = "30,60,90")]
    pub bob_angles: String,
    /// Bell-check angles a,b,c (degrees).
    #[arg(long, default_value = "0,30,60")]
    pub bell_angles: String,
    #[arg(long, default_value_t = 100_000)]
    pub calibration_samples: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

fn require(cond: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn finite_angle(name: &str, value: f64) -> Result<(), CliError> {
    require(value.is_finite(), format!("{name} must be a finite angle"))
}

pub(crate) fn phase_model(noise: NoiseKind, dwell: usize, diffusion_rate: f64) -> Result<PhaseModel, CliError> {
    let model = match noise {
        NoiseKind::Piecewise => PhaseModel::PiecewiseUniform {
            dwell_samples: dwell,
        },
        NoiseKind::Wiener => PhaseModel::WienerDiffusion { diffusion_rate },
    };
    model.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(model)
}

pub(crate) fn bench_config(signal: f64, noise: f64) -> Result<BenchConfig, CliError> {
    let cfg = BenchConfig {
        signal_amplitude: signal,
        noise_amplitude: noise,
        ..BenchConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every parameter before any simulation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            RunConfig::Trace(a) => {
                require(a.n >= 1, "n must be at least 1")?;
                finite_angle("theta1", a.theta1)?;
                finite_angle("theta2", a.theta2)?;
                phase_model(a.noise, a.dwell, a.diffusion_rate)?;
                bench_config(a.signal_amplitude, a.noise_amplitude)?;
            }
            RunConfig::Scan(a) => {
                require(a.n >= 2, "n must be at least 2")?;
                finite_angle("theta1", a.theta1)?;
                grid::parse_angles(&a.theta2_grid)?;
                phase_model(a.noise, a.dwell, a.diffusion_rate)?;
                bench_config(a.signal_amplitude, a.noise_amplitude)?;
            }
            RunConfig::Bell(a) => {
                require(a.n >= 2, "n must be at least 2")?;
                finite_angle("a", a.a)?;
                finite_angle("b", a.b)?;
                grid::parse_angles(&a.c_grid)?;
                phase_model(a.noise, a.dwell, a.diffusion_rate)?;
                bench_config(a.signal_amplitude, a.noise_amplitude)?;
            }
            RunConfig::Quantum(a) => {
                finite_angle("theta1", a.theta1)?;
                grid::parse_angles(&a.theta2_grid)?;
            }
            RunConfig::Qkd(a) => {
                require(a.rounds >= 1, "rounds must be at least 1")?;
                require(a.samples_per_round >= 1, "samples-per-round must be at least 1")?;
                require(
                    a.decorrelation.is_finite() && a.decorrelation >= 0.0,
                    "decorrelation must be finite and non-negative",
                )?;
                require(
                    a.epsilon.is_finite() && a.epsilon >= 0.0,
                    "epsilon must be finite and non-negative",
                )?;
                require(a.calibration_samples >= 2, "calibration-samples must be at least 2")?;
                grid::parse_angles(&a.alice_angles)?;
                grid::parse_angles(&a.bob_angles)?;
                let bell = grid::parse_angles(&a.bell_angles)?;
                require(bell.len() == 3, "bell-angles needs exactly three angles a,b,c")?;
                require(a.format == OutputFormat::Json, "qkd writes JSON only; use --format json")?;
            }
        }
        Ok(())
    }
}

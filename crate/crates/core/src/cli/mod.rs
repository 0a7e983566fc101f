//! Command-line surface: `analyze`, `synth` and `verify`.
//!
//! Everything the binary does is reachable from here, so the commands can be
//! driven from tests and examples without spawning a process.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::estimate::{EstimateError, WindowConfig};
use crate::fairvol::{FairVolError, TRADING_DAYS};
use crate::specfun::SpecfunError;
use crate::synth::{HurstDriver, MpreScale, Normalization, SynthError, SynthParams, SynthesisSpec};

pub mod analyze;
pub mod ingest;
pub mod output;
pub mod synth;
pub mod verify;

pub use analyze::{analyze_log_prices, cmd_analyze, PipelineReport, SeriesAnalysis, SeriesReport};
pub use ingest::{ingest_csv, ColumnMapping, IngestError};
pub use synth::{cmd_synth, Preset, SynthConfig, SynthRequest, SynthSummary};
pub use verify::{cmd_verify, VerifyLevel, VerifyOptions, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Output { path: PathBuf, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    FairVol(#[from] FairVolError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

impl CliError {
    pub(crate) fn output(path: &Path, err: impl Display) -> Self {
        CliError::Output {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_PARTIAL,
        }
    }
}

/// Settings shared by the analysis pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub columns: ColumnMapping,
    pub window: WindowConfig,
    /// Confidence levels for the fair-volatility intervals, e.g. 0.95.
    pub levels: Vec<f64>,
    /// Periods per year used for annualisation.
    pub periods: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            inputs: Vec::new(),
            columns: ColumnMapping::default(),
            window: WindowConfig::default(),
            levels: vec![0.90, 0.95, 0.99],
            periods: TRADING_DAYS,
            out_dir: out_dir.into(),
            seed: 0,
            svg: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.window
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.levels.is_empty() {
            return Err(CliError::Config(
                "at least one confidence level is required".into(),
            ));
        }
        if let Some(bad) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(CliError::Config(format!(
                "confidence level {bad} is outside (0, 1)"
            )));
        }
        if !(self.periods.is_finite() && self.periods > 0.0) {
            return Err(CliError::Config(format!(
                "annualisation periods must be positive, got {}",
                self.periods
            )));
        }
        Ok(())
    }
}

/// Creates `dir` if needed and checks it can be written to.
pub fn prepare_output_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let meta = std::fs::metadata(dir)
        .map_err(|e| CliError::Config(format!("cannot access {}: {e}", dir.display())))?;
    if meta.permissions().readonly() {
        return Err(CliError::Config(format!(
            "{} is not writable",
            dir.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "hurstvol",
    version,
    about = "Pointwise Hurst exponent and fair volatility"
)]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Rolling window length (even, at least 8).
    #[arg(long, global = true, default_value_t = 20)]
    pub window: usize,
    /// Confidence levels for fair-volatility intervals.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [0.90, 0.95, 0.99])]
    pub levels: Vec<f64>,
    /// Periods per year for annualisation.
    #[arg(long, global = true, default_value_t = TRADING_DAYS)]
    pub annualize: f64,
    /// Name of the date column in input CSVs.
    #[arg(long, global = true, default_value = "Date")]
    pub date_col: String,
    /// Name of the close column in input CSVs.
    #[arg(long, global = true, default_value = "Close")]
    pub close_col: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate H, fit the sigma-H curve and report fair volatility.
    Analyze {
        /// Price CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
    /// Generate synthetic paths.
    Synth(SynthArgs),
    /// Run the identity and property checks.
    Verify {
        /// Include the Monte-Carlo suites.
        #[arg(long)]
        full: bool,
        /// Relative perturbation applied to V_H inside the checks.
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_vh: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Fbm,
    Fgn,
    Mpre,
    FouH,
    Ar1,
    Iid,
    StepMemory,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Figure preset; overrides --kind.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// JSON file holding a synthesis spec; overrides --kind.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fbm")]
    pub kind: KindArg,
    /// Sample count (presets have their own default).
    #[arg(long)]
    pub n: Option<usize>,
    /// Base name of the output files.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub hurst: f64,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Use unit-variance fGn instead of the kernel normalisation.
    #[arg(long)]
    pub unit: bool,
    #[arg(long, default_value_t = 0.9)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.4)]
    pub h1: f64,
    #[arg(long, default_value_t = 0.6)]
    pub h2: f64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nu_h: f64,
    #[arg(long, default_value_t = 0.5)]
    pub h_drv: f64,
}

impl SynthArgs {
    fn request(&self, seed: u64) -> Result<SynthRequest, CliError> {
        if let Some(preset) = self.preset {
            return Ok(SynthRequest::Preset {
                preset,
                n: self.n,
                seed,
            });
        }
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let spec: SynthesisSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            return Ok(SynthRequest::Spec(spec));
        }
        let normalization = if self.unit {
            Normalization::Unit
        } else {
            Normalization::KernelVh
        };
        let params = match self.kind {
            KindArg::Fbm => SynthParams::Fbm {
                hurst: self.hurst,
                scale: self.scale,
                normalization,
            },
            KindArg::Fgn => SynthParams::Fgn {
                hurst: self.hurst,
                scale: self.scale,
                normalization,
            },
            KindArg::Mpre => SynthParams::Mpre {
                hurst: if self.nu_h > 0.0 {
                    HurstDriver::Fou {
                        lambda: self.lambda,
                        nu_h: self.nu_h,
                        h_drv: self.h_drv,
                    }
                } else {
                    HurstDriver::Constant { hurst: self.hurst }
                },
                scale: MpreScale::Constant { nu: self.scale },
            },
            KindArg::FouH => SynthParams::FouH {
                lambda: self.lambda,
                nu_h: self.nu_h,
                h_drv: self.h_drv,
            },
            KindArg::Ar1 => SynthParams::Ar1 {
                phi: self.phi,
                sigma: self.sigma,
            },
            KindArg::Iid => SynthParams::Iid { sigma: self.sigma },
            KindArg::StepMemory => SynthParams::StepMemory {
                h1: self.h1,
                h2: self.h2,
            },
        };
        Ok(SynthRequest::Spec(SynthesisSpec {
            n: self.n.unwrap_or(4096),
            seed,
            params,
        }))
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Analyze {
            ref inputs,
            stride,
            svg,
        } => {
            let mut window = WindowConfig::default();
            window.window = cli.window;
            window.stride = stride;
            let cfg = RunConfig {
                inputs: inputs.clone(),
                columns: ColumnMapping {
                    date: cli.date_col.clone(),
                    close: cli.close_col.clone(),
                },
                window,
                levels: cli.levels.clone(),
                periods: cli.annualize,
                out_dir: cli.out.clone(),
                seed: cli.seed,
                svg,
            };
            let report = cmd_analyze(&cfg)?;
            for s in &report.series {
                match (&s.report, &s.error) {
                    (Some(r), _) => println!("{}", r.one_line()),
                    (None, Some(e)) => eprintln!("{}: {e}", s.name),
                    _ => {}
                }
            }
            Ok(report.exit_code())
        }
        Command::Synth(ref args) => {
            let cfg = SynthConfig {
                request: args.request(cli.seed)?,
                out_dir: cli.out.clone(),
                name: args.name.clone(),
            };
            let summary = cmd_synth(&cfg)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            for (k, v) in &summary.stats {
                println!("{k} = {v:.6}");
            }
            Ok(EXIT_OK)
        }
        Command::Verify { full, perturb_vh } => {
            let opts = VerifyOptions {
                level: if full {
                    VerifyLevel::Full
                } else {
                    VerifyLevel::Quick
                },
                vh_perturbation: perturb_vh,
                seed: cli.seed,
            };
            let report = cmd_verify(&opts);
            print!("{}", report.render());
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_PARTIAL
            })
        }
    }
}

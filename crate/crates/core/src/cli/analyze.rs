use std::collections::HashMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;

use super::{ingest, output, prepare_output_dir, CliError, RunConfig, EXIT_OK, EXIT_PARTIAL};
use crate::estimate::{self, HurstTrajectory, SummaryStats, WindowConfig};
use crate::fairvol::{self, FairVolReport, FitResult, LowTailDiagnostic, SigmaHSample};
use crate::series::TimeSeries;

/// Significance of the martingale interval in the summary block.
pub const SUMMARY_ALPHA: f64 = 0.05;
pub const SCHEMA_VERSION: u32 = 1;

/// In-memory result of the pipeline on one log-price series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAnalysis {
    pub trajectory: HurstTrajectory,
    pub summary: SummaryStats,
    pub fit: FitResult,
    pub fair: FairVolReport,
    pub low_tail: LowTailDiagnostic,
}

impl SeriesAnalysis {
    /// Rolling estimates, summary statistics, σ–H fit and fair volatility.
    pub fn compute(
        log_prices: &TimeSeries,
        window: &WindowConfig,
        levels: &[f64],
        periods: f64,
    ) -> Result<Self, CliError> {
        let trajectory = estimate::hurst_pointwise(log_prices, window)?;
        Self::from_trajectory(trajectory, levels, periods)
    }

    fn from_trajectory(
        trajectory: HurstTrajectory,
        levels: &[f64],
        periods: f64,
    ) -> Result<Self, CliError> {
        let summary = estimate::summary_stats(&trajectory, SUMMARY_ALPHA)?;
        let sample = SigmaHSample::from_trajectory(&trajectory)?;
        let fit = fairvol::fit_sigma_h(&sample)?;
        let fair = fairvol::fair_volatility(
            &fit,
            trajectory.n,
            trajectory.config.window,
            levels,
            periods,
        )?;
        let low_tail = fairvol::low_tail_residuals(&fit);
        Ok(Self {
            trajectory,
            summary,
            fit,
            fair,
            low_tail,
        })
    }
}

/// Fit statistics without the per-pair vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub a: f64,
    pub b: f64,
    pub ci_a: (f64, f64),
    pub ci_b: (f64, f64),
    pub r_squared: f64,
    pub sse: f64,
    pub rmse: f64,
    pub dof: usize,
    pub pairs: usize,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&FitResult> for FitSummary {
    fn from(f: &FitResult) -> Self {
        Self {
            a: f.a,
            b: f.b,
            ci_a: f.ci_a,
            ci_b: f.ci_b,
            r_squared: f.r_squared,
            sse: f.sse,
            rmse: f.rmse,
            dof: f.dof,
            pairs: f.h.len(),
            n: f.n,
            iterations: f.iterations,
            converged: f.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_date: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_date: Option<NaiveDate>,
    pub window: WindowConfig,
    pub summary: SummaryStats,
    pub fit: FitSummary,
    pub fair_volatility: FairVolReport,
    pub low_tail_residuals: LowTailDiagnostic,
    pub manifest: Vec<PathBuf>,
}

impl SeriesReport {
    pub fn one_line(&self) -> String {
        format!(
            "{}: n={} mean_h={:.4} a={:.4e} b={:.4} r2={:.4} fair={:.4} ({:.1}%)",
            self.name,
            self.n,
            self.summary.mean,
            self.fit.a,
            self.fit.b,
            self.fit.r_squared,
            self.fair_volatility.fair_vol,
            100.0 * self.fair_volatility.fair_vol_annualized
        )
    }
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a SeriesReport,
}

#[derive(Debug)]
pub struct SeriesOutcome {
    pub name: String,
    pub input: PathBuf,
    pub report: Option<SeriesReport>,
    pub error: Option<CliError>,
}

#[derive(Debug, Default)]
pub struct PipelineReport {
    pub series: Vec<SeriesOutcome>,
}

impl PipelineReport {
    pub fn exit_code(&self) -> i32 {
        if self.series.iter().all(|s| s.error.is_none()) {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }
}

/// Runs the pipeline on one log-price series and writes its artifacts
/// under `cfg.out_dir` with base name `name`.
///
/// The trajectory CSV is written before fitting, so it survives a failed fit.
pub fn analyze_log_prices(
    name: &str,
    log_prices: &TimeSeries,
    cfg: &RunConfig,
) -> Result<SeriesReport, CliError> {
    let out = |suffix: &str| cfg.out_dir.join(format!("{name}.{suffix}"));
    let mut manifest = Vec::new();

    let trajectory = estimate::hurst_pointwise(log_prices, &cfg.window)?;
    let hurst_csv = out("hurst.csv");
    output::write_hurst_csv(&hurst_csv, &trajectory)?;
    manifest.push(hurst_csv);
    if cfg.svg {
        let (lo, hi) = estimate::martingale_ci(trajectory.n, cfg.window.window, SUMMARY_ALPHA)?;
        let path = out("hurst.svg");
        output::write_text(&path, &output::trajectory_svg(&trajectory, &[lo, 0.5, hi]))?;
        manifest.push(path);
    }

    let analysis = SeriesAnalysis::from_trajectory(trajectory, &cfg.levels, cfg.periods)?;
    let fit_csv = out("fit.csv");
    output::write_fit_csv(&fit_csv, &analysis.fit)?;
    manifest.push(fit_csv);
    if cfg.svg {
        let path = out("scatter.svg");
        output::write_text(&path, &output::scatter_svg(&analysis.fit)?)?;
        manifest.push(path);
    }

    let report_path = out("report.json");
    manifest.push(report_path.clone());
    let dates = log_prices.dates.as_deref();
    let report = SeriesReport {
        name: name.to_string(),
        input: None,
        n: log_prices.len(),
        first_date: dates.and_then(|d| d.first().copied()),
        last_date: dates.and_then(|d| d.last().copied()),
        window: cfg.window,
        fit: FitSummary::from(&analysis.fit),
        summary: analysis.summary,
        fair_volatility: analysis.fair,
        low_tail_residuals: analysis.low_tail,
        manifest,
    };
    output::write_json(
        &report_path,
        &ReportFile {
            schema_version: SCHEMA_VERSION,
            report: &report,
        },
    )?;
    Ok(report)
}

fn analyze_file(name: &str, path: &Path, cfg: &RunConfig) -> Result<SeriesReport, CliError> {
    let prices = ingest::ingest_csv(path, &cfg.columns)?;
    let log_prices = estimate::to_log_prices(&prices)?;
    let mut report = analyze_log_prices(name, &log_prices, cfg)?;
    report.input = Some(path.to_path_buf());
    Ok(report)
}

/// Output base names: file stems, suffixed when two inputs share one.
fn series_names(inputs: &[PathBuf]) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    inputs
        .iter()
        .map(|p| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".into());
            let count = seen.entry(stem.clone()).or_insert(0);
            *count += 1;
            if *count == 1 {
                stem
            } else {
                format!("{stem}-{count}")
            }
        })
        .collect()
}

/// Analyses every input concurrently. Per-series failures are recorded in
/// the report; only configuration problems abort the run.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<PipelineReport, CliError> {
    cfg.validate()?;
    if cfg.inputs.is_empty() {
        return Err(CliError::Config("no input files".into()));
    }
    prepare_output_dir(&cfg.out_dir)?;
    let names = series_names(&cfg.inputs);
    let results: Vec<Result<SeriesReport, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .inputs
            .iter()
            .zip(&names)
            .map(|(path, name)| scope.spawn(move || analyze_file(name, path, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("analysis thread panicked"))
            .collect()
    });
    let series = cfg
        .inputs
        .iter()
        .zip(names)
        .zip(results)
        .map(|((input, name), result)| {
            match &result {
                Ok(_) => log::info!("{name}: done"),
                Err(e) => log::error!("{name}: {e}"),
            }
            let (report, error) = match result {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e)),
            };
            SeriesOutcome {
                name,
                input: input.clone(),
                report,
                error,
            }
        })
        .collect();
    Ok(PipelineReport { series })
}

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::{output, prepare_output_dir, CliError};
use crate::estimate;
use crate::series::{SeriesRole, TimeSeries};
use crate::specfun::HurstValue;
use crate::synth::{self, HPath, SynthKind, SynthesisSpec};

pub const FIG1_N: usize = 1000;
pub const FIG1_SIGMA: f64 = 0.01;
pub const FIG1_PHI: f64 = 0.9;
pub const FIG2_N: usize = 4096;
pub const FIG2_H: (f64, f64) = (0.4, 0.6);
/// Lags written to the ACF files.
pub const ACF_LAGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// IID vs AR(1) returns with the same volatility.
    Fig1,
    /// Step memory function, its path, and the ACF of each half.
    Fig2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthRequest {
    Spec(SynthesisSpec),
    Preset {
        preset: Preset,
        n: Option<usize>,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub request: SynthRequest,
    pub out_dir: PathBuf,
    /// Base name for the output files; defaults to the kind or preset name.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthSummary {
    pub files: Vec<PathBuf>,
    /// Named statistics of the generated series, in a fixed order.
    pub stats: Vec<(String, f64)>,
}

fn sample_std(x: &[f64]) -> f64 {
    estimate::moments(x).1
}

fn lag1(x: &[f64]) -> f64 {
    estimate::acf(x, 1)[1]
}

/// IID returns and AR(1) returns rescaled to the IID sample standard
/// deviation, so both have exactly the same volatility.
pub fn fig1_series(n: usize, seed: u64) -> Result<(TimeSeries, TimeSeries), CliError> {
    let iid = synth::synth_iid(FIG1_SIGMA, n, seed)?;
    let ar = synth::synth_ar1(FIG1_PHI, FIG1_SIGMA, n, seed)?;
    let ratio = sample_std(&iid.values) / sample_std(&ar.values);
    let ar = TimeSeries::new(
        SeriesRole::Return,
        ar.values.iter().map(|v| v * ratio).collect(),
    );
    Ok((iid, ar))
}

/// Step memory path and the increments of its two halves.
pub fn fig2_series(n: usize, seed: u64) -> Result<(HPath, TimeSeries), CliError> {
    let (h1, h2) = (HurstValue::new(FIG2_H.0)?, HurstValue::new(FIG2_H.1)?);
    Ok(synth::synth_step_memory(h1, h2, n, seed)?)
}

/// Increments driven by the first and second level of a step path.
pub fn split_increments(path: &TimeSeries) -> (Vec<f64>, Vec<f64>) {
    let incs = path.increments();
    let half = path.len() / 2;
    (incs[..half].to_vec(), incs[half..].to_vec())
}

fn kind_name(kind: SynthKind) -> &'static str {
    match kind {
        SynthKind::Fbm => "fbm",
        SynthKind::Fgn => "fgn",
        SynthKind::Mpre => "mpre",
        SynthKind::FouH => "fou_h",
        SynthKind::Ar1 => "ar1",
        SynthKind::Iid => "iid",
        SynthKind::StepMemory => "step_memory",
    }
}

/// Generates the requested series and writes them (plus ACF files for the
/// presets) to `cfg.out_dir`.
pub fn cmd_synth(cfg: &SynthConfig) -> Result<SynthSummary, CliError> {
    prepare_output_dir(&cfg.out_dir)?;
    let name = cfg.name.clone().unwrap_or_else(|| {
        match &cfg.request {
            SynthRequest::Spec(spec) => kind_name(spec.kind()),
            SynthRequest::Preset {
                preset: Preset::Fig1,
                ..
            } => "fig1",
            SynthRequest::Preset {
                preset: Preset::Fig2,
                ..
            } => "fig2",
        }
        .to_string()
    });
    let mut files = Vec::new();
    let mut path_csv = |suffix: &str, values: &[f64]| -> Result<(), CliError> {
        let path = cfg.out_dir.join(format!("{name}.{suffix}.csv"));
        output::write_path_csv(&path, values)?;
        files.push(path);
        Ok(())
    };
    let mut acf_files = Vec::new();
    let mut stats = Vec::new();
    match &cfg.request {
        SynthRequest::Spec(spec) => {
            let out = spec.generate()?;
            path_csv("path", &out.series.values)?;
            if let (Some(hp), true) = (&out.hpath, spec.kind() != SynthKind::FouH) {
                path_csv("hpath", hp.values())?;
            }
        }
        SynthRequest::Preset {
            preset: Preset::Fig1,
            n,
            seed,
        } => {
            let (iid, ar) = fig1_series(n.unwrap_or(FIG1_N), *seed)?;
            path_csv("iid", &iid.values)?;
            path_csv("ar1", &ar.values)?;
            acf_files.push(("iid.acf", estimate::acf(&iid.values, ACF_LAGS)));
            acf_files.push(("ar1.acf", estimate::acf(&ar.values, ACF_LAGS)));
            stats.push(("iid_std".to_string(), sample_std(&iid.values)));
            stats.push(("ar1_std".to_string(), sample_std(&ar.values)));
            stats.push(("iid_acf1".to_string(), lag1(&iid.values)));
            stats.push(("ar1_acf1".to_string(), lag1(&ar.values)));
        }
        SynthRequest::Preset {
            preset: Preset::Fig2,
            n,
            seed,
        } => {
            let (hpath, path) = fig2_series(n.unwrap_or(FIG2_N), *seed)?;
            let (first, second) = split_increments(&path);
            let full = path.increments();
            path_csv("hpath", hpath.values())?;
            path_csv("path", &path.values)?;
            acf_files.push(("acf_first", estimate::acf(&first, ACF_LAGS)));
            acf_files.push(("acf_second", estimate::acf(&second, ACF_LAGS)));
            acf_files.push(("acf_full", estimate::acf(&full, ACF_LAGS)));
            stats.push(("first_half_acf1".to_string(), lag1(&first)));
            stats.push(("second_half_acf1".to_string(), lag1(&second)));
            stats.push(("full_acf1".to_string(), lag1(&full)));
        }
    }
    for (suffix, acf) in acf_files {
        let path = cfg.out_dir.join(format!("{name}.{suffix}.csv"));
        output::write_acf_csv(&path, &acf)?;
        files.push(path);
    }
    Ok(SynthSummary { files, stats })
}

//! The σ–H law `σ = √V_H · N^{-H}`, its two-parameter fit to estimated
//! `(Ĥ_t, σ̂_t)` pairs, and the fair volatility read off at `H = ½`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::estimate::{self, EstimateError, HurstTrajectory, RecordFlag};
use crate::specfun::{self, HurstValue, SpecfunError};

/// Fewest valid pairs `fit_sigma_h` accepts.
pub const MIN_FIT_PAIRS: usize = 50;
/// Narrowest `Ĥ` range `fit_sigma_h` accepts.
pub const MIN_H_SPAN: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 200;
pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, Error)]
pub enum FairVolError {
    #[error("b·h = {x} is outside (0, 1)")]
    Domain { x: f64 },
    #[error("sample size must be at least 2, got {0}")]
    SampleSize(usize),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("need at least {needed} valid pairs, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("estimated H spans only {0:.4}; the scale parameter is not identifiable")]
    DegenerateSpan(f64),
    #[error("fit did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<FitResult>),
    #[error("invalid level {0}; expected a value in (0, 1)")]
    InvalidLevel(f64),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// `√V_h · n^{-h}`.
pub fn sigma_of_h(h: HurstValue, n: usize) -> Result<f64, FairVolError> {
    if n < 2 {
        return Err(FairVolError::SampleSize(n));
    }
    Ok(specfun::v_h(h).sqrt() * (n as f64).powf(-h.get()))
}

fn scaled_hurst(h: f64, b: f64) -> Result<HurstValue, FairVolError> {
    let x = b * h;
    HurstValue::new(x).map_err(|_| FairVolError::Domain { x })
}

/// `a + N^{-bh} · √V_{bh}`.
pub fn model_curve(h: f64, a: f64, b: f64, n: usize) -> Result<f64, FairVolError> {
    if n < 2 {
        return Err(FairVolError::SampleSize(n));
    }
    let x = scaled_hurst(h, b)?;
    Ok(a + (n as f64).powf(-x.get()) * specfun::v_h(x).sqrt())
}

/// Model value and its derivative with respect to `b`.
fn model_and_db(h: f64, a: f64, b: f64, ln_n: f64) -> Result<(f64, f64), FairVolError> {
    let x = scaled_hurst(h, b)?.get();
    let core = (-x * ln_n).exp() * specfun::v_h(HurstValue::new(x)?).sqrt();
    let dlog_v =
        specfun::digamma(x) - specfun::digamma(1.0 - x) - 2.0 * specfun::digamma(1.0 + 2.0 * x);
    Ok((a + core, core * h * (0.5 * dlog_v - ln_n)))
}

/// Aligned `(Ĥ, σ̂)` pairs from one series of `n` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaHSample {
    pairs: Vec<(f64, f64)>,
    n: usize,
}

impl SigmaHSample {
    pub fn new(pairs: Vec<(f64, f64)>, n: usize) -> Result<Self, FairVolError> {
        if pairs
            .iter()
            .any(|&(h, s)| !h.is_finite() || !s.is_finite() || s < 0.0)
        {
            return Err(FairVolError::InvalidSample(
                "pairs must be finite with non-negative sigma".into(),
            ));
        }
        if n < pairs.len() || n < 2 {
            return Err(FairVolError::InvalidSample(format!(
                "sample size {n} is smaller than the {} pairs",
                pairs.len()
            )));
        }
        Ok(Self { pairs, n })
    }

    /// Pairs from records flagged `Ok`; missing windows and estimates
    /// outside `(0, 1)` are dropped because the curve is undefined there.
    pub fn from_trajectory(traj: &HurstTrajectory) -> Result<Self, FairVolError> {
        let pairs = traj
            .records
            .iter()
            .filter(|r| r.flag == RecordFlag::Ok && HurstValue::new(r.h_hat).is_ok())
            .map(|r| (r.h_hat, r.sigma_hat))
            .collect();
        Self::new(pairs, traj.n)
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub ci_a: (f64, f64),
    pub ci_b: (f64, f64),
    pub r_squared: f64,
    pub sse: f64,
    /// `√(sse / dof)`.
    pub rmse: f64,
    pub dof: usize,
    /// Covariance of `(a, b)`.
    pub cov: [[f64; 2]; 2],
    pub n: usize,
    pub h: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `σ̂ - model`, aligned with `h`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn model(&self, h: f64) -> Result<f64, FairVolError> {
        model_curve(h, self.a, self.b, self.n)
    }
}

fn sse_at(pairs: &[(f64, f64)], a: f64, b: f64, ln_n: f64) -> Option<f64> {
    let mut sse = 0.0;
    for &(h, s) in pairs {
        let (m, _) = model_and_db(h, a, b, ln_n).ok()?;
        sse += (s - m) * (s - m);
    }
    Some(sse)
}

/// Least-squares fit of `σ̂ ≈ a + N^{-bĤ}·√V_{bĤ}` by damped Gauss–Newton
/// from `a = 0, b = 1`.
///
/// Pairs are processed in sorted order so the result does not depend on the
/// input order. Non-convergence returns the best iterate inside
/// [`FairVolError::NotConverged`].
pub fn fit_sigma_h(data: &SigmaHSample) -> Result<FitResult, FairVolError> {
    let count = data.len();
    if count < MIN_FIT_PAIRS {
        return Err(FairVolError::TooFewPairs {
            needed: MIN_FIT_PAIRS,
            got: count,
        });
    }
    let mut sorted = data.pairs.clone();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let span = sorted[count - 1].0 - sorted[0].0;
    if span < MIN_H_SPAN {
        return Err(FairVolError::DegenerateSpan(span));
    }
    let ln_n = (data.n as f64).ln();

    let (mut a, mut b) = (0.0, 1.0);
    let mut sse = sse_at(&sorted, a, b, ln_n).ok_or_else(|| {
        FairVolError::InvalidSample("initial curve undefined at some pair".into())
    })?;
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if sse == 0.0 {
            converged = true;
            break;
        }
        // normal equations of the linearised problem
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(h, s) in &sorted {
            let (m, db) = model_and_db(h, a, b, ln_n)?;
            let r = s - m;
            jaa += 1.0;
            jab += db;
            jbb += db * db;
            ga += r;
            gb += r * db;
        }
        let mut accepted = false;
        while mu < 1e20 {
            let (daa, dbb) = (jaa * (1.0 + mu), jbb * (1.0 + mu));
            let det = daa * dbb - jab * jab;
            let step_a = (dbb * ga - jab * gb) / det;
            let step_b = (daa * gb - jab * ga) / det;
            let trial = sse_at(&sorted, a + step_a, b + step_b, ln_n);
            match trial {
                Some(new_sse) if new_sse <= sse => {
                    let gain = (sse - new_sse) / sse;
                    a += step_a;
                    b += step_b;
                    sse = new_sse;
                    mu = (mu * 0.1).max(1e-12);
                    accepted = true;
                    if gain < 1e-12 {
                        converged = true;
                    }
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
        }
        if converged {
            break;
        }
    }

    let result = finish_fit(data, &sorted, a, b, sse, ln_n, iterations, converged)?;
    if converged {
        Ok(result)
    } else {
        Err(FairVolError::NotConverged(Box::new(result)))
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_fit(
    data: &SigmaHSample,
    sorted: &[(f64, f64)],
    a: f64,
    b: f64,
    sse: f64,
    ln_n: f64,
    iterations: usize,
    converged: bool,
) -> Result<FitResult, FairVolError> {
    let count = sorted.len();
    let dof = count - 2;
    let (mut jaa, mut jab, mut jbb) = (0.0, 0.0, 0.0);
    for &(h, _) in sorted {
        let (_, db) = model_and_db(h, a, b, ln_n)?;
        jaa += 1.0;
        jab += db;
        jbb += db * db;
    }
    let s2 = sse / dof as f64;
    let det = jaa * jbb - jab * jab;
    let cov = [
        [s2 * jbb / det, -s2 * jab / det],
        [-s2 * jab / det, s2 * jaa / det],
    ];
    let t = t_quantile(0.975, dof);
    let half_a = t * cov[0][0].sqrt();
    let half_b = t * cov[1][1].sqrt();

    let mean = sorted.iter().map(|p| p.1).sum::<f64>() / count as f64;
    let sst: f64 = sorted.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };

    let (h, sigma): (Vec<f64>, Vec<f64>) = data.pairs.iter().copied().unzip();
    let residuals = data
        .pairs
        .iter()
        .map(|&(h, s)| model_curve(h, a, b, data.n).map(|m| s - m))
        .collect::<Result<_, _>>()?;
    Ok(FitResult {
        a,
        b,
        ci_a: (a - half_a, a + half_a),
        ci_b: (b - half_b, b + half_b),
        r_squared,
        sse,
        rmse: s2.sqrt(),
        dof,
        cov,
        n: data.n,
        h,
        sigma,
        residuals,
        iterations,
        converged,
    })
}

fn t_quantile(p: f64, dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(p)
}

/// Pointwise prediction interval for a new observation at `h`.
///
/// Combines the residual variance with the parameter covariance propagated
/// through the curve. `level = 0` collapses to the curve.
pub fn prediction_bounds(fit: &FitResult, h: f64, level: f64) -> Result<(f64, f64), FairVolError> {
    if !(0.0..1.0).contains(&level) {
        return Err(FairVolError::InvalidLevel(level));
    }
    let ln_n = (fit.n as f64).ln();
    let (m, db) = model_and_db(h, fit.a, fit.b, ln_n)?;
    let c = fit.cov;
    let param_var = c[0][0] + 2.0 * db * c[0][1] + db * db * c[1][1];
    let var = fit.rmse * fit.rmse + param_var.max(0.0);
    let half = if level == 0.0 {
        0.0
    } else {
        t_quantile(0.5 + level / 2.0, fit.dof) * var.sqrt()
    };
    Ok((m - half, m + half))
}

/// Residual behaviour among the lowest `Ĥ` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowTailDiagnostic {
    /// 5th percentile of `Ĥ`.
    pub h_threshold: f64,
    pub count: usize,
    pub mean_residual: f64,
    pub negative_fraction: f64,
    /// Mean residual below zero and most residuals negative.
    pub systematic_negative: bool,
}

pub fn low_tail_residuals(fit: &FitResult) -> LowTailDiagnostic {
    let mut hs = fit.h.clone();
    hs.sort_by(f64::total_cmp);
    let idx = ((hs.len() as f64 - 1.0) * 0.05).round() as usize;
    let h_threshold = hs[idx];
    let tail: Vec<f64> = fit
        .h
        .iter()
        .zip(&fit.residuals)
        .filter(|(h, _)| **h <= h_threshold)
        .map(|(_, r)| *r)
        .collect();
    let count = tail.len();
    let mean_residual = tail.iter().sum::<f64>() / count as f64;
    let negative_fraction = tail.iter().filter(|r| **r < 0.0).count() as f64 / count as f64;
    LowTailDiagnostic {
        h_threshold,
        count,
        mean_residual,
        negative_fraction,
        systematic_negative: mean_residual < 0.0 && negative_fraction > 0.5,
    }
}

/// `σ · √periods`.
pub fn annualize(sigma: f64, periods: f64) -> f64 {
    sigma * periods.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairInterval {
    /// Confidence level, e.g. 0.95.
    pub level: f64,
    /// Martingale interval for `Ĥ` at this level.
    pub h_interval: (f64, f64),
    pub lo: f64,
    pub hi: f64,
    pub lo_annualized: f64,
    pub hi_annualized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairVolReport {
    pub fair_vol: f64,
    pub fair_vol_annualized: f64,
    pub periods: f64,
    pub intervals: Vec<FairInterval>,
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

/// Curve value at `H = ½`, with each martingale `Ĥ` interval mapped through
/// the (decreasing) curve.
pub fn fair_volatility(
    fit: &FitResult,
    n_series: usize,
    delta: usize,
    levels: &[f64],
    periods: f64,
) -> Result<FairVolReport, FairVolError> {
    let fair_vol = fit.model(0.5)?;
    let intervals = levels
        .iter()
        .map(|&level| {
            if !(level > 0.0 && level < 1.0) {
                return Err(FairVolError::InvalidLevel(level));
            }
            let (h_lo, h_hi) = estimate::martingale_ci(n_series, delta, 1.0 - level)?;
            let (x, y) = (fit.model(h_hi)?, fit.model(h_lo)?);
            let (lo, hi) = (x.min(y), x.max(y));
            Ok(FairInterval {
                level,
                h_interval: (h_lo, h_hi),
                lo,
                hi,
                lo_annualized: annualize(lo, periods),
                hi_annualized: annualize(hi, periods),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(FairVolReport {
        fair_vol,
        fair_vol_annualized: annualize(fair_vol, periods),
        periods,
        intervals,
        a: fit.a,
        b: fit.b,
        n: fit.n,
    })
}

//! Rolling-window Hurst and volatility estimates, and the statistics that
//! summarise them.
//!
//! Windows are causal: the record at index `t` only uses `x[t-δ-1..=t]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::series::{SeriesRole, TimeSeries};

/// Smallest admissible window length.
pub const MIN_WINDOW: usize = 8;
/// Smallest trajectory `summary_stats` accepts.
pub const MIN_SUMMARY_RECORDS: usize = 100;
/// Smallest series `adf_test` accepts.
pub const MIN_ADF_SAMPLES: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("price {value} at index {index} is not positive")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid window configuration: {0}")]
    InvalidWindow(String),
    #[error("lag must be 1 or 2, got {0}")]
    InvalidLag(usize),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("ADF regression is rank deficient")]
    SingularRegression,
}

/// Natural log of a positive price series.
pub fn to_log_prices(prices: &TimeSeries) -> Result<TimeSeries, EstimateError> {
    let mut values = Vec::with_capacity(prices.len());
    for (index, &value) in prices.values.iter().enumerate() {
        if !(value > 0.0) {
            return Err(EstimateError::NonPositivePrice { index, value });
        }
        values.push(value.ln());
    }
    Ok(TimeSeries {
        role: SeriesRole::LogPrice,
        values,
        dates: prices.dates.clone(),
    })
}

fn mean_sq(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    sum / count as f64
}

/// Second moment of the lag-1 or lag-2 increments of a `δ+2`-point window.
///
/// Lag 1 averages the `δ` most recent increments, lag 2 the `δ` overlapping
/// lag-2 differences ending inside the window.
pub fn window_moment2(x: &[f64], lag: usize) -> Result<f64, EstimateError> {
    if x.len() < 4 {
        return Err(EstimateError::InsufficientData {
            needed: 4,
            got: x.len(),
        });
    }
    match lag {
        1 => Ok(mean_sq(x[1..].windows(2).map(|w| w[1] - w[0]))),
        2 => Ok(mean_sq(x.windows(3).map(|w| w[2] - w[0]))),
        other => Err(EstimateError::InvalidLag(other)),
    }
}

/// Root mean square of the lag-1 increments of `x`.
pub fn realized_vol(x: &[f64]) -> Result<f64, EstimateError> {
    if x.len() < 2 {
        return Err(EstimateError::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    Ok(mean_sq(x.windows(2).map(|w| w[1] - w[0])).sqrt())
}

/// Sample standard deviation of the lag-1 increments of `x`.
pub fn realized_vol_centered(x: &[f64]) -> Result<f64, EstimateError> {
    if x.len() < 3 {
        return Err(EstimateError::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    let incs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = incs.iter().sum::<f64>() / incs.len() as f64;
    let ss: f64 = incs.iter().map(|d| (d - mean).powi(2)).sum();
    Ok((ss / (incs.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolForm {
    /// Quadratic-variation form, zero-mean convention.
    #[default]
    QuadraticVariation,
    /// Mean-centred sample standard deviation.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window: usize,
    pub stride: usize,
    #[serde(default)]
    pub vol_form: VolForm,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 20,
            stride: 1,
            vol_form: VolForm::QuadraticVariation,
        }
    }
}

impl WindowConfig {
    pub fn new(window: usize, stride: usize) -> Result<Self, EstimateError> {
        let cfg = Self {
            window,
            stride,
            vol_form: VolForm::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EstimateError> {
        if self.window < MIN_WINDOW || !self.window.is_multiple_of(2) {
            return Err(EstimateError::InvalidWindow(format!(
                "window must be even and at least {MIN_WINDOW}, got {}",
                self.window
            )));
        }
        if self.stride == 0 {
            return Err(EstimateError::InvalidWindow(
                "stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Points each window spans.
    pub fn span(&self) -> usize {
        self.window + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFlag {
    Ok,
    /// Estimate computed but outside `(0, 1)`.
    OutsideUnit,
    /// Zero lag-1 variance; the estimate is undefined.
    Missing,
}

impl RecordFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordFlag::Ok => "ok",
            RecordFlag::OutsideUnit => "outside_unit",
            RecordFlag::Missing => "missing",
        }
    }
}

/// One window. `t` is the index of the window's last point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstRecord {
    pub t: usize,
    /// NaN when `flag` is `Missing`.
    pub h_hat: f64,
    pub sigma_hat: f64,
    pub flag: RecordFlag,
}

impl HurstRecord {
    pub fn is_valid(&self) -> bool {
        self.flag != RecordFlag::Missing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstTrajectory {
    pub records: Vec<HurstRecord>,
    pub config: WindowConfig,
    /// Length of the source series.
    pub n: usize,
}

impl HurstTrajectory {
    /// `h_hat` of every non-missing record, in index order.
    pub fn h_values(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.is_valid())
            .map(|r| r.h_hat)
            .collect()
    }

    /// `(h_hat, sigma_hat)` of every non-missing record.
    pub fn valid_pairs(&self) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|r| r.is_valid())
            .map(|r| (r.h_hat, r.sigma_hat))
            .collect()
    }
}

fn window_record(win: &[f64], t: usize, vol_form: VolForm) -> HurstRecord {
    let m1 = mean_sq(win[1..].windows(2).map(|w| w[1] - w[0]));
    let m2 = mean_sq(win.windows(3).map(|w| w[2] - w[0]));
    let sigma_hat = match vol_form {
        VolForm::QuadraticVariation => m1.sqrt(),
        VolForm::Centered => realized_vol_centered(&win[1..]).unwrap_or(0.0),
    };
    if !(m1 > 0.0) {
        return HurstRecord {
            t,
            h_hat: f64::NAN,
            sigma_hat,
            flag: RecordFlag::Missing,
        };
    }
    let h_hat = 0.5 * (m2 / m1).log2();
    let flag = if h_hat > 0.0 && h_hat < 1.0 {
        RecordFlag::Ok
    } else {
        RecordFlag::OutsideUnit
    };
    HurstRecord {
        t,
        h_hat,
        sigma_hat,
        flag,
    }
}

/// `Ĥ_t = ½ log₂(M′/M)` and `σ̂_t = √M` on every window of a log-price series.
pub fn hurst_pointwise(
    x: &TimeSeries,
    cfg: &WindowConfig,
) -> Result<HurstTrajectory, EstimateError> {
    cfg.validate()?;
    let span = cfg.span();
    let n = x.len();
    if n < span {
        return Err(EstimateError::InsufficientData {
            needed: span,
            got: n,
        });
    }
    let records = (span - 1..n)
        .step_by(cfg.stride)
        .map(|t| window_record(&x.values[t + 1 - span..=t], t, cfg.vol_form))
        .collect();
    Ok(HurstTrajectory {
        records,
        config: *cfg,
        n,
    })
}

/// Two-sided interval around `½` for `Ĥ` under the martingale hypothesis,
/// `½ ∓ z_{1-α/2} / √(2δ ln²(n-1))`.
pub fn martingale_ci(n: usize, delta: usize, alpha: f64) -> Result<(f64, f64), EstimateError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EstimateError::InvalidAlpha(alpha));
    }
    if n <= delta + 1 {
        return Err(EstimateError::InsufficientData {
            needed: delta + 2,
            got: n,
        });
    }
    let z = standard_normal().inverse_cdf(1.0 - alpha / 2.0);
    let ln = ((n - 1) as f64).ln();
    let half = z / (2.0 * delta as f64 * ln * ln).sqrt();
    Ok((0.5 - half, 0.5 + half))
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Sample autocorrelation with the biased (`1/n`) normalisation.
/// `acf[0] = 1` unless the input is constant, in which case every entry is NaN.
pub fn acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            let ck: f64 = centered[k..]
                .iter()
                .zip(&centered)
                .map(|(a, b)| a * b)
                .sum();
            ck / c0
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Augmented Dickey–Fuller
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regression {
    Constant,
    #[default]
    ConstantTrend,
}

impl Regression {
    /// Response-surface coefficients `(level, β∞, β1, β2, β3)`; the critical
    /// value at `T` observations is `β∞ + β1/T + β2/T² + β3/T³`.
    fn surface(self) -> [(f64, [f64; 4]); 3] {
        match self {
            Regression::Constant => [
                (0.01, [-3.43035, -6.5393, -16.786, -79.433]),
                (0.05, [-2.86154, -2.8903, -4.234, -40.040]),
                (0.10, [-2.56677, -1.5384, -2.809, 0.0]),
            ],
            Regression::ConstantTrend => [
                (0.01, [-3.95877, -9.0531, -28.428, -134.155]),
                (0.05, [-3.41049, -4.3904, -9.036, -45.374]),
                (0.10, [-3.12705, -2.5856, -3.925, -22.380]),
            ],
        }
    }

    /// Critical values at 1%, 5% and 10% for a regression on `nobs` rows.
    pub fn critical_values(self, nobs: usize) -> [(f64, f64); 3] {
        let t = nobs as f64;
        self.surface()
            .map(|(level, b)| (level, b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub stat: f64,
    pub lags: usize,
    pub nobs: usize,
    pub regression: Regression,
    /// `(significance, critical value)` at 1%, 5% and 10%.
    pub critical: [(f64, f64); 3],
    pub critical_5pct: f64,
    /// `stat < critical_5pct`.
    pub reject: bool,
}

/// Schwert lag order `⌊12 (n/100)^{1/4}⌋`.
pub fn schwert_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// ADF test with the Schwert lag order.
pub fn adf_test(x: &[f64], regression: Regression) -> Result<AdfResult, EstimateError> {
    adf_test_with_lags(x, regression, schwert_lags(x.len()))
}

pub fn adf_test_with_lags(
    x: &[f64],
    regression: Regression,
    lags: usize,
) -> Result<AdfResult, EstimateError> {
    let n = x.len();
    let needed = MIN_ADF_SAMPLES.max(lags + 10);
    if n < needed {
        return Err(EstimateError::InsufficientData { needed, got: n });
    }
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // row for each t in lags+1..n: Δx_t on [1, t, x_{t-1}, Δx_{t-1}, ...]
    let rows = n - 1 - lags;
    let det = match regression {
        Regression::Constant => 1,
        Regression::ConstantTrend => 2,
    };
    let cols = det + 1 + lags;
    let rho_col = det;
    let scale = rows as f64;
    let design = DMatrix::from_fn(rows, cols, |r, c| {
        let t = r + lags + 1;
        match c {
            0 => 1.0,
            1 if det == 2 => t as f64 / scale,
            c if c == rho_col => x[t - 1],
            c => dx[t - 1 - (c - rho_col)],
        }
    });
    let y = DVector::from_fn(rows, |r, _| dx[r + lags]);

    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal().iter().any(|v| !(v.abs() > 1e-10 * diag_max)) {
        return Err(EstimateError::SingularRegression);
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(EstimateError::SingularRegression)?;
    let resid = &y - &design * &beta;
    let dof = rows - cols;
    let s2 = resid.norm_squared() / dof as f64;
    // (RᵀR)⁻¹_jj = ‖R⁻ᵀ e_j‖²
    let mut e = DVector::zeros(cols);
    e[rho_col] = 1.0;
    let v = r
        .transpose()
        .solve_lower_triangular(&e)
        .ok_or(EstimateError::SingularRegression)?;
    let se = (s2 * v.norm_squared()).sqrt();
    let stat = beta[rho_col] / se;
    let critical = regression.critical_values(rows);
    let critical_5pct = critical[1].1;
    Ok(AdfResult {
        stat,
        lags,
        nobs: rows,
        regression,
        critical,
        critical_5pct,
        reject: stat < critical_5pct,
    })
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatFlag {
    /// Zero dispersion: skewness and kurtosis are undefined.
    ZeroVariance,
    /// The ADF regression could not be run.
    AdfUnavailable,
    /// Records flagged missing were excluded.
    MissingRecords,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n_obs: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation (`n-1` denominator).
    pub std: f64,
    pub skewness: Option<f64>,
    /// Non-excess: 3 for a Gaussian.
    pub kurtosis: Option<f64>,
    pub alpha: f64,
    pub ci: (f64, f64),
    pub adf: Option<AdfResult>,
    pub flags: Vec<StatFlag>,
}

/// Moments of a sample. `skewness` and `kurtosis` are `None` when the sample
/// has no dispersion.
pub fn moments(x: &[f64]) -> (f64, f64, Option<f64>, Option<f64>) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (m2, m3, m4) = x.iter().fold((0.0, 0.0, 0.0), |(a, b, c), v| {
        let d = v - mean;
        (a + d * d, b + d * d * d, c + d * d * d * d)
    });
    let std = (m2 / (n - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if !(m2 > 0.0) || !(m2 > 1e-28 * mean * mean) {
        return (mean, 0.0, None, None);
    }
    (mean, std, Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
}

/// Summary block for a Hurst trajectory, computed over its non-missing
/// estimates, with the martingale interval at significance `alpha` and the
/// trend-model ADF test.
pub fn summary_stats(traj: &HurstTrajectory, alpha: f64) -> Result<SummaryStats, EstimateError> {
    let h = traj.h_values();
    if h.len() < MIN_SUMMARY_RECORDS {
        return Err(EstimateError::InsufficientData {
            needed: MIN_SUMMARY_RECORDS,
            got: h.len(),
        });
    }
    let mut flags = Vec::new();
    if h.len() < traj.records.len() {
        flags.push(StatFlag::MissingRecords);
    }
    let (mean, std, skewness, kurtosis) = moments(&h);
    if skewness.is_none() {
        flags.push(StatFlag::ZeroVariance);
    }
    let min = h.iter().copied().fold(f64::INFINITY, f64::min);
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ci = martingale_ci(traj.n, traj.config.window, alpha)?;
    let adf = adf_test(&h, Regression::ConstantTrend).ok();
    if adf.is_none() {
        flags.push(StatFlag::AdfUnavailable);
    }
    Ok(SummaryStats {
        n_obs: h.len(),
        mean,
        min,
        max,
        std,
        skewness,
        kurtosis,
        alpha,
        ci,
        adf,
        flags,
    })
}

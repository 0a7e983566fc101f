//! Seeded generators for every synthetic process used by the crate.
//!
//! All generators work on a unit grid: one sample is one period. Paths are
//! bit-reproducible per `(generator, parameters, seed)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, StreamRng};
use crate::series::{SeriesRole, TimeSeries};
use crate::specfun::{self, HurstValue, SpecfunError, HURST_EPS};

/// Smallest sample count any generator accepts.
pub const MIN_SAMPLES: usize = 64;

/// Past cells simulated before `t = 0`, as a multiple of the path length.
pub const MPRE_HORIZON_FACTOR: usize = 8;

/// Largest covariance matrix the dense fallback will factor.
pub const MAX_DENSE_SAMPLES: usize = 4096;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("sample count {0} is below the minimum of {MIN_SAMPLES}")]
    TooShort(usize),
    #[error(transparent)]
    Hurst(#[from] SpecfunError),
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("AR(1) coefficient must satisfy |phi| < 1, got {0}")]
    NonStationaryAr(f64),
    #[error("step-memory paths need an even sample count, got {0}")]
    OddLength(usize),
    #[error("circulant embedding failed and {n} samples exceed the dense fallback limit of {MAX_DENSE_SAMPLES}")]
    SynthesisFailed { n: usize },
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), SynthError> {
    if cond {
        Ok(())
    } else {
        Err(SynthError::InvalidParameter(msg()))
    }
}

fn require_len(n: usize) -> Result<(), SynthError> {
    if n < MIN_SAMPLES {
        Err(SynthError::TooShort(n))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Fractional Gaussian noise
// ---------------------------------------------------------------------------

/// How the fGn variance is normalised.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `γ(0) = ν²·V_H`, the increments of the kernel-normalised fBm.
    #[default]
    KernelVh,
    /// `γ(0) = ν²`.
    Unit,
}

/// Autocovariance model of fractional Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnCovariance {
    pub h: HurstValue,
    pub scale: f64,
    pub normalization: Normalization,
}

impl FgnCovariance {
    pub fn new(
        h: HurstValue,
        scale: f64,
        normalization: Normalization,
    ) -> Result<Self, SynthError> {
        require(scale.is_finite() && scale > 0.0, || {
            format!("fGn scale must be positive, got {scale}")
        })?;
        Ok(Self {
            h,
            scale,
            normalization,
        })
    }

    /// Unit-variance fGn.
    pub fn unit(h: HurstValue) -> Self {
        Self {
            h,
            scale: 1.0,
            normalization: Normalization::Unit,
        }
    }

    /// `γ(0)`.
    pub fn variance(&self) -> f64 {
        let c = match self.normalization {
            Normalization::KernelVh => specfun::v_h(self.h),
            Normalization::Unit => 1.0,
        };
        self.scale * self.scale * c
    }

    fn stream_params(&self, count: usize) -> [f64; 4] {
        let norm = match self.normalization {
            Normalization::KernelVh => 0.0,
            Normalization::Unit => 1.0,
        };
        [self.h.get(), self.scale, norm, count as f64]
    }
}

/// `γ(Δ) = ν² c(h) · ½(|Δ+1|^{2h} - 2|Δ|^{2h} + |Δ-1|^{2h})`.
pub fn fgn_autocov(cov: &FgnCovariance, lag: usize) -> f64 {
    let two_h = 2.0 * cov.h.get();
    let k = lag as f64;
    let shape = 0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h));
    cov.variance() * shape
}

/// Exact sampler used for fGn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FgnMethod {
    /// Circulant embedding with automatic dense fallback.
    CirculantEmbedding,
    /// Dense Cholesky factor of the Toeplitz covariance.
    Cholesky,
}

fn circulant_fgn(cov: &FgnCovariance, count: usize, rng: &mut StreamRng) -> Option<Vec<f64>> {
    let mut half = count.next_power_of_two().max(2);
    let mut planner = FftPlanner::<f64>::new();
    for _ in 0..4 {
        let size = 2 * half;
        let mut spectrum: Vec<Complex<f64>> = (0..size)
            .map(|k| {
                let lag = if k <= half { k } else { size - k };
                Complex::new(fgn_autocov(cov, lag), 0.0)
            })
            .collect();
        let fft = planner.plan_fft_forward(size);
        fft.process(&mut spectrum);
        let max = spectrum.iter().map(|c| c.re).fold(0.0, f64::max);
        if spectrum.iter().any(|c| c.re < -1e-10 * max) {
            half *= 2;
            continue;
        }
        let mut buf: Vec<Complex<f64>> = spectrum
            .iter()
            .map(|lambda| {
                let amp = (lambda.re.max(0.0) / size as f64).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(amp * re, amp * im)
            })
            .collect();
        fft.process(&mut buf);
        return Some(buf[..count].iter().map(|c| c.re).collect());
    }
    None
}

fn cholesky_fgn(cov: &FgnCovariance, count: usize, rng: &mut StreamRng) -> Option<Vec<f64>> {
    if count > MAX_DENSE_SAMPLES {
        return None;
    }
    let gamma: Vec<f64> = (0..count).map(|k| fgn_autocov(cov, k)).collect();
    let matrix = DMatrix::from_fn(count, count, |i, j| gamma[i.abs_diff(j)]);
    let chol = matrix.cholesky()?;
    let z = DVector::from_fn(count, |_, _| rng.sample::<f64, _>(StandardNormal));
    Some((chol.l() * z).iter().copied().collect())
}

fn fgn_from_rng(
    cov: &FgnCovariance,
    count: usize,
    rng: &mut StreamRng,
    method: FgnMethod,
) -> Result<Vec<f64>, SynthError> {
    let out = match method {
        FgnMethod::CirculantEmbedding => {
            circulant_fgn(cov, count, rng).or_else(|| cholesky_fgn(cov, count, rng))
        }
        FgnMethod::Cholesky => cholesky_fgn(cov, count, rng),
    };
    out.ok_or(SynthError::SynthesisFailed { n: count })
}

/// `count` samples of stationary fGn.
pub fn synth_fgn(cov: &FgnCovariance, count: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
    synth_fgn_with(cov, count, seed, FgnMethod::CirculantEmbedding)
}

pub fn synth_fgn_with(
    cov: &FgnCovariance,
    count: usize,
    seed: u64,
    method: FgnMethod,
) -> Result<Vec<f64>, SynthError> {
    require_len(count)?;
    let mut rng = rng::stream(seed, "fgn", &cov.stream_params(count));
    fgn_from_rng(cov, count, &mut rng, method)
}

/// fBm path of `n` points starting at 0; the increments are exact fGn.
pub fn synth_fbm(cov: &FgnCovariance, n: usize, seed: u64) -> Result<TimeSeries, SynthError> {
    require_len(n)?;
    let mut rng = rng::stream(seed, "fbm", &cov.stream_params(n));
    let incs = fgn_from_rng(cov, n - 1, &mut rng, FgnMethod::CirculantEmbedding)?;
    Ok(TimeSeries::new(
        SeriesRole::LogPrice,
        cumulative_from_zero(&incs),
    ))
}

fn cumulative_from_zero(incs: &[f64]) -> Vec<f64> {
    let mut path = Vec::with_capacity(incs.len() + 1);
    let mut level = 0.0;
    path.push(level);
    for d in incs {
        level += d;
        path.push(level);
    }
    path
}

// ---------------------------------------------------------------------------
// Hurst paths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HPathSource {
    Constant,
    Step,
    Fou,
    User,
}

/// One Hurst exponent per sample instant, each in `[ε, 1-ε]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPath {
    values: Vec<f64>,
    source: HPathSource,
}

impl HPath {
    pub fn new(values: Vec<f64>, source: HPathSource) -> Result<Self, SynthError> {
        for &h in &values {
            HurstValue::new(h)?;
        }
        Ok(Self { values, source })
    }

    pub fn constant(h: HurstValue, n: usize) -> Self {
        Self {
            values: vec![h.get(); n],
            source: HPathSource::Constant,
        }
    }

    /// `h1` on the first half, `h2` on the second.
    pub fn step(h1: HurstValue, h2: HurstValue, n: usize) -> Result<Self, SynthError> {
        if !n.is_multiple_of(2) {
            return Err(SynthError::OddLength(n));
        }
        let mut values = vec![h1.get(); n / 2];
        values.resize(n, h2.get());
        Ok(Self {
            values,
            source: HPathSource::Step,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> HPathSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_series(&self) -> TimeSeries {
        TimeSeries::new(SeriesRole::Hurst, self.values.clone())
    }
}

/// Euler–Maruyama path of `dH = -λ(H - ½)dt + ν_H dB^{h_drv}` started at `½`,
/// clipped to `[ε, 1-ε]`.
pub fn synth_fou_h(
    lambda: f64,
    nu_h: f64,
    h_drv: HurstValue,
    n: usize,
    seed: u64,
) -> Result<HPath, SynthError> {
    require_len(n)?;
    require(lambda.is_finite() && lambda > 0.0, || {
        format!("mean-reversion rate must be positive, got {lambda}")
    })?;
    require(nu_h.is_finite() && nu_h >= 0.0, || {
        format!("vol-of-H must be non-negative, got {nu_h}")
    })?;
    let mut rng = rng::stream(seed, "fou_h", &[lambda, nu_h, h_drv.get(), n as f64]);
    let drive = fgn_from_rng(
        &FgnCovariance::unit(h_drv),
        n - 1,
        &mut rng,
        FgnMethod::CirculantEmbedding,
    )?;
    let mut h = 0.5;
    let mut values = Vec::with_capacity(n);
    values.push(h);
    for d in drive {
        h = (h - lambda * (h - 0.5) + nu_h * d).clamp(HURST_EPS, 1.0 - HURST_EPS);
        values.push(h);
    }
    Ok(HPath {
        values,
        source: HPathSource::Fou,
    })
}

// ---------------------------------------------------------------------------
// Multifractional process with random exponent
// ---------------------------------------------------------------------------

/// Average of `u^α` over the kernel cell `[k-1, k]`, `k ≥ 2`.
fn cell_kernel(k: usize, alpha: f64) -> f64 {
    let k = k as f64;
    let p = alpha + 1.0;
    // k^p - (k-1)^p without cancellation
    -k.powf(p) * (p * (-1.0 / k).ln_1p()).exp_m1() / p
}

/// Gaussian inputs of one unit cell `(j, j+1]`: the Brownian increment `ξ`
/// and `W = ∫ (j+1-s)^α dB(s)` over the same cell.
fn cell_noise(alpha: f64, rng: &mut StreamRng) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let c = 1.0 / (alpha + 1.0);
    let d = (1.0 / (2.0 * alpha + 1.0) - c * c).max(0.0).sqrt();
    (z1, c * z1 + d * z2)
}

/// Chebyshev interpolation nodes in `α` plus barycentric weights.
struct AlphaInterpolant {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl AlphaInterpolant {
    fn new(lo: f64, hi: f64, max_lag: usize) -> Self {
        let width = hi - lo;
        if width < 1e-12 {
            return Self {
                nodes: vec![lo],
                weights: vec![1.0],
            };
        }
        // Interpolation error bound for u ↦ u^α averaged over a cell, relative
        // to the largest kernel value: 2 (w ln K / 4)^p / p! · K^w.
        let log_k = (max_lag as f64).ln();
        let x = width * log_k / 4.0;
        let mut count = 1usize;
        let mut term = 2.0 * x * (width * log_k).exp();
        while term > 1e-13 && count < 96 {
            count += 1;
            term *= x / count as f64;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * width;
        let (nodes, weights) = (0..count)
            .map(|i| {
                let theta = (2 * i + 1) as f64 * PI / (2 * count) as f64;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                (mid + half * theta.cos(), sign * theta.sin())
            })
            .unzip();
        Self { nodes, weights }
    }

    /// Lagrange basis values `L_i(α)` for all nodes.
    fn basis(&self, alpha: f64, out: &mut [f64]) {
        if self.nodes.len() == 1 {
            out[0] = 1.0;
            return;
        }
        if let Some(hit) = self.nodes.iter().position(|&x| x == alpha) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[hit] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &x), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *o = w / (alpha - x);
            denom += *o;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }
}

/// Discretised inputs of the moving-average representation.
struct MpreCells {
    horizon: usize,
    alpha: Vec<f64>,
    /// `ν·ξ` per cell.
    xi: Vec<f64>,
    /// `ν·W` per cell.
    w: Vec<f64>,
}

impl MpreCells {
    fn draw(hpath: &[f64], scale: &[f64], rng: &mut StreamRng) -> Self {
        let n = hpath.len();
        let horizon = MPRE_HORIZON_FACTOR * n;
        let cells = horizon + n - 1;
        let mut alpha = Vec::with_capacity(cells);
        let mut xi = Vec::with_capacity(cells);
        let mut w = Vec::with_capacity(cells);
        for c in 0..cells {
            // cells before t = 0 reuse the first instant's exponent and scale
            let idx = c.saturating_sub(horizon);
            let a = hpath[idx] - 0.5;
            let (x, v) = cell_noise(a, rng);
            alpha.push(a);
            xi.push(scale[idx] * x);
            w.push(scale[idx] * v);
        }
        Self {
            horizon,
            alpha,
            xi,
            w,
        }
    }

    /// `Y(t)` for `t = 0..n` via per-node FFT convolutions.
    fn assemble(&self, n: usize) -> Vec<f64> {
        let cells = self.alpha.len();
        let max_lag = self.horizon + n;
        let fft_len = (cells + max_lag + 1).next_power_of_two();
        let (lo, hi) = self
            .alpha
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| {
                (l.min(a), h.max(a))
            });
        let interp = AlphaInterpolant::new(lo, hi, max_lag);
        let m = interp.nodes.len();

        let mut basis = vec![0.0; cells * m];
        for (c, &a) in self.alpha.iter().enumerate() {
            interp.basis(a, &mut basis[c * m..(c + 1) * m]);
        }

        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let zero = Complex::new(0.0, 0.0);
        let mut acc = vec![zero; fft_len];
        let mut signal = vec![zero; fft_len];
        let mut kernel = vec![zero; fft_len];
        for (i, &node) in interp.nodes.iter().enumerate() {
            signal.iter_mut().for_each(|v| *v = zero);
            for c in 0..cells {
                signal[c] = Complex::new(self.xi[c] * basis[c * m + i], 0.0);
            }
            kernel.iter_mut().for_each(|v| *v = zero);
            for (k, slot) in kernel.iter_mut().enumerate().take(max_lag + 1).skip(2) {
                *slot = Complex::new(cell_kernel(k, node), 0.0);
            }
            forward.process(&mut signal);
            forward.process(&mut kernel);
            for ((a, s), k) in acc.iter_mut().zip(&signal).zip(&kernel) {
                *a += s * k;
            }
        }
        inverse.process(&mut acc);
        let norm = 1.0 / fft_len as f64;
        (0..n)
            .map(|t| {
                let p = t + self.horizon;
                acc[p].re * norm + self.w[p - 1]
            })
            .collect()
    }

    #[cfg(test)]
    fn assemble_direct(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|t| {
                let p = t + self.horizon;
                let far: f64 = (0..p - 1)
                    .map(|c| self.xi[c] * cell_kernel(p - c, self.alpha[c]))
                    .sum();
                self.w[p - 1] + far
            })
            .collect()
    }
}

fn mpre_stream(hpath: &HPath, scale: &[f64], seed: u64) -> StreamRng {
    let mut params = Vec::with_capacity(2 * hpath.len() + 1);
    params.push(hpath.len() as f64);
    params.extend_from_slice(hpath.values());
    params.extend_from_slice(scale);
    rng::stream(seed, "mpre", &params)
}

fn check_mpre_inputs(hpath: &HPath, scale: &[f64]) -> Result<(), SynthError> {
    require_len(hpath.len())?;
    if scale.len() != hpath.len() {
        return Err(SynthError::LengthMismatch {
            what: "scale sequence",
            got: scale.len(),
            expected: hpath.len(),
        });
    }
    require(scale.iter().all(|v| v.is_finite() && *v >= 0.0), || {
        "scale sequence must be finite and non-negative".into()
    })
}

/// Multifractional process with random exponent,
/// `K(t) = ∫ ν(s)[(t-s)_+^{H(s)-½} - (-s)_+^{H(s)-½}] dB(s)`, on a unit grid.
///
/// Each unit cell of the Brownian driver contributes the exact Gaussian
/// integral of the kernel over its nearest cell and the cell-averaged kernel
/// beyond it. The past is truncated `8n` cells before `t = 0`, where the
/// exponent and scale are held at their first values.
pub fn synth_mpre(hpath: &HPath, scale: &[f64], seed: u64) -> Result<TimeSeries, SynthError> {
    check_mpre_inputs(hpath, scale)?;
    let n = hpath.len();
    let mut rng = mpre_stream(hpath, scale, seed);
    let cells = MpreCells::draw(hpath.values(), scale, &mut rng);
    let y = cells.assemble(n);
    let origin = y[0];
    Ok(TimeSeries::new(
        SeriesRole::LogPrice,
        y.into_iter().map(|v| v - origin).collect(),
    ))
}

/// Scale sequence `ν(s) = N^{-H(s)} / Γ(H(s)+½)`.
///
/// With it the unit-lag increments of [`synth_mpre`] have local standard
/// deviation `√V_H · N^{-H}`: the process observed at `N` points of `[0, 1]`.
pub fn unit_interval_scale(hpath: &HPath) -> Vec<f64> {
    let n = hpath.len() as f64;
    hpath
        .values()
        .iter()
        .map(|&h| n.powf(-h) / specfun::gamma(h + 0.5))
        .collect()
}

/// Two-level memory function and the matching MPRE path (unit scale).
pub fn synth_step_memory(
    h1: HurstValue,
    h2: HurstValue,
    n: usize,
    seed: u64,
) -> Result<(HPath, TimeSeries), SynthError> {
    let hpath = HPath::step(h1, h2, n)?;
    let series = synth_mpre(&hpath, &vec![1.0; n], seed)?;
    Ok((hpath, series))
}

// ---------------------------------------------------------------------------
// Return series for the equal-volatility demonstration
// ---------------------------------------------------------------------------

/// Stationary AR(1) returns with unconditional standard deviation `sigma`.
pub fn synth_ar1(phi: f64, sigma: f64, n: usize, seed: u64) -> Result<TimeSeries, SynthError> {
    require_len(n)?;
    if !(phi.is_finite() && phi.abs() < 1.0) {
        return Err(SynthError::NonStationaryAr(phi));
    }
    require(sigma.is_finite() && sigma > 0.0, || {
        format!("sigma must be positive, got {sigma}")
    })?;
    let mut rng = rng::stream(seed, "ar1", &[phi, sigma, n as f64]);
    let innovation = sigma * (1.0 - phi * phi).sqrt();
    let mut x = sigma * rng.sample::<f64, _>(StandardNormal);
    let mut values = Vec::with_capacity(n);
    values.push(x);
    for _ in 1..n {
        x = phi * x + innovation * rng.sample::<f64, _>(StandardNormal);
        values.push(x);
    }
    Ok(TimeSeries::new(SeriesRole::Return, values))
}

/// IID Gaussian returns with standard deviation `sigma`.
pub fn synth_iid(sigma: f64, n: usize, seed: u64) -> Result<TimeSeries, SynthError> {
    require_len(n)?;
    require(sigma.is_finite() && sigma > 0.0, || {
        format!("sigma must be positive, got {sigma}")
    })?;
    let mut rng = rng::stream(seed, "iid", &[sigma, n as f64]);
    let values = (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(TimeSeries::new(SeriesRole::Return, values))
}

// ---------------------------------------------------------------------------
// Declarative synthesis requests
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Fbm,
    Fgn,
    Mpre,
    FouH,
    Ar1,
    Iid,
    StepMemory,
}

/// Exponent dynamics for an MPRE request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HurstDriver {
    Constant { hurst: f64 },
    Fou { lambda: f64, nu_h: f64, h_drv: f64 },
}

/// Scale sequence for an MPRE request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MpreScale {
    Constant {
        nu: f64,
    },
    /// See [`unit_interval_scale`].
    UnitInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthParams {
    Fbm {
        hurst: f64,
        scale: f64,
        normalization: Normalization,
    },
    Fgn {
        hurst: f64,
        scale: f64,
        normalization: Normalization,
    },
    Mpre {
        hurst: HurstDriver,
        scale: MpreScale,
    },
    FouH {
        lambda: f64,
        nu_h: f64,
        h_drv: f64,
    },
    Ar1 {
        phi: f64,
        sigma: f64,
    },
    Iid {
        sigma: f64,
    },
    StepMemory {
        h1: f64,
        h2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub n: usize,
    pub seed: u64,
    pub params: SynthParams,
}

/// A generated path, plus the exponent path when the generator has one.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub series: TimeSeries,
    pub hpath: Option<HPath>,
}

impl SynthesisSpec {
    pub fn kind(&self) -> SynthKind {
        match self.params {
            SynthParams::Fbm { .. } => SynthKind::Fbm,
            SynthParams::Fgn { .. } => SynthKind::Fgn,
            SynthParams::Mpre { .. } => SynthKind::Mpre,
            SynthParams::FouH { .. } => SynthKind::FouH,
            SynthParams::Ar1 { .. } => SynthKind::Ar1,
            SynthParams::Iid { .. } => SynthKind::Iid,
            SynthParams::StepMemory { .. } => SynthKind::StepMemory,
        }
    }

    pub fn generate(&self) -> Result<SynthOutput, SynthError> {
        let (n, seed) = (self.n, self.seed);
        let plain = |series| SynthOutput {
            series,
            hpath: None,
        };
        match self.params {
            SynthParams::Fbm {
                hurst,
                scale,
                normalization,
            } => {
                let cov = FgnCovariance::new(HurstValue::new(hurst)?, scale, normalization)?;
                synth_fbm(&cov, n, seed).map(plain)
            }
            SynthParams::Fgn {
                hurst,
                scale,
                normalization,
            } => {
                let cov = FgnCovariance::new(HurstValue::new(hurst)?, scale, normalization)?;
                let values = synth_fgn(&cov, n, seed)?;
                Ok(plain(TimeSeries::new(SeriesRole::Return, values)))
            }
            SynthParams::Mpre { hurst, scale } => {
                let hpath = match hurst {
                    HurstDriver::Constant { hurst } => HPath::constant(HurstValue::new(hurst)?, n),
                    HurstDriver::Fou {
                        lambda,
                        nu_h,
                        h_drv,
                    } => synth_fou_h(lambda, nu_h, HurstValue::new(h_drv)?, n, seed)?,
                };
                let nu = match scale {
                    MpreScale::Constant { nu } => {
                        require(nu.is_finite() && nu > 0.0, || {
                            format!("MPRE scale must be positive, got {nu}")
                        })?;
                        vec![nu; n]
                    }
                    MpreScale::UnitInterval => unit_interval_scale(&hpath),
                };
                let series = synth_mpre(&hpath, &nu, seed)?;
                Ok(SynthOutput {
                    series,
                    hpath: Some(hpath),
                })
            }
            SynthParams::FouH {
                lambda,
                nu_h,
                h_drv,
            } => {
                let hpath = synth_fou_h(lambda, nu_h, HurstValue::new(h_drv)?, n, seed)?;
                Ok(SynthOutput {
                    series: hpath.to_series(),
                    hpath: Some(hpath),
                })
            }
            SynthParams::Ar1 { phi, sigma } => synth_ar1(phi, sigma, n, seed).map(plain),
            SynthParams::Iid { sigma } => synth_iid(sigma, n, seed).map(plain),
            SynthParams::StepMemory { h1, h2 } => {
                let (hpath, series) =
                    synth_step_memory(HurstValue::new(h1)?, HurstValue::new(h2)?, n, seed)?;
                Ok(SynthOutput {
                    series,
                    hpath: Some(hpath),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(h: f64) -> HurstValue {
        HurstValue::new(h).unwrap()
    }

    #[test]
    fn autocov_examples() {
        let bm = FgnCovariance::new(HurstValue::HALF, 1.0, Normalization::KernelVh).unwrap();
        assert!(fgn_autocov(&bm, 3).abs() < 1e-15);
        assert!((fgn_autocov(&bm, 0) - 1.0).abs() < 1e-14);
        let unit = FgnCovariance::unit(hv(0.7));
        let expected = 0.5 * (2f64.powf(1.4) - 2.0);
        assert!((fgn_autocov(&unit, 1) - expected).abs() < 1e-15);
        assert!((expected - 0.3195).abs() < 1e-4);
    }

    #[test]
    fn kernel_vh_variance() {
        let cov = FgnCovariance::new(hv(0.3), 2.0, Normalization::KernelVh).unwrap();
        assert!((fgn_autocov(&cov, 0) - 4.0 * specfun::v_h(hv(0.3))).abs() < 1e-14);
    }

    #[test]
    fn cell_kernel_matches_closed_form() {
        for &a in &[-0.45, -0.2, 0.0, 0.3, 0.45] {
            for &k in &[2usize, 3, 10, 1000, 100_000] {
                let kf = k as f64;
                let direct = (kf.powf(a + 1.0) - (kf - 1.0).powf(a + 1.0)) / (a + 1.0);
                assert!(
                    ((cell_kernel(k, a) - direct) / direct).abs() < 1e-9,
                    "{a} {k}"
                );
            }
        }
        assert!((cell_kernel(7, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cell_noise_at_half_is_brownian() {
        let mut rng = rng::stream(1, "t", &[]);
        for _ in 0..10 {
            let (xi, w) = cell_noise(0.0, &mut rng);
            assert_eq!(xi, w);
        }
    }

    #[test]
    fn interpolated_assembly_matches_direct_sum() {
        let n = 64;
        let values: Vec<f64> = (0..n)
            .map(|i| 0.5 + 0.35 * (i as f64 / 9.0).sin())
            .collect();
        let hpath = HPath::new(values, HPathSource::User).unwrap();
        let scale: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * i as f64).collect();
        let mut rng = mpre_stream(&hpath, &scale, 5);
        let cells = MpreCells::draw(hpath.values(), &scale, &mut rng);
        let fast = cells.assemble(n);
        let slow = cells.assemble_direct(n);
        let span = slow.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-9 * span.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn constant_half_mpre_is_random_walk() {
        let n = 256;
        let hpath = HPath::constant(HurstValue::HALF, n);
        let mut rng = mpre_stream(&hpath, &vec![1.0; n], 9);
        let cells = MpreCells::draw(hpath.values(), &vec![1.0; n], &mut rng);
        let y = cells.assemble(n);
        let horizon = cells.horizon;
        for t in 1..n {
            let xi = cells.xi[t + horizon - 1];
            assert!((y[t] - y[t - 1] - xi).abs() < 1e-9);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cov = FgnCovariance::new(hv(0.3), 1.0, Normalization::KernelVh).unwrap();
        assert_eq!(
            synth_fbm(&cov, 512, 4).unwrap(),
            synth_fbm(&cov, 512, 4).unwrap()
        );
        let hp = HPath::step(hv(0.4), hv(0.6), 128).unwrap();
        let ones = vec![1.0; 128];
        assert_eq!(
            synth_mpre(&hp, &ones, 2).unwrap(),
            synth_mpre(&hp, &ones, 2).unwrap()
        );
        assert_eq!(
            synth_fou_h(0.1, 0.02, HurstValue::HALF, 128, 3).unwrap(),
            synth_fou_h(0.1, 0.02, HurstValue::HALF, 128, 3).unwrap()
        );
    }

    #[test]
    fn kinds_use_distinct_streams() {
        let iid = synth_iid(1.0, 128, 42).unwrap();
        let ar = synth_ar1(0.0, 1.0, 128, 42).unwrap();
        assert_ne!(iid.values, ar.values);
    }

    #[test]
    fn cholesky_fallback_agrees_in_distribution() {
        let cov = FgnCovariance::unit(hv(0.7));
        let x = synth_fgn_with(&cov, 2048, 1, FgnMethod::Cholesky).unwrap();
        let m2 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((m2 - 1.0).abs() < 0.25);
        assert!(matches!(
            synth_fgn_with(&cov, MAX_DENSE_SAMPLES + 1, 1, FgnMethod::Cholesky),
            Err(SynthError::SynthesisFailed { .. })
        ));
    }

    #[test]
    fn input_validation() {
        let cov = FgnCovariance::unit(HurstValue::HALF);
        assert!(matches!(
            synth_fbm(&cov, 10, 1),
            Err(SynthError::TooShort(10))
        ));
        assert!(matches!(
            synth_ar1(1.0, 1.0, 100, 1),
            Err(SynthError::NonStationaryAr(_))
        ));
        assert!(matches!(
            synth_step_memory(hv(0.4), hv(0.6), 101, 1),
            Err(SynthError::OddLength(101))
        ));
        let hp = HPath::constant(HurstValue::HALF, 100);
        assert!(matches!(
            synth_mpre(&hp, &[1.0; 99], 1),
            Err(SynthError::LengthMismatch { .. })
        ));
        assert!(HPath::new(vec![0.5, 1.2], HPathSource::User).is_err());
        assert!(synth_fou_h(0.0, 0.1, HurstValue::HALF, 100, 1).is_err());
    }

    #[test]
    fn fou_without_noise_stays_at_half() {
        let hp = synth_fou_h(0.05, 0.0, HurstValue::HALF, 256, 1).unwrap();
        assert!(hp.values().iter().all(|&h| h == 0.5));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = SynthesisSpec {
            n: 128,
            seed: 3,
            params: SynthParams::Mpre {
                hurst: HurstDriver::Fou {
                    lambda: 0.05,
                    nu_h: 0.01,
                    h_drv: 0.5,
                },
                scale: MpreScale::UnitInterval,
            },
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: SynthesisSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        assert_eq!(back.kind(), SynthKind::Mpre);
        assert_eq!(spec.generate().unwrap(), back.generate().unwrap());
    }
}

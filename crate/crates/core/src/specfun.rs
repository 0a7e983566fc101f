//! Gamma-function quantities behind the fBm unit-lag variance law.
//!
//! `V_H` is the variance of unit-lag increments of the kernel-normalised
//! fBm, `A(H) = Γ(H+½)²·V_H` the covariance constant of the multifractional
//! process with random exponent, and `E(H)` the same quantity written in the
//! form that stays well conditioned near `H = 1`.

use std::f64::consts::{LN_2, PI};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::rng;

/// Half-width of the excluded band at each end of the unit interval.
pub const HURST_EPS: f64 = 1e-6;

/// Distance from `½` inside which the two singular `V_H` forms are refused.
const SINGULAR_BAND: f64 = 1e-9;

/// Smallest Monte-Carlo sample accepted by [`expected_e_h_montecarlo`].
pub const MIN_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("Hurst value {0} lies outside the open unit interval (eps = 1e-6)")]
    Domain(f64),
    #[error("closed form {form:?} is singular at h = {h}")]
    Singular { form: VhForm, h: f64 },
    #[error("the Taylor expansion of E(H) is only derived around mean 1/2, got {0}")]
    UnsupportedMean(f64),
    #[error("variance of the Hurst law must be positive and finite, got {0}")]
    NonPositiveVariance(f64),
    #[error("Monte-Carlo estimate needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("every Monte-Carlo draw fell outside the unit interval")]
    AllDrawsRejected,
}

/// A Hurst exponent inside `[ε, 1-ε]` with `ε = 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstValue(f64);

impl HurstValue {
    pub const HALF: HurstValue = HurstValue(0.5);

    pub fn new(h: f64) -> Result<Self, SpecfunError> {
        if h.is_finite() && (HURST_EPS..=1.0 - HURST_EPS).contains(&h) {
            Ok(Self(h))
        } else {
            Err(SpecfunError::Domain(h))
        }
    }

    /// Clamps any finite value into the admissible band.
    pub fn clamped(h: f64) -> Self {
        Self(h.clamp(HURST_EPS, 1.0 - HURST_EPS))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HurstValue {
    type Error = SpecfunError;
    fn try_from(h: f64) -> Result<Self, Self::Error> {
        Self::new(h)
    }
}

impl From<HurstValue> for f64 {
    fn from(h: HurstValue) -> f64 {
        h.0
    }
}

/// Gaussian law for the Hurst exponent, `H ~ N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianHurstLaw {
    mean: f64,
    variance: f64,
}

impl GaussianHurstLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self, SpecfunError> {
        if !(mean.is_finite() && mean > 0.0 && mean < 1.0) {
            return Err(SpecfunError::Domain(mean));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(SpecfunError::NonPositiveVariance(variance));
        }
        Ok(Self { mean, variance })
    }

    /// The law centred at the martingale value `½`.
    pub fn centered(variance: f64) -> Result<Self, SpecfunError> {
        Self::new(0.5, variance)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// The equivalent closed forms of `V_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VhForm {
    /// `Γ(h)Γ(1-h) / (π Γ(1+2h))`, smooth across `½`.
    CanonicalA,
    /// `Γ(1-2h) cos(πh) / (πh)`, pole times zero at `½`.
    GammaPoleBase,
    /// `Γ(2-2h) cos(πh) / (πh(1-2h))`, zero over zero at `½`.
    FormB,
    /// `1 / (2h sin(πh) Γ(2h))`, equal to `A(h)/Γ(h+½)²`.
    FormCAh,
}

impl VhForm {
    pub const ALL: [VhForm; 4] = [
        VhForm::CanonicalA,
        VhForm::GammaPoleBase,
        VhForm::FormB,
        VhForm::FormCAh,
    ];

    pub fn is_singular_at_half(self) -> bool {
        matches!(self, VhForm::GammaPoleBase | VhForm::FormB)
    }
}

// ---------------------------------------------------------------------------
// Gamma, digamma, trigamma
// ---------------------------------------------------------------------------

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms) with
/// reflection below `½`. Non-positive integers return a non-finite value.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        let series = LANCZOS_COEF[1..]
            .iter()
            .enumerate()
            .fold(LANCZOS_COEF[0], |acc, (i, c)| {
                acc + c / (x + (i + 1) as f64)
            });
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * series
    }
}

const ASYMPTOTIC_SHIFT: f64 = 10.0;

/// Digamma `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < ASYMPTOTIC_SHIFT {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: -1/12, 1/120, -1/252, 1/240, -1/132, 691/32760
    let tail = inv2
        * (-1.0 / 12.0
            + inv2
                * (1.0 / 120.0
                    + inv2
                        * (-1.0 / 252.0
                            + inv2
                                * (1.0 / 240.0 + inv2 * (-1.0 / 132.0 + inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 / x + tail
}

/// Trigamma `ψ'(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < ASYMPTOTIC_SHIFT {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv2
        * inv
        * (1.0 / 6.0
            + inv2
                * (-1.0 / 30.0
                    + inv2
                        * (1.0 / 42.0
                            + inv2
                                * (-1.0 / 30.0 + inv2 * (5.0 / 66.0 + inv2 * -691.0 / 2730.0)))));
    acc + inv + 0.5 * inv2 + tail
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

// ---------------------------------------------------------------------------
// V_H, A(H), E(H)
// ---------------------------------------------------------------------------

/// Unit-lag increment variance of the kernel-normalised fBm, evaluated with
/// the form that has no singularity at `½`.
pub fn v_h(h: HurstValue) -> f64 {
    let h = h.get();
    gamma(h) * gamma(1.0 - h) / (PI * gamma(1.0 + 2.0 * h))
}

/// Evaluates one specific closed form of `V_H`.
pub fn v_h_form(h: HurstValue, form: VhForm) -> Result<f64, SpecfunError> {
    let x = h.get();
    if form.is_singular_at_half() && (x - 0.5).abs() < SINGULAR_BAND {
        return Err(SpecfunError::Singular { form, h: x });
    }
    let value = match form {
        VhForm::CanonicalA => v_h(h),
        VhForm::GammaPoleBase => gamma(1.0 - 2.0 * x) * (PI * x).cos() / (PI * x),
        VhForm::FormB => gamma(2.0 - 2.0 * x) * (PI * x).cos() / (PI * x * (1.0 - 2.0 * x)),
        VhForm::FormCAh => 1.0 / (2.0 * x * (PI * x).sin() * gamma(2.0 * x)),
    };
    Ok(value)
}

/// `A(H) = Γ(H+½)² · V_H`.
pub fn a_h(h: HurstValue) -> f64 {
    let g = gamma(h.get() + 0.5);
    g * g * v_h(h)
}

/// `E(H) = 2^{1-4H} π Γ(2H) / (H Γ(H)² sin(πH))`; equals [`a_h`].
pub fn e_h(h: HurstValue) -> f64 {
    let h = h.get();
    let g = gamma(h);
    (1.0 - 4.0 * h).exp2() * PI * gamma(2.0 * h) / (h * g * g * (PI * h).sin())
}

/// Logarithmic derivative `E'(H)/E(H)`.
fn e_h_log_derivative(h: f64) -> f64 {
    -4.0 * LN_2 + 2.0 * digamma(2.0 * h) - 1.0 / h - 2.0 * digamma(h) - PI / (PI * h).tan()
}

/// Derivative of [`e_h_log_derivative`].
fn e_h_log_derivative_prime(h: f64) -> f64 {
    let csc = 1.0 / (PI * h).sin();
    4.0 * trigamma(2.0 * h) + 1.0 / (h * h) - 2.0 * trigamma(h) + PI * PI * csc * csc
}

/// `(E(½), E'(½), E''(½))` from the digamma/trigamma expressions of the
/// logarithmic derivative. Exact values are `(1, -2, 8 + 2π²/3)`.
pub fn e_h_derivatives_at_half() -> (f64, f64, f64) {
    let h = 0.5;
    let e = e_h(HurstValue::HALF);
    let l = e_h_log_derivative(h);
    let first = e * l;
    let second = first * l + e * e_h_log_derivative_prime(h);
    debug_assert!({
        let (fd1, fd2) = e_h_finite_differences(1e-5);
        (fd1 - first).abs() <= 1e-4 && (fd2 - second).abs() <= 1e-3
    });
    (e, first, second)
}

/// Central finite differences `(E'(½), E''(½))` of [`e_h`] with the given step.
pub fn e_h_finite_differences(step: f64) -> (f64, f64) {
    let at = |h: f64| e_h(HurstValue::clamped(h));
    let (lo, mid, hi) = (at(0.5 - step), at(0.5), at(0.5 + step));
    (
        (hi - lo) / (2.0 * step),
        (hi - 2.0 * mid + lo) / (step * step),
    )
}

/// Second-order Taylor approximation of `𝔼[E(H)]` for `H ~ N(½, σ²_H)`:
/// `1 + (4 + π²/3) σ²_H`.
pub fn expected_e_h_taylor(law: &GaussianHurstLaw) -> Result<f64, SpecfunError> {
    if law.mean() != 0.5 {
        return Err(SpecfunError::UnsupportedMean(law.mean()));
    }
    Ok(1.0 + (4.0 + PI * PI / 3.0) * law.variance())
}

/// `P[H ∉ (0,1)]` under the Gaussian law.
pub fn prob_outside_unit(law: &GaussianHurstLaw) -> f64 {
    let s = law.std_dev();
    normal_cdf(-law.mean() / s) + normal_cdf(-(1.0 - law.mean()) / s)
}

/// Result of the Monte-Carlo estimate of `𝔼[E(H)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMean {
    pub mean: f64,
    pub std_error: f64,
    pub accepted: usize,
    pub rejected: usize,
}

/// Monte-Carlo `𝔼[E(H)]`: draws outside `[ε, 1-ε]` are rejected, not clipped.
pub fn expected_e_h_montecarlo(
    law: &GaussianHurstLaw,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloMean, SpecfunError> {
    if samples < MIN_MC_SAMPLES {
        return Err(SpecfunError::TooFewSamples {
            min: MIN_MC_SAMPLES,
            got: samples,
        });
    }
    let normal = Normal::new(law.mean(), law.std_dev())
        .map_err(|_| SpecfunError::NonPositiveVariance(law.variance()))?;
    let mut rng = rng::stream(seed, "e_h_montecarlo", &[law.mean(), law.variance()]);
    let (mut sum, mut sum_sq, mut accepted) = (0.0, 0.0, 0usize);
    for _ in 0..samples {
        if let Ok(h) = HurstValue::new(normal.sample(&mut rng)) {
            let e = e_h(h);
            sum += e;
            sum_sq += e * e;
            accepted += 1;
        }
    }
    if accepted == 0 {
        return Err(SpecfunError::AllDrawsRejected);
    }
    let n = accepted as f64;
    let mean = sum / n;
    let var = if accepted > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloMean {
        mean,
        std_error: (var / n).sqrt(),
        accepted,
        rejected: samples - accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::{digamma as sr_digamma, gamma as sr_gamma};

    fn hv(h: f64) -> HurstValue {
        HurstValue::new(h).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_matches_independent_implementation() {
        let mut x = 0.001;
        while x <= 3.0 {
            assert!(rel(gamma(x), sr_gamma(x)) < 1e-12, "x = {x}");
            x += 0.001;
        }
        for x in [-0.9, -0.5, -0.1, -0.01] {
            assert!(rel(gamma(x), sr_gamma(x)) < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn digamma_known_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-13);
        assert!((digamma(0.5) + euler + 2.0 * LN_2).abs() < 1e-13);
        for x in [0.05, 0.3, 0.9, 1.7, 2.5, 7.0] {
            assert!((digamma(x) - sr_digamma(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn trigamma_known_values() {
        assert!((trigamma(1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((trigamma(0.5) - PI * PI / 2.0).abs() < 1e-13);
        // ψ'(x) - ψ'(x+1) = 1/x²
        for x in [0.1, 0.7, 2.3] {
            assert!((trigamma(x) - trigamma(x + 1.0) - 1.0 / (x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn hurst_value_domain() {
        assert!(HurstValue::new(0.0).is_err());
        assert!(HurstValue::new(1.0).is_err());
        assert!(HurstValue::new(5e-7).is_err());
        assert!(HurstValue::new(f64::NAN).is_err());
        assert!(HurstValue::new(1e-6).is_ok());
        assert_eq!(HurstValue::clamped(-3.0).get(), HURST_EPS);
    }

    #[test]
    fn v_h_at_half_is_one() {
        assert!((v_h(HurstValue::HALF) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn v_h_matches_independent_forms() {
        // Γ(1-2h)cos(πh)/(πh) and 1/(2h sin(πh) Γ(2h)) with statrs' gamma.
        let h = 0.3;
        let pole = sr_gamma(1.0 - 2.0 * h) * (PI * h).cos() / (PI * h);
        assert!(rel(v_h(hv(h)), pole) < 1e-12);
        let h = 0.7;
        let c = 1.0 / (2.0 * h * (PI * h).sin() * sr_gamma(2.0 * h));
        assert!(rel(v_h(hv(h)), c) < 1e-12);
    }

    #[test]
    fn v_h_form_examples() {
        let direct = 1.0 / (2.0 * 0.25 * (PI / 4.0).sin() * sr_gamma(0.5));
        assert!(rel(v_h_form(hv(0.25), VhForm::FormCAh).unwrap(), direct) < 1e-13);
        assert!(matches!(
            v_h_form(HurstValue::HALF, VhForm::GammaPoleBase),
            Err(SpecfunError::Singular { .. })
        ));
        assert!(matches!(
            v_h_form(HurstValue::HALF, VhForm::FormB),
            Err(SpecfunError::Singular { .. })
        ));
        assert!(v_h_form(HurstValue::HALF, VhForm::FormCAh).is_ok());
        assert!(rel(v_h_form(hv(0.4), VhForm::FormB).unwrap(), v_h(hv(0.4))) < 1e-10);
    }

    #[test]
    fn all_forms_agree_on_grid() {
        for i in 1..100 {
            let h = hv(i as f64 / 100.0);
            let reference = v_h(h);
            for form in VhForm::ALL {
                match v_h_form(h, form) {
                    Ok(v) => assert!(rel(v, reference) < 1e-10, "{form:?} at {h:?}"),
                    Err(_) => assert!(i == 50 && form.is_singular_at_half()),
                }
            }
        }
    }

    #[test]
    fn a_h_examples() {
        assert!((a_h(HurstValue::HALF) - 1.0).abs() < 1e-14);
        let expected = sr_gamma(0.8).powi(2) / (2.0 * 0.3 * (0.3 * PI).sin() * sr_gamma(0.6));
        assert!(rel(a_h(hv(0.3)), expected) < 1e-12);
        let v = a_h(hv(0.9));
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn e_h_examples() {
        assert!((e_h(HurstValue::HALF) - 1.0).abs() < 1e-14);
        for h in [0.1, 0.3] {
            assert!(rel(e_h(hv(h)), a_h(hv(h))) < 1e-10);
        }
    }

    #[test]
    fn derivatives_at_half() {
        let (e, d1, d2) = e_h_derivatives_at_half();
        assert!((e - 1.0).abs() < 1e-14);
        assert!((d1 + 2.0).abs() < 1e-12);
        assert!((d2 - (8.0 + 2.0 * PI * PI / 3.0)).abs() < 1e-11);
        let (fd1, fd2) = e_h_finite_differences(1e-5);
        assert!((fd1 + 2.0).abs() < 1e-4);
        assert!((fd2 - 14.579_736_267_392_907).abs() < 1e-3);
    }

    #[test]
    fn taylor_table_rows() {
        let law = GaussianHurstLaw::centered(0.01).unwrap();
        assert!((expected_e_h_taylor(&law).unwrap() - 1.0729).abs() < 5e-5);
        let law = GaussianHurstLaw::centered(0.023).unwrap();
        assert!((expected_e_h_taylor(&law).unwrap() - 1.1677).abs() < 5e-5);
        let law = GaussianHurstLaw::centered(1e-300).unwrap();
        assert!((expected_e_h_taylor(&law).unwrap() - 1.0).abs() < 1e-15);
        let off = GaussianHurstLaw::new(0.4, 0.01).unwrap();
        assert_eq!(
            expected_e_h_taylor(&off),
            Err(SpecfunError::UnsupportedMean(0.4))
        );
    }

    #[test]
    fn exceedance_probability() {
        let p = prob_outside_unit(&GaussianHurstLaw::centered(0.01).unwrap());
        assert!(rel(p, 5.7330e-7) < 5e-5);
        let p = prob_outside_unit(&GaussianHurstLaw::centered(0.023).unwrap());
        assert!(rel(p, 9.7757e-4) < 5e-5);
        let p = prob_outside_unit(&GaussianHurstLaw::centered(1e-6).unwrap());
        assert_eq!(p, 0.0);
        assert!(GaussianHurstLaw::centered(0.0).is_err());
        assert!(GaussianHurstLaw::centered(-0.1).is_err());
    }

    #[test]
    fn exceedance_monotone_in_variance() {
        let mut prev = 0.0;
        for i in 1..200 {
            let p = prob_outside_unit(&GaussianHurstLaw::centered(i as f64 * 5e-4).unwrap());
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn montecarlo_is_deterministic_and_guarded() {
        let law = GaussianHurstLaw::centered(0.01).unwrap();
        let a = expected_e_h_montecarlo(&law, MIN_MC_SAMPLES, 11).unwrap();
        let b = expected_e_h_montecarlo(&law, MIN_MC_SAMPLES, 11).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            expected_e_h_montecarlo(&law, 10, 1),
            Err(SpecfunError::TooFewSamples { .. })
        ));
        let tight = GaussianHurstLaw::centered(1e-14).unwrap();
        let m = expected_e_h_montecarlo(&tight, MIN_MC_SAMPLES, 3).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn e_h_equals_a_h(h in 0.001f64..0.999) {
            let h = hv(h);
            prop_assert!(rel(e_h(h), a_h(h)) < 1e-10);
        }

        #[test]
        fn v_h_positive_and_finite(h in 1e-6f64..(1.0 - 1e-6)) {
            let v = v_h(hv(h));
            prop_assert!(v.is_finite() && v > 0.0);
        }
    }
}

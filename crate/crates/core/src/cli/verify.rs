//! Self-checks: closed-form identities, printed reference values and, at the
//! full level, Monte-Carlo properties of the generators and estimators.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::estimate::{self, Regression, WindowConfig};
use crate::fairvol;
use crate::specfun::{self, GaussianHurstLaw, HurstValue, VhForm, HURST_EPS};
use crate::synth::{self, FgnCovariance, HPath, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    /// Deterministic checks only.
    Quick,
    /// Adds the Monte-Carlo suites.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub level: VerifyLevel,
    /// Relative error injected into `V_H` wherever the checks evaluate it.
    /// Zero for a normal run.
    pub vh_perturbation: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            level: VerifyLevel::Quick,
            vh_perturbation: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    /// Passes when `value ≤ bound`.
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: bound,
            tolerance: 0.0,
            pass: value <= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{}  {:width$}  value={:<14.8e} expected={:<14.8e} tol={:.1e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.expected,
                c.tolerance,
            );
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(s, "{} checks, {failed} failed", self.checks.len());
        s
    }
}

/// `(σ_H², P[H ∉ (0,1)], E[E(H)])` under `H ~ N(½, σ_H²)`, as printed.
pub const GAUSSIAN_H_REFERENCE: [(f64, f64, f64); 8] = [
    (0.0230, 9.7757e-4, 1.1677),
    (0.0200, 4.0695e-4, 1.1458),
    (0.0175, 1.5705e-4, 1.1276),
    (0.0150, 4.4557e-5, 1.1093),
    (0.0125, 7.7442e-6, 1.0911),
    (0.0100, 5.7330e-7, 1.0729),
    (0.0050, 1.5375e-12, 1.0364),
    (0.0010, 2.5968e-56, 1.0073),
];

/// Half a unit in the fourth significant digit of `x`.
pub fn four_digit_tolerance(x: f64) -> f64 {
    0.5 * 10f64.powf(x.abs().log10().floor() - 3.0)
}

fn grid() -> impl Iterator<Item = HurstValue> {
    (1..=99).map(|i| HurstValue::new(i as f64 / 100.0).expect("grid inside (0,1)"))
}

fn identity_checks(perturb: f64, out: &mut Vec<Check>) {
    let vh = |h: HurstValue| specfun::v_h(h) * (1.0 + perturb);
    for form in VhForm::ALL {
        let worst = grid()
            .filter(|h| !(form.is_singular_at_half() && h.get() == 0.5))
            .map(|h| {
                let f = specfun::v_h_form(h, form).expect("form defined off the pole");
                ((f - vh(h)) / vh(h)).abs()
            })
            .fold(0.0, f64::max);
        out.push(Check::new(
            format!("v_h {form:?} max rel dev"),
            worst,
            0.0,
            1e-10,
        ));
    }
    let worst = grid()
        .map(|h| {
            let a = specfun::gamma(h.get() + 0.5).powi(2) * vh(h);
            ((specfun::e_h(h) - a) / a).abs()
        })
        .fold(0.0, f64::max);
    out.push(Check::new("e_h = a_h max rel dev", worst, 0.0, 1e-10));
    out.push(Check::new(
        "E(1/2)",
        specfun::e_h(HurstValue::HALF),
        1.0,
        1e-12,
    ));
    let (d1, d2) = specfun::e_h_finite_differences(1e-5);
    out.push(Check::new("E'(1/2) finite difference", d1, -2.0, 1e-4));
    out.push(Check::new(
        "E''(1/2) finite difference",
        d2,
        8.0 + 2.0 * PI * PI / 3.0,
        1e-3,
    ));
}

fn reference_checks(out: &mut Vec<Check>) {
    for (var, prob, expect) in GAUSSIAN_H_REFERENCE {
        let law = GaussianHurstLaw::centered(var).expect("positive variance");
        let taylor = specfun::expected_e_h_taylor(&law).expect("mean is 1/2");
        out.push(Check::new(
            format!("taylor E[E(H)] var={var}"),
            taylor,
            expect,
            four_digit_tolerance(expect),
        ));
        out.push(Check::new(
            format!("P[H outside] var={var}"),
            specfun::prob_outside_unit(&law),
            prob,
            four_digit_tolerance(prob),
        ));
    }
    for (n, lo, hi) in [(18101, 0.468, 0.532), (7555, 0.465, 0.535)] {
        let ci = estimate::martingale_ci(n, 20, 0.05).expect("valid interval");
        out.push(Check::new(
            format!("martingale ci n={n} lo"),
            ci.0,
            lo,
            5e-4,
        ));
        out.push(Check::new(
            format!("martingale ci n={n} hi"),
            ci.1,
            hi,
            5e-4,
        ));
    }
    let model = |h, a, b, n| fairvol::model_curve(h, a, b, n).expect("inside domain");
    let (a, b, n) = (8.379e-4, 1.014, 18101);
    out.push(Check::new(
        "fair vol n=18101",
        model(0.5, a, b, n),
        0.0077,
        1e-4,
    ));
    let (h_lo, h_hi) = estimate::martingale_ci(n, 20, 0.05).expect("valid interval");
    out.push(Check::new(
        "fair 95% lo n=18101",
        model(h_hi, a, b, n),
        0.0058,
        1e-4,
    ));
    out.push(Check::new(
        "fair 95% hi n=18101",
        model(h_lo, a, b, n),
        0.0104,
        1e-4,
    ));
    out.push(Check::new(
        "fair vol n=7555",
        model(0.5, 8.114e-4, 1.010, 7555),
        0.0117,
        1e-4,
    ));
    for (daily, pct) in [(0.0077, 12.2), (0.0117, 18.6)] {
        out.push(Check::new(
            format!("annualized {daily}"),
            100.0 * fairvol::annualize(daily, fairvol::TRADING_DAYS),
            pct,
            0.05,
        ));
    }
}

fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `E[E(H) | H ∈ [ε, 1-ε]]` by composite Simpson.
fn conditional_e_h(law: &GaussianHurstLaw) -> f64 {
    let (lo, hi) = (HURST_EPS, 1.0 - HURST_EPS);
    let steps = 20_000;
    let step = (hi - lo) / steps as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=steps {
        let h = lo + step * i as f64;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let z = (h - law.mean()) / law.std_dev();
        let pdf = (-0.5 * z * z).exp();
        num += w * pdf * specfun::e_h(HurstValue::new(h).expect("inside band"));
        den += w * pdf;
    }
    num / den
}

fn montecarlo_checks(seed: u64, out: &mut Vec<Check>) {
    let seeds = 20u64;
    let n = 1 << 14;
    for h in [0.3, 0.5, 0.7] {
        let hv = HurstValue::new(h).expect("grid value");
        let cov = FgnCovariance::new(hv, 1.0, Normalization::KernelVh).expect("unit scale");
        let vars: Vec<f64> = (0..seeds)
            .map(|k| {
                let path = synth::synth_fbm(&cov, n, seed + k).expect("fbm");
                mean_square(&path.increments())
            })
            .collect();
        let (mean, se) = mean_and_se(&vars);
        out.push(Check::new(
            format!("fbm increment variance h={h}"),
            mean,
            specfun::v_h(hv),
            3.0 * se,
        ));
    }

    for h in [0.3, 0.7] {
        let hv = HurstValue::new(h).expect("grid value");
        let hpath = HPath::constant(hv, 4096);
        let ones = vec![1.0; 4096];
        let vars: Vec<f64> = (0..seeds)
            .map(|k| {
                mean_square(
                    &synth::synth_mpre(&hpath, &ones, seed + k)
                        .expect("mpre")
                        .increments(),
                )
            })
            .collect();
        let (mean, se) = mean_and_se(&vars);
        let target = specfun::a_h(hv);
        out.push(Check::new(
            format!("mpre increment variance h={h}"),
            mean,
            target,
            0.03 * target + 3.0 * se,
        ));
    }

    let law = GaussianHurstLaw::centered(0.01).expect("positive variance");
    let mc = specfun::expected_e_h_montecarlo(&law, 200_000, seed).expect("enough samples");
    out.push(Check::new(
        "montecarlo E[E(H)] var=0.01",
        mc.mean,
        conditional_e_h(&law),
        4.0 * mc.std_error,
    ));

    let cov = FgnCovariance::unit(HurstValue::HALF);
    let means: Vec<f64> = (0..seeds)
        .map(|k| {
            let path = synth::synth_fbm(&cov, n, seed + k).expect("fbm");
            let traj =
                estimate::hurst_pointwise(&path, &WindowConfig::default()).expect("long enough");
            let h = traj.h_values();
            h.iter().sum::<f64>() / h.len() as f64
        })
        .collect();
    let (mean, _) = mean_and_se(&means);
    out.push(Check::new(
        "ratio estimator mean on fbm h=0.5",
        mean,
        0.5,
        0.03,
    ));

    let walks = 200u64;
    let rejections = (0..walks)
        .filter(|k| {
            let steps = synth::synth_iid(1.0, 500, seed + k).expect("iid");
            let walk: Vec<f64> = steps
                .values
                .iter()
                .scan(0.0, |acc, d| {
                    *acc += d;
                    Some(*acc)
                })
                .collect();
            estimate::adf_test(&walk, Regression::ConstantTrend)
                .map(|r| r.reject)
                .unwrap_or(false)
        })
        .count();
    out.push(Check::at_most(
        "adf size on random walks",
        rejections as f64 / walks as f64,
        0.08,
    ));
}

/// Runs the checks for `opts.level`.
pub fn cmd_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    identity_checks(opts.vh_perturbation, &mut checks);
    reference_checks(&mut checks);
    if opts.level == VerifyLevel::Full {
        montecarlo_checks(opts.seed, &mut checks);
    }
    VerifyReport { checks }
}

use std::f64::consts::PI;

use hurstvol::estimate::{self, WindowConfig};
use hurstvol::fairvol::{self, SigmaHSample, TRADING_DAYS};
use hurstvol::specfun::{self, GaussianHurstLaw, HurstValue, HURST_EPS};
use hurstvol::synth::{self, FgnCovariance, Normalization};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal, Uniform};
use statrs::function::gamma::gamma;

fn e_oracle(h: f64) -> f64 {
    gamma(h + 0.5).powi(2) / (2.0 * h * (PI * h).sin() * gamma(2.0 * h))
}

/// `E[E(H)]` for a Gaussian `H` truncated to `[ε, 1-ε]`, by Simpson's rule.
fn truncated_mean(mu: f64, sd: f64) -> f64 {
    let (lo, hi) = (HURST_EPS, 1.0 - HURST_EPS);
    let m = 20_000;
    let step = (hi - lo) / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=m {
        let h = lo + i as f64 * step;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let pdf = (-0.5 * ((h - mu) / sd).powi(2)).exp();
        num += w * pdf * e_oracle(h);
        den += w * pdf;
    }
    num / den
}

#[test]
fn monte_carlo_expectation_matches_quadrature() {
    for var in [0.0025, 0.01, 0.0230] {
        let law = GaussianHurstLaw::centered(var).unwrap();
        let mc = specfun::expected_e_h_montecarlo(&law, 400_000, 17).unwrap();
        let q = truncated_mean(0.5, var.sqrt());
        assert!(
            (mc.mean - q).abs() < 4.0 * mc.std_error,
            "var={var}: {} ± {} vs {q}",
            mc.mean,
            mc.std_error
        );
    }
}

/// Pairs drawn around a known curve with additive noise.
fn noisy_pairs(a: f64, b: f64, n: usize, noise: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let hs = Uniform::new(0.3, 0.7).unwrap();
    let eps = Normal::new(0.0, noise).unwrap();
    (0..count)
        .map(|_| {
            let h: f64 = hs.sample(&mut rng);
            let s = fairvol::model_curve(h, a, b, n).unwrap() + eps.sample(&mut rng);
            (h, s)
        })
        .collect()
}

#[test]
fn fit_recovers_known_parameters() {
    let (a, b, n) = (4e-4, 1.02, 5000);
    let fit = |seed| {
        let pairs = noisy_pairs(a, b, n, 1e-4, 2000, seed);
        fairvol::fit_sigma_h(&SigmaHSample::new(pairs, n).unwrap()).unwrap()
    };
    let f = fit(1);
    assert!(f.converged);
    assert!(
        (f.a - a).abs() < 3e-5 && (f.b - b).abs() < 3e-4,
        "{} {}",
        f.a,
        f.b
    );
    assert!(f.r_squared > 0.9);
    let seeds = 40;
    let (mut cover_a, mut cover_b) = (0, 0);
    for seed in 100..100 + seeds {
        let f = fit(seed);
        cover_a += (f.ci_a.0 < a && a < f.ci_a.1) as usize;
        cover_b += (f.ci_b.0 < b && b < f.ci_b.1) as usize;
    }
    // 95% intervals: 34 of 40 is about three binomial standard errors below
    assert!(cover_a >= 34 && cover_b >= 34, "{cover_a} {cover_b}");
}

#[test]
fn prediction_bounds_cover_in_sample_and_fresh_points() {
    let (a, b, n) = (2e-4, 0.98, 8000);
    let fit =
        fairvol::fit_sigma_h(&SigmaHSample::new(noisy_pairs(a, b, n, 2e-4, 1500, 2), n).unwrap())
            .unwrap();
    let rate = |pairs: &[(f64, f64)]| {
        pairs
            .iter()
            .filter(|(h, s)| {
                let (lo, hi) = fairvol::prediction_bounds(&fit, *h, 0.99).unwrap();
                lo <= *s && *s <= hi
            })
            .count() as f64
            / pairs.len() as f64
    };
    let in_sample: Vec<(f64, f64)> = fit
        .h
        .iter()
        .copied()
        .zip(fit.sigma.iter().copied())
        .collect();
    assert!(rate(&in_sample) >= 0.98);
    assert!(rate(&noisy_pairs(a, b, n, 2e-4, 4000, 3)) >= 0.98);
}

#[test]
fn prediction_bounds_widen_with_level() {
    let n = 8000;
    let fit = fairvol::fit_sigma_h(
        &SigmaHSample::new(noisy_pairs(0.0, 1.0, n, 2e-4, 500, 6), n).unwrap(),
    )
    .unwrap();
    let (lo0, hi0) = fairvol::prediction_bounds(&fit, 0.45, 0.0).unwrap();
    assert_eq!(lo0, hi0);
    assert_eq!(lo0, fit.model(0.45).unwrap());
    let mut prev = 0.0;
    for level in [0.5, 0.9, 0.95, 0.99] {
        let (lo, hi) = fairvol::prediction_bounds(&fit, 0.45, level).unwrap();
        assert!(hi - lo > prev);
        prev = hi - lo;
    }
}

#[test]
fn fair_intervals_nest_and_contain_the_fair_value() {
    let n = 8000;
    let fit = fairvol::fit_sigma_h(
        &SigmaHSample::new(noisy_pairs(3e-4, 1.01, n, 2e-4, 800, 7), n).unwrap(),
    )
    .unwrap();
    let r = fairvol::fair_volatility(&fit, n, 20, &[0.90, 0.95, 0.99], TRADING_DAYS).unwrap();
    for w in r.intervals.windows(2) {
        assert!(w[1].lo <= w[0].lo && w[0].hi <= w[1].hi);
    }
    for iv in &r.intervals {
        assert!(iv.lo < r.fair_vol && r.fair_vol < iv.hi);
    }
    let flat = fairvol::FitResult {
        a: 0.0,
        b: 1.0,
        ..fit
    };
    let fair = fairvol::fair_volatility(&flat, n, 20, &[0.95], TRADING_DAYS).unwrap();
    assert!((fair.fair_vol - (n as f64).powf(-0.5)).abs() < 1e-15);
}

#[test]
fn fit_ignores_pair_order() {
    let (n, mut pairs) = (5000, noisy_pairs(0.0, 1.0, 5000, 1e-4, 300, 4));
    let f1 = fairvol::fit_sigma_h(&SigmaHSample::new(pairs.clone(), n).unwrap()).unwrap();
    pairs.reverse();
    let f2 = fairvol::fit_sigma_h(&SigmaHSample::new(pairs, n).unwrap()).unwrap();
    assert_eq!(f1.a, f2.a);
    assert_eq!(f1.b, f2.b);
}

/// Synthesise fBm at `h*`, estimate, fit, and read the curve back at `h*`.
#[test]
fn round_trip_reproduces_sigma_of_h() {
    let n = 6000;
    let mut misses = Vec::new();
    for h in [0.3, 0.5, 0.7] {
        let h_star = HurstValue::new(h).unwrap();
        let cov = FgnCovariance::new(h_star, (n as f64).powf(-h), Normalization::KernelVh).unwrap();
        let path = synth::synth_fbm(&cov, n, 12).unwrap();
        let traj = estimate::hurst_pointwise(&path, &WindowConfig::default()).unwrap();
        let target = fairvol::sigma_of_h(h_star, n).unwrap();
        let got = fairvol::fit_sigma_h(&SigmaHSample::from_trajectory(&traj).unwrap())
            .map_err(|e| e.to_string())
            .and_then(|fit| fit.model(h).map_err(|e| e.to_string()));
        match got {
            Ok(v) if (v / target - 1.0).abs() <= 0.1 => {}
            other => misses.push(format!("h*={h}: {other:?} vs {target:.5}")),
        }
    }
    assert!(misses.is_empty(), "{}", misses.join("; "));
}

#[test]
fn too_few_pairs_are_rejected() {
    let pairs = noisy_pairs(0.0, 1.0, 1000, 1e-4, 10, 5);
    assert!(fairvol::fit_sigma_h(&SigmaHSample::new(pairs, 1000).unwrap()).is_err());
}

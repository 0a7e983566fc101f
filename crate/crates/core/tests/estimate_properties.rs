use hurstvol::estimate::{self, RecordFlag, Regression, WindowConfig};
use hurstvol::specfun::HurstValue;
use hurstvol::synth::{self, FgnCovariance};
use hurstvol::{SeriesRole, TimeSeries};

fn walk(n: usize, seed: u64) -> TimeSeries {
    synth::synth_fbm(&FgnCovariance::unit(HurstValue::HALF), n, seed).unwrap()
}

#[test]
fn estimates_match_a_direct_window_computation() {
    let x = walk(300, 4);
    let cfg = WindowConfig::default();
    let traj = estimate::hurst_pointwise(&x, &cfg).unwrap();
    assert_eq!(traj.records.len(), 300 - 20 - 1);
    for r in &traj.records {
        let win = &x.values[r.t - 21..=r.t];
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for j in 0..20 {
            m1 += (win[j + 2] - win[j + 1]).powi(2);
            m2 += (win[j + 2] - win[j]).powi(2);
        }
        let h = 0.5 * (m2 / m1).log2();
        assert!((r.h_hat - h).abs() < 1e-12);
        assert!((r.sigma_hat - (m1 / 20.0).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn realized_vol_is_root_mean_square_of_increments() {
    let x = [1.0, 1.5, 0.5, 2.5];
    let expect = ((0.25 + 1.0 + 4.0) / 3.0f64).sqrt();
    assert!((estimate::realized_vol(&x).unwrap() - expect).abs() < 1e-15);
    let incs = [0.5, -1.0, 2.0];
    let m = 0.5;
    let centered = (incs.iter().map(|d: &f64| (d - m).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((estimate::realized_vol_centered(&x).unwrap() - centered).abs() < 1e-15);
}

#[test]
fn white_noise_acf_stays_inside_bartlett_band() {
    let x = synth::synth_iid(1.0, 4000, 8).unwrap().values;
    // four standard errors keeps the joint miss rate over 20 lags small
    let band = 4.0 / (x.len() as f64).sqrt();
    let r = estimate::acf(&x, 20);
    assert!((r[0] - 1.0).abs() < 1e-12);
    assert!(r[1..].iter().all(|v| v.abs() < band), "{r:?}");
}

#[test]
fn gaussian_sample_has_kurtosis_near_three() {
    let x = synth::synth_iid(2.0, 100_000, 2).unwrap().values;
    let (m, s, skew, kurt) = estimate::moments(&x);
    assert!(m.abs() < 0.03);
    assert!((s - 2.0).abs() < 0.03);
    assert!(skew.unwrap().abs() < 0.05);
    assert!((kurt.unwrap() - 3.0).abs() < 0.1);
}

#[test]
fn flat_prices_are_flagged_missing() {
    let x = TimeSeries::new(SeriesRole::LogPrice, vec![1.0; 40]);
    let traj = estimate::hurst_pointwise(&x, &WindowConfig::default()).unwrap();
    assert!(traj.records.iter().all(|r| r.flag == RecordFlag::Missing));
    assert!(traj.h_values().is_empty());
}

#[test]
fn martingale_summary_mean_lies_inside_its_interval() {
    let x = walk(8000, 21);
    let traj = estimate::hurst_pointwise(&x, &WindowConfig::default()).unwrap();
    let s = estimate::summary_stats(&traj, 0.05).unwrap();
    assert!(s.ci.0 < s.mean && s.mean < s.ci.1, "{} {:?}", s.mean, s.ci);
    assert!(s.adf.unwrap().reject);
}

#[test]
fn adf_rejects_white_noise_and_keeps_a_random_walk() {
    let noise = synth::synth_iid(1.0, 2000, 1).unwrap().values;
    assert!(
        estimate::adf_test(&noise, Regression::Constant)
            .unwrap()
            .reject
    );
    let rw = walk(2000, 1).values;
    let res = estimate::adf_test(&rw, Regression::ConstantTrend).unwrap();
    assert!(!res.reject, "stat {}", res.stat);
    assert_eq!(res.lags, estimate::schwert_lags(2000));
}

#[test]
fn prices_must_be_positive() {
    let p = TimeSeries::new(SeriesRole::Price, vec![1.0, 2.0, 0.0]);
    assert!(estimate::to_log_prices(&p).is_err());
}

#[test]
fn even_window_and_stride_are_enforced() {
    assert!(WindowConfig::new(21, 1).is_err());
    assert!(WindowConfig::new(20, 0).is_err());
    assert!(WindowConfig::new(20, 5).is_ok());
}

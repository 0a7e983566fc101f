//! Rolling Hurst estimates on a path with a time-varying exponent.

use hurstvol::estimate::{self, WindowConfig};
use hurstvol::specfun::HurstValue;
use hurstvol::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 1 << 13;
    let hpath = synth::synth_fou_h(0.01, 0.1 * 0.02f64.sqrt(), HurstValue::HALF, n, 5)?;
    let scale = synth::unit_interval_scale(&hpath);
    let path = synth::synth_mpre(&hpath, &scale, 5)?;
    let traj = estimate::hurst_pointwise(&path, &WindowConfig::default())?;

    // block averages of the noisy pointwise estimates against the truth
    for block in traj.records.chunks(1000) {
        let valid: Vec<_> = block.iter().filter(|r| r.is_valid()).collect();
        let est = valid.iter().map(|r| r.h_hat).sum::<f64>() / valid.len() as f64;
        let truth = block.iter().map(|r| hpath.values()[r.t]).sum::<f64>() / block.len() as f64;
        println!("t={:>5}..  estimated {est:.3}  true {truth:.3}", block[0].t);
    }
    let summary = estimate::summary_stats(&traj, 0.05)?;
    println!(
        "mean {:.4}, std {:.4}, martingale band ({:.4}, {:.4})",
        summary.mean, summary.std, summary.ci.0, summary.ci.1
    );
    Ok(())
}

//! Exact fBm sampling and a check of its scaling law.

use hurstvol::specfun::{self, HurstValue};
use hurstvol::synth::{self, FgnCovariance, Normalization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 1 << 14;
    for h in [0.3, 0.5, 0.7] {
        let h = HurstValue::new(h)?;
        let cov = FgnCovariance::new(h, 1.0, Normalization::KernelVh)?;
        let path = synth::synth_fbm(&cov, n, 42)?;
        let var = |lag: usize| {
            let d: Vec<f64> = path.values[lag..]
                .iter()
                .zip(&path.values)
                .map(|(a, b)| a - b)
                .collect();
            d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64
        };
        println!(
            "h={:.1}: var(lag 1) = {:.4} (V_H = {:.4}), var(8)/var(1) = {:.3} (8^2H = {:.3})",
            h.get(),
            var(1),
            specfun::v_h(h),
            var(8) / var(1),
            8f64.powf(2.0 * h.get())
        );
    }
    Ok(())
}

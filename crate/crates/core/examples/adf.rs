//! Augmented Dickey–Fuller test on a random walk and a mean-reverting series.

use hurstvol::estimate::{self, Regression};
use hurstvol::specfun::HurstValue;
use hurstvol::synth::{self, FgnCovariance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let walk = synth::synth_fbm(&FgnCovariance::unit(HurstValue::HALF), 5000, 1)?.values;
    let ou = synth::synth_ar1(0.95, 1.0, 5000, 1)?.values;
    for (name, x) in [("random walk", &walk), ("AR(1) 0.95", &ou)] {
        let r = estimate::adf_test(x, Regression::ConstantTrend)?;
        println!(
            "{name:>12}: stat {:.3}, lags {}, 5% critical {:.3}, reject unit root: {}",
            r.stat, r.lags, r.critical_5pct, r.reject
        );
    }
    Ok(())
}

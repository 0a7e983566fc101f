//! Fair volatility from published curve parameters for two equity indices.

use hurstvol::estimate;
use hurstvol::fairvol::{self, TRADING_DAYS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, a, b, n) in [
        ("SPX", 8.379e-4, 1.014, 18101),
        ("DJI", 8.114e-4, 1.010, 7555),
    ] {
        let fair = fairvol::model_curve(0.5, a, b, n)?;
        println!(
            "{name}: fair {fair:.6} ({:.1}% annualised)",
            100.0 * fairvol::annualize(fair, TRADING_DAYS)
        );
        for level in [0.90, 0.95, 0.99] {
            let (h_lo, h_hi) = estimate::martingale_ci(n, 20, 1.0 - level)?;
            let lo = fairvol::model_curve(h_hi, a, b, n)?;
            let hi = fairvol::model_curve(h_lo, a, b, n)?;
            println!(
                "  {:.0}%: H in ({h_lo:.3}, {h_hi:.3}) -> sigma in ({lo:.6}, {hi:.6})",
                100.0 * level
            );
        }
    }
    Ok(())
}

//! Two return series with identical volatility and very different memory.

use hurstvol::cli::synth::fig1_series;
use hurstvol::estimate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (iid, ar) = fig1_series(1000, 7)?;
    for (name, s) in [("iid", &iid), ("ar1", &ar)] {
        let (_, sd, _, _) = estimate::moments(&s.values);
        let r = estimate::acf(&s.values, 5);
        println!("{name}: std {sd:.5}  acf {:.3?}", &r[1..]);
    }
    Ok(())
}

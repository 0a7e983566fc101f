//! A path whose Hurst exponent jumps halfway through: each half has
//! clear memory, the whole series looks uncorrelated.

use hurstvol::cli::synth::split_increments;
use hurstvol::estimate;
use hurstvol::specfun::HurstValue;
use hurstvol::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, path) =
        synth::synth_step_memory(HurstValue::new(0.4)?, HurstValue::new(0.6)?, 1 << 14, 3)?;
    let (first, second) = split_increments(&path);
    let full = path.increments();
    for (name, x) in [("first", &first), ("second", &second), ("full", &full)] {
        println!("{name:>6}: lag-1 acf {:+.4}", estimate::acf(x, 1)[1]);
    }
    Ok(())
}

//! Closed forms of the fBm increment variance and the moments of `E(H)`
//! under a Gaussian Hurst exponent.

use hurstvol::specfun::{self, GaussianHurstLaw, HurstValue, VhForm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>5} {:>12} {:>12} {:>12}", "h", "V_H", "A(H)", "E(H)");
    for h in [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9] {
        let h = HurstValue::new(h)?;
        println!(
            "{:>5.2} {:>12.6} {:>12.6} {:>12.6}",
            h.get(),
            specfun::v_h(h),
            specfun::a_h(h),
            specfun::e_h(h)
        );
    }

    let h = HurstValue::new(0.3)?;
    for form in VhForm::ALL {
        println!("{form:?}: {:.15}", specfun::v_h_form(h, form)?);
    }

    let (e, d1, d2) = specfun::e_h_derivatives_at_half();
    println!("E(1/2) = {e}, E'(1/2) = {d1}, E''(1/2) = {d2:.6}");

    println!(
        "\n{:>8} {:>12} {:>12} {:>12}",
        "var", "P(outside)", "Taylor", "Monte-Carlo"
    );
    for var in [0.023, 0.01, 0.001] {
        let law = GaussianHurstLaw::centered(var)?;
        let mc = specfun::expected_e_h_montecarlo(&law, 200_000, 1)?;
        println!(
            "{var:>8} {:>12.4e} {:>12.4} {:>12.4}",
            specfun::prob_outside_unit(&law),
            specfun::expected_e_h_taylor(&law)?,
            mc.mean
        );
    }
    Ok(())
}

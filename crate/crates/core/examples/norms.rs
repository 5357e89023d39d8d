//! Luxemburg and Orlicz norms on a weighted fiber.

use orlicz_ergodic::measure::{Fiber, FiberVector};
use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::orlicz::{luxemburg_norm, modular, orlicz_norm};

fn main() -> orlicz_ergodic::Result<()> {
    let fiber = Fiber::new(vec![0.2, 0.5, 1.0, 0.3])?;
    let x = FiberVector::new(vec![1.5, -0.4, 0.8, 2.0])?;

    for m in [NFunction::power(1.5, 1.0 / 1.5)?, NFunction::power(2.0, 0.5)?, NFunction::exp_type()] {
        let lux = luxemburg_norm(&m, &fiber, &x)?;
        let orl = orlicz_norm(&m, &fiber, &x)?;
        println!("{m}");
        println!("  modular              {:.12}", modular(&m, &fiber, &x)?);
        println!("  luxemburg            {:.12}  (modular at λ = {:.3e})", lux.value, lux.modular_at_lambda);
        println!("  orlicz               {:.12}  (k* = {:.6})", orl.value, orl.amemiya_k);
        println!("  orlicz / luxemburg   {:.6}", orl.value / lux.value);

        // the witness attains the Orlicz norm as a pairing
        let pairing: f64 = fiber
            .weights()
            .iter()
            .zip(x.values().iter().zip(orl.witness.values()))
            .map(|(w, (a, b))| w * a * b)
            .sum();
        println!("  ∫ x·witness          {:.12}  (∫N(witness) = {:.9})", pairing, orl.witness_modular);
    }

    // t²/2 is self-conjugate: the Luxemburg norm is the L2 norm
    let m = NFunction::power(2.0, 0.5)?;
    println!(
        "\nL2 norm {:.15}, luxemburg(t²/2)·√2 {:.15}",
        fiber.lp_norm(&x, 2.0)?,
        luxemburg_norm(&m, &fiber, &x)?.value * 2f64.sqrt()
    );
    Ok(())
}

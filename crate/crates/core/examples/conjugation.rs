//! Complementary N-functions for the three built-in families and a
//! tabulated density, with the Young gap at `v = p(u)`.

use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::suite::sample_tabulated;

fn main() -> orlicz_ergodic::Result<()> {
    let cases = [
        NFunction::power(3.0, 1.0 / 3.0)?,
        NFunction::exp_type(),
        sample_tabulated(),
    ];
    for m in &cases {
        let n = m.complement()?;
        println!("M = {m}   N = {n}");
        println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "M(t)", "N(t)", "q(t)", "gap");
        for t in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let gap = m.young_gap(t, m.density(t)?)?;
            println!(
                "{t:>6} {:>12.6} {:>12.6} {:>12.6} {gap:>12.2e}",
                m.eval(t)?,
                n.eval(t)?,
                n.density(t)?
            );
        }
        // conjugating twice gives M back
        let back = n.complement()?;
        println!("N* at 1.7: {:.12} vs M: {:.12}\n", back.eval(1.7)?, m.eval(1.7)?);
    }

    // |t|^3/3 and |s|^{3/2}/(3/2) are a conjugate pair
    let n = cases[0].complement()?;
    let s: f64 = 2.0;
    println!("closed form check: {:.15} vs {:.15}", n.eval(s)?, s.powf(1.5) / 1.5);
    Ok(())
}

//! Weight sequences: parsing, the Besicovich defect of a perturbed sequence
//! and least-squares recovery of a planted trigonometric polynomial.

use orlicz_ergodic::oracles::harmonic;
use orlicz_ergodic::weights::{besicovich_defect, defect_trend, fit_trig_poly, TrigPolynomial, WeightSequence};

fn main() -> orlicz_ergodic::Result<()> {
    let psi: TrigPolynomial = "theta=0.125,a=1,b=-0.5;theta=0.3,a=0.25,b=0".parse()?;
    let w: WeightSequence = "perturbed:theta=0.125,a=1,b=-0.5;theta=0.3,a=0.25,b=0|delta=0.5".parse()?;
    println!("w = {w}, sup |b(k)| = {:.6}", w.bound());
    for k in 1..=6 {
        print!("b({k}) = {:+.6}  ", w.eval(k)?);
    }
    println!();

    // defect of ψ + δ/k against ψ is δ·H_N/N
    for n in [10u64, 100, 1000, 10000] {
        let d = besicovich_defect(&w, &psi, n)?;
        println!("N={n:>6}  defect {d:.12}  δH_N/N {:.12}", 0.5 * harmonic(n) / n as f64);
    }
    let trend = defect_trend(&w, &psi, 1 << 14)?;
    println!("defect nonincreasing along doublings: {}", trend.nonincreasing);

    let clean = WeightSequence::trig(psi.clone())?;
    let (fit, residual) = fit_trig_poly(&clean, &[0.125, 0.3], 500)?;
    println!("planted {psi}\nfitted  {fit}\nresidual {residual:.3e}");
    Ok(())
}

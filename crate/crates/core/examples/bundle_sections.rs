//! Sections of a bundle, their L0-valued norms, fiberwise lattice operations
//! and order convergence of a sequence of sections.

use orlicz_ergodic::bundle::{o_converges, section_inf, section_sup, BaseSpace, Bundle, NormKind, Section};
use orlicz_ergodic::measure::{Fiber, FiberIdempotent, FiberVector};
use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::bundle::IdempotentSection;

fn sec(parts: &[&[f64]]) -> Section {
    Section::new(parts.iter().map(|p| FiberVector::new(p.to_vec()).unwrap()).collect())
}

fn main() -> orlicz_ergodic::Result<()> {
    let bundle = Bundle::new(
        BaseSpace::new(vec![1.0, 0.5])?,
        vec![Fiber::uniform(3)?, Fiber::new(vec![0.5, 0.5, 1.0])?],
    )?;
    let m = NFunction::power(2.0, 1.0)?;
    let f = sec(&[&[1.0, -2.0, 0.5], &[0.0, 3.0, -1.0]]);
    let g = sec(&[&[0.5, 0.5, 0.5], &[2.0, -1.0, 0.0]]);

    println!("luxemburg norm of f, per base atom: {:?}", bundle.section_norm(&m, &f, NormKind::Luxemburg)?.values());
    println!("orlicz norm of f, per base atom:    {:?}", bundle.section_norm(&m, &f, NormKind::Orlicz)?.values());

    let sup = section_sup(&[f.clone(), g.clone()])?;
    let inf = section_inf(&[f.clone(), g.clone()])?;
    for w in 0..2 {
        println!("ω={w}: f∨g = {:?}  f∧g = {:?}", sup.component(w).values(), inf.component(w).values());
    }

    // measure of an idempotent section is a function on the base
    let e = IdempotentSection::new(vec![
        FiberIdempotent::from_indices(3, &[0, 2])?,
        FiberIdempotent::from_indices(3, &[2])?,
    ]);
    println!("measure of e: {:?}", bundle.measure_of(&e)?.values());

    // f_k = (1 + (-1)^k / k) f converges in order to f
    let trace: Vec<Section> = (1..=200)
        .map(|k| f.scale(1.0 + if k % 2 == 0 { 1.0 } else { -1.0 } / k as f64))
        .collect();
    let rep = o_converges(&trace, &f, 100, 1e-1)?;
    println!(
        "order convergence: converged={} monotone envelopes={} final envelope per base atom {:?}",
        rep.converged,
        rep.monotone,
        rep.per_base_final.values()
    );
    Ok(())
}

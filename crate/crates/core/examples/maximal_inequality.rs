//! The dominant supremum of the |f| averages and the stabilization of the
//! empirical maximal ratio as n grows.

use orlicz_ergodic::cli::{generate_bundle, generate_sections};
use orlicz_ergodic::ergodic::{dominant_sup, AveragingParams};
use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::operators::generate_bundle_operator;
use orlicz_ergodic::weights::WeightSequence;

fn main() -> orlicz_ergodic::Result<()> {
    let bundle = generate_bundle(3, 6, 1)?;
    let t = generate_bundle_operator(&bundle, 2, 0.2)?;
    let (_, f) = generate_sections(&bundle, 1, 3).remove(0);
    let m = NFunction::power(1.5, 1.0)?;
    let w: WeightSequence = "trig:theta=0.2,a=1,b=0.5;theta=0.45,a=-0.3,b=0".parse()?;

    let dom = dominant_sup(&t, &bundle, &w, &f, &m, &AveragingParams::new(10_000))?;
    println!("weight bound {:.6}, sup finite: {}", dom.weight_bound, dom.finite);
    let last = dom.ratio_history.len() - 1;
    for (_, (n, ratio)) in dom.ratio_history.iter().enumerate().filter(|(i, _)| i % 12 == 0 || *i == last) {
        println!("n={n:>6}  ratio per base atom {:?}", ratio.values());
    }
    Ok(())
}

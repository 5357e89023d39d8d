//! Weighted ergodic averages of a generated contraction: the trace, its order
//! limit and the spectral prediction.

use orlicz_ergodic::bundle::{Bundle, Section};
use orlicz_ergodic::ergodic::{detect_o_limit, spectral_limit_oracle, weighted_averages, AveragingParams};
use orlicz_ergodic::measure::{Fiber, FiberVector};
use orlicz_ergodic::operators::{generate_admissible, BundleOperator};
use orlicz_ergodic::weights::{TrigPolynomial, WeightSequence};

fn main() -> orlicz_ergodic::Result<()> {
    let fiber = Fiber::new(vec![0.4, 1.1, 0.8, 0.3, 1.9, 0.6])?;
    let op = generate_admissible(&fiber, 3, 0.2)?;
    let t = BundleOperator::new(vec![op.clone()], Section::constant(&Bundle::single(fiber.clone()), 1.0))?;
    let f = FiberVector::new(vec![1.0, -0.5, 2.0, 0.0, 0.3, -1.2])?;
    let sec = Section::new(vec![f.clone()]);

    for w in [
        WeightSequence::constant(1.0)?,
        WeightSequence::trig(TrigPolynomial::single(0.6180339887, 1.0, 0.0)?)?,
    ] {
        let trace = weighted_averages(&t, &w, &sec, &AveragingParams::new(50_000))?;
        let lim = detect_o_limit(&trace, 1e-3)?;
        let predicted = spectral_limit_oracle(&op, &fiber, &w, &f)?;
        println!("weights {w}");
        for (i, n) in trace.schedule.iter().enumerate().filter(|(i, _)| i % 16 == 0) {
            println!("  n={n:>6}  Ã_n[0] = {:+.9}", trace.averages[i].component(0)[0]);
        }
        println!("  order-converged: {} (final envelope {:.2e})", lim.converged, lim.convergence.final_max);
        println!("  limit estimate {:?}", lim.limit_estimate.component(0).values());
        if let Some(p) = predicted {
            println!("  spectral limit {:?}", p.values());
        }
    }
    Ok(())
}

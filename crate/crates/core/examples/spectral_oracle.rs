//! Predicted limits from the spectrum, checked against long direct averages.

use orlicz_ergodic::ergodic::spectral_limit_oracle;
use orlicz_ergodic::measure::{Fiber, FiberVector};
use orlicz_ergodic::operators::FiberOperator;
use orlicz_ergodic::oracles::direct_average;
use orlicz_ergodic::weights::{TrigPolynomial, WeightSequence};

fn main() -> orlicz_ergodic::Result<()> {
    let fiber = Fiber::uniform(2)?;
    let swap = FiberOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let f = FiberVector::new(vec![1.0, 0.0])?;

    for w in [
        WeightSequence::constant(1.0)?,
        WeightSequence::trig(TrigPolynomial::single(0.5, 1.0, 0.0)?)?,
        WeightSequence::trig(TrigPolynomial::single(0.25, 1.0, 0.0)?)?,
    ] {
        let p = spectral_limit_oracle(&swap, &fiber, &w, &f)?;
        let direct = direct_average(&swap, &w, &f, 100_000)?;
        println!("{w:<28} predicted {:?}  direct(1e5) {:?}", p.map(|v| v.into_values()), direct.values());
    }

    // a Jordan block at 1 is defective, so no prediction is made
    let jordan = FiberOperator::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]])?;
    let p = spectral_limit_oracle(&jordan, &fiber, &WeightSequence::constant(1.0)?, &f)?;
    println!("defective eigenvalue: {:?}", p);
    Ok(())
}

//! Generated positive contractions and the admissibility report; a doubled
//! identity is rejected.

use orlicz_ergodic::bundle::{BaseSpace, Bundle};
use orlicz_ergodic::measure::Fiber;
use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::operators::{generate_bundle_operator, verify_conditions, BundleOperator, FiberOperator};

fn main() -> orlicz_ergodic::Result<()> {
    let bundle = Bundle::new(
        BaseSpace::new(vec![1.0, 1.0, 2.0])?,
        vec![
            Fiber::new(vec![0.3, 1.2, 0.7])?,
            Fiber::uniform(5)?,
            Fiber::new(vec![2.0, 0.1, 0.4, 1.0, 0.6, 0.9, 1.3, 0.2])?,
        ],
    )?;
    let m = NFunction::exp_type();
    let t = generate_bundle_operator(&bundle, 7, 0.2)?;

    let report = verify_conditions(&t, &bundle, &m, 1000, 11)?;
    for fr in &report.fibers {
        for (name, pass, residual) in fr.rows() {
            println!("ω={} {name:<30} {} {residual:.3e}", fr.omega, if pass { "pass" } else { "FAIL" });
        }
    }
    println!("admissible: {}\n", report.admissible());

    let doubled = t.with_component(1, FiberOperator::identity(5).scaled(2.0)?)?;
    let report = verify_conditions(&doubled, &bundle, &m, 1000, 11)?;
    let fr = &report.fibers[1];
    println!("2·I on ω=1: l1 norm {:.3} ({}), fixed point residual {:.3} ({})",
        fr.l1_norm, fr.l1_pass, fr.fixed_point_residual, fr.fixed_point_pass);
    println!("admissible: {}", report.admissible());

    let id = BundleOperator::identity(&bundle);
    println!("identity admissible: {}", verify_conditions(&id, &bundle, &m, 100, 1)?.admissible());
    Ok(())
}

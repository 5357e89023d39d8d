//! Randomized invariants across the library.

use orlicz_ergodic::bundle::{o_converges, section_inf, section_sup, BaseSpace, Bundle, NormKind, Section};
use orlicz_ergodic::config::Config;
use orlicz_ergodic::ergodic::{self, AveragingParams};
use orlicz_ergodic::measure::{Fiber, FiberVector};
use orlicz_ergodic::nfunction::NFunction;
use orlicz_ergodic::operators::{generate_admissible, generate_bundle_operator, BundleOperator};
use orlicz_ergodic::oracles::harmonic;
use orlicz_ergodic::orlicz::{luxemburg_norm, modular, orlicz_norm};
use orlicz_ergodic::weights::{self, TrigPolynomial, TrigTerm, WeightSequence};
use proptest::prelude::*;

fn nfunction() -> impl Strategy<Value = NFunction> {
    prop_oneof![
        (1.2f64..4.0, 0.2f64..3.0).prop_map(|(r, c)| NFunction::power(r, c).unwrap()),
        Just(NFunction::exp_type()),
        tabulated(),
    ]
}

/// Increasing knots; the first slope is positive, later ones may be flat.
fn tabulated() -> impl Strategy<Value = NFunction> {
    (
        0.05f64..1.0,
        prop::collection::vec((0.1f64..1.0, 0.0f64..1.0, prop::bool::weighted(0.2)), 1..5),
        0.1f64..3.0,
    )
        .prop_map(|(p1, steps, slope)| {
            let mut knots = vec![(0.0, 0.0), (0.5, p1)];
            let (mut t, mut p) = (0.5, p1);
            for (dt, dp, jump) in steps {
                if !jump {
                    t += dt;
                }
                p += dp;
                knots.push((t, p));
            }
            NFunction::tabulated(&knots, slope).unwrap()
        })
}

fn fiber_and_vectors(k: usize) -> impl Strategy<Value = (Fiber, Vec<FiberVector>)> {
    (1usize..6).prop_flat_map(move |n| {
        (
            prop::collection::vec(0.1f64..2.0, n),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), k),
        )
            .prop_map(|(w, xs)| {
                (
                    Fiber::new(w).unwrap(),
                    xs.into_iter().map(|x| FiberVector::new(x).unwrap()).collect(),
                )
            })
    })
}

fn nonzero(x: &FiberVector) -> bool {
    x.max_abs() > 1e-6
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn nfunction_even_and_convex(m in nfunction(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        prop_assert_eq!(m.eval(-a).unwrap(), m.eval(a).unwrap());
        let mid = m.eval(0.5 * (a + b)).unwrap();
        let chord = 0.5 * (m.eval(a).unwrap() + m.eval(b).unwrap());
        prop_assert!(mid <= chord * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn young_inequality(m in nfunction(), u in 0.0f64..4.0, v in 0.0f64..4.0) {
        let gap = m.young_gap(u, v).unwrap();
        prop_assert!(gap >= -1e-10, "gap {gap}");
        let at_density = m.young_gap(u, m.density(u).unwrap()).unwrap();
        prop_assert!(at_density.abs() <= 1e-10 * (1.0 + u * m.density(u).unwrap()), "{at_density}");
    }

    #[test]
    fn double_conjugation_is_identity(m in nfunction(), t in 0.0f64..4.0) {
        let back = m.complement().unwrap().complement().unwrap();
        let rel = if matches!(m.kind(), orlicz_ergodic::nfunction::Kind::Tabulated(_)) { 1e-6 } else { 1e-9 };
        let (a, b) = (back.eval(t).unwrap(), m.eval(t).unwrap());
        prop_assert!((a - b).abs() <= rel * b.max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn inverse_inverts(m in nfunction(), y in 1e-6f64..20.0) {
        let t = m.inverse(y).unwrap();
        prop_assert!(close(m.eval(t).unwrap(), y, 1e-9));
    }

    #[test]
    fn norm_axioms(m in nfunction(), (fiber, xs) in fiber_and_vectors(2), alpha in -3.0f64..3.0) {
        let (x, y) = (&xs[0], &xs[1]);
        for norm in [
            |m: &NFunction, f: &Fiber, v: &FiberVector| luxemburg_norm(m, f, v).unwrap().value,
            |m: &NFunction, f: &Fiber, v: &FiberVector| orlicz_norm(m, f, v).unwrap().value,
        ] {
            let nx = norm(&m, &fiber, x);
            prop_assert!(nx >= 0.0);
            prop_assert_eq!(nx == 0.0, x.max_abs() == 0.0);
            let scaled = norm(&m, &fiber, &x.scale(alpha));
            prop_assert!((scaled - alpha.abs() * nx).abs() <= 1e-9 * nx.max(1e-300) * alpha.abs().max(1.0));
            let sum = norm(&m, &fiber, &x.combine(1.0, y, 1.0).unwrap());
            prop_assert!(sum <= (nx + norm(&m, &fiber, y)) * (1.0 + 1e-9) + 1e-300);
        }
    }

    #[test]
    fn norms_are_monotone(m in nfunction(), (fiber, xs) in fiber_and_vectors(1), shrink in prop::collection::vec(0.0f64..1.0, 6)) {
        let x = &xs[0];
        let smaller = FiberVector::new(x.values().iter().zip(&shrink).map(|(v, s)| v * s).collect()).unwrap();
        prop_assert!(luxemburg_norm(&m, &fiber, &smaller).unwrap().value <= luxemburg_norm(&m, &fiber, x).unwrap().value * (1.0 + 1e-10));
        prop_assert!(orlicz_norm(&m, &fiber, &smaller).unwrap().value <= orlicz_norm(&m, &fiber, x).unwrap().value * (1.0 + 1e-9));
    }

    #[test]
    fn modular_is_one_at_the_luxemburg_norm(m in nfunction(), (fiber, xs) in fiber_and_vectors(1)) {
        prop_assume!(nonzero(&xs[0]));
        let r = luxemburg_norm(&m, &fiber, &xs[0]).unwrap();
        prop_assert!((r.modular_at_lambda - 1.0).abs() <= 1e-9, "{}", r.modular_at_lambda);
    }

    #[test]
    fn sandwich_and_holder(m in nfunction(), (fiber, xs) in fiber_and_vectors(2)) {
        let (x, y) = (&xs[0], &xs[1]);
        let lux = luxemburg_norm(&m, &fiber, x).unwrap().value;
        let orl = orlicz_norm(&m, &fiber, x).unwrap().value;
        prop_assert!(lux <= orl * (1.0 + 1e-9) + 1e-300);
        prop_assert!(orl <= 2.0 * lux * (1.0 + 1e-9) + 1e-300);
        let n = m.complement().unwrap();
        let lux_y = luxemburg_norm(&n, &fiber, y).unwrap().value;
        let pairing: f64 = fiber.weights().iter().zip(x.values().iter().zip(y.values())).map(|(w, (a, b))| w * (a * b).abs()).sum();
        prop_assert!(pairing <= orl * lux_y + 1e-9, "{pairing} > {orl}·{lux_y}");
    }

    #[test]
    fn orlicz_space_sits_in_l1(m in nfunction(), (fiber, xs) in fiber_and_vectors(1)) {
        let x = &xs[0];
        let total = fiber.total_mass();
        let bound = total * m.inverse(1.0 / total).unwrap() * luxemburg_norm(&m, &fiber, x).unwrap().value;
        prop_assert!(fiber.lp_norm(x, 1.0).unwrap() <= bound * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn rho_metric_triangle((fiber, xs) in fiber_and_vectors(3)) {
        let (a, b, c) = (&xs[0], &xs[1], &xs[2]);
        let ab = fiber.rho_metric(a, b).unwrap();
        let bc = fiber.rho_metric(b, c).unwrap();
        let ac = fiber.rho_metric(a, c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(fiber.rho_metric(a, a).unwrap(), 0.0);
    }
}

fn operator_case() -> impl Strategy<Value = (Fiber, u64, f64, Vec<FiberVector>)> {
    (1usize..10, any::<u64>(), 0.05f64..1.0).prop_flat_map(|(n, seed, mixing)| {
        (
            prop::collection::vec(0.1f64..2.0, n),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), 2),
        )
            .prop_map(move |(w, xs)| {
                (
                    Fiber::new(w).unwrap(),
                    seed,
                    mixing,
                    xs.into_iter().map(|x| FiberVector::new(x).unwrap()).collect(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_operators_are_admissible((fiber, seed, mixing, xs) in operator_case(), m in nfunction()) {
        let t = generate_admissible(&fiber, seed, mixing).unwrap();
        prop_assert!(t.l1_operator_norm(&fiber).unwrap() <= 1.0 + 1e-12);
        let one = FiberVector::constant(fiber.atom_count(), 1.0);
        let t1 = t.apply(&one).unwrap();
        prop_assert!(t1.values().iter().all(|v| (v - 1.0).abs() <= 1e-10));
        // positivity and linearity
        let pos = xs[0].abs();
        prop_assert!(t.apply(&pos).unwrap().values().iter().all(|v| *v >= 0.0));
        let lhs = t.apply(&xs[0].combine(0.7, &xs[1], -1.3).unwrap()).unwrap();
        let rhs = t.apply(&xs[0]).unwrap().combine(0.7, &t.apply(&xs[1]).unwrap(), -1.3).unwrap();
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        // the modular does not grow
        let before = modular(&m, &fiber, &xs[0]).unwrap();
        let after = modular(&m, &fiber, &t.apply(&xs[0]).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-10 * before.max(1.0), "{after} > {before}");
    }

    #[test]
    fn fixed_point_survives_powers((fiber, seed, mixing, _xs) in operator_case(), k in 0i64..40) {
        let bundle = Bundle::single(fiber.clone());
        let t = generate_bundle_operator(&bundle, seed, mixing).unwrap();
        let h = t.fixed_point().clone();
        let tk = t.power_apply(&h, k).unwrap();
        prop_assert!(tk.component(0).values().iter().all(|v| (v - 1.0).abs() <= 1e-9));
    }
}

/// Largest eigenvalue modulus below 1 - 1e-8.
fn subdominant_modulus(op: &orlicz_ergodic::operators::FiberOperator) -> f64 {
    let n = op.dim();
    let a = nalgebra::DMatrix::from_fn(n, n, |j, i| op.entry(j, i));
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .filter(|r| *r < 1.0 - 1e-8)
        .fold(0.0, f64::max)
}

fn weight_sequence() -> impl Strategy<Value = WeightSequence> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(|c| WeightSequence::constant(c).unwrap()),
        prop::collection::vec((0.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..3).prop_map(|terms| {
            let terms = terms
                .into_iter()
                .map(|(theta, cos_coef, sin_coef)| TrigTerm { theta, cos_coef, sin_coef })
                .collect();
            WeightSequence::trig(TrigPolynomial::new(terms).unwrap()).unwrap()
        }),
    ]
}

fn bundle_case() -> impl Strategy<Value = (Bundle, BundleOperator, Section, Section)> {
    (prop::collection::vec(1usize..6, 1..4), any::<u64>()).prop_flat_map(|(sizes, seed)| {
        let total: usize = sizes.iter().sum();
        (
            prop::collection::vec(0.1f64..2.0, total),
            prop::collection::vec(-2.0f64..2.0, total),
            prop::collection::vec(-2.0f64..2.0, total),
        )
            .prop_map(move |(w, f, g)| {
                let mut fibers = Vec::new();
                let (mut fs, mut gs) = (Vec::new(), Vec::new());
                let mut at = 0;
                for &n in &sizes {
                    fibers.push(Fiber::new(w[at..at + n].to_vec()).unwrap());
                    fs.push(FiberVector::new(f[at..at + n].to_vec()).unwrap());
                    gs.push(FiberVector::new(g[at..at + n].to_vec()).unwrap());
                    at += n;
                }
                let bundle = Bundle::new(BaseSpace::new(vec![1.0; sizes.len()]).unwrap(), fibers).unwrap();
                let t = generate_bundle_operator(&bundle, seed, 0.3).unwrap();
                (bundle, t, Section::new(fs), Section::new(gs))
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn averages_are_linear((_b, t, f, g) in bundle_case(), w in weight_sequence(), a in -2.0f64..2.0, c in -2.0f64..2.0) {
        let params = AveragingParams::new(300);
        let combo = ergodic::weighted_averages(&t, &w, &f.combine(a, &g, c).unwrap(), &params).unwrap();
        let tf = ergodic::weighted_averages(&t, &w, &f, &params).unwrap();
        let tg = ergodic::weighted_averages(&t, &w, &g, &params).unwrap();
        for i in 0..combo.schedule.len() {
            let expect = tf.averages[i].combine(a, &tg.averages[i], c).unwrap();
            for (x, y) in combo.averages[i].components().iter().zip(expect.components()) {
                for (p, q) in x.values().iter().zip(y.values()) {
                    prop_assert!((p - q).abs() <= 1e-10, "{p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn sup_envelope_dominates((_b, t, f, _g) in bundle_case(), w in weight_sequence()) {
        let trace = ergodic::weighted_averages(&t, &w, &f, &AveragingParams::new(500)).unwrap();
        for avg in &trace.averages {
            prop_assert!(avg.abs().le(&trace.sup_envelope, 1e-12));
        }
    }

    #[test]
    fn average_norms_stay_bounded((bundle, t, f, _g) in bundle_case(), w in weight_sequence(), m in nfunction()) {
        let trace = ergodic::weighted_averages(&t, &w, &f, &AveragingParams::new(400)).unwrap();
        let f_norm = bundle.section_norm(&m, &f, NormKind::Luxemburg).unwrap();
        let bound = w.bound_through(400);
        for (n, avg) in trace.schedule.iter().zip(&trace.averages) {
            let norms = bundle.section_norm(&m, avg, NormKind::Luxemburg).unwrap();
            for (a, fnorm) in norms.values().iter().zip(f_norm.values()) {
                let cap = bound * fnorm * (*n as f64 - 1.0) / *n as f64;
                prop_assert!(*a <= cap + 1e-8 * cap.max(1.0), "n={n}: {a} > {cap}");
            }
        }
    }

    #[test]
    fn base_atoms_run_independently((bundle, t, f, _g) in bundle_case(), w in weight_sequence()) {
        let params = AveragingParams::new(200);
        let full = ergodic::weighted_averages(&t, &w, &f, &params).unwrap();
        for omega in 0..bundle.base_len() {
            let part = ergodic::weighted_averages(&t.restrict(omega).unwrap(), &w, &f.restrict(omega).unwrap(), &params).unwrap();
            for (a, b) in full.averages.iter().zip(&part.averages) {
                prop_assert_eq!(a.component(omega).values(), b.component(0).values());
            }
        }
    }

    /// Cesàro averages approach the spectral limit like `C/n`, where `C` is
    /// at most of order `‖f‖_∞ · bound(w) / (1 - ρ)` and `ρ` is the largest
    /// non-unimodular eigenvalue modulus; that product is the scale here.
    #[test]
    fn oracle_agrees_with_long_averages((bundle, t, f, _g) in bundle_case(), w in weight_sequence()) {
        let n_max = 4000;
        let trace = ergodic::weighted_averages(&t, &w, &f, &AveragingParams::new(n_max)).unwrap();
        for (omega, fiber) in bundle.fibers().iter().enumerate() {
            let op = &t.components()[omega];
            let x = f.component(omega);
            if let Some(p) = ergodic::spectral_limit_oracle(op, fiber, &w, x).unwrap() {
                let scale = x.max_abs() * w.bound() * (1.0 + 1.0 / (1.0 - subdominant_modulus(op)));
                let limit = 1e-4f64.max(10.0 / n_max as f64 * scale);
                let dev = trace.limit_estimate.component(omega).values().iter().zip(p.values())
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                prop_assert!(dev <= limit, "ω={omega}: {dev} > {limit}");
            }
        }
    }

    #[test]
    fn lattice_operations_are_atomwise((_b, _t, f, g) in bundle_case()) {
        let sup = section_sup(&[f.clone(), g.clone()]).unwrap();
        let inf = section_inf(&[f.clone(), g.clone()]).unwrap();
        for w in 0..f.base_len() {
            for i in 0..f.component(w).len() {
                let (a, b) = (f.component(w)[i], g.component(w)[i]);
                prop_assert_eq!(sup.component(w)[i], a.max(b));
                prop_assert_eq!(inf.component(w)[i], a.min(b));
            }
        }
    }

    #[test]
    fn order_convergence_of_shrinking_perturbations((_b, _t, f, g) in bundle_case(), decay in 0.5f64..0.95) {
        let trace: Vec<Section> = (0..200).map(|k| f.combine(1.0, &g, decay.powi(k)).unwrap()).collect();
        let rep = o_converges(&trace, &f, 100, 1e-3).unwrap();
        prop_assert!(rep.monotone);
        prop_assert!(rep.converged);
        let osc: Vec<Section> = (0..200).map(|k| f.combine(1.0, &g, if k % 2 == 0 { 1.0 } else { -1.0 }).unwrap()).collect();
        let rep = o_converges(&osc, &f, 100, 1e-3).unwrap();
        prop_assert_eq!(rep.converged, g.max_abs() <= 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbation_defect_is_harmonic(theta in 0.0f64..1.0, a in -1.0f64..1.0, delta in -1.0f64..1.0, n in 1u64..3000) {
        let psi = TrigPolynomial::single(theta, a, 0.0).unwrap();
        let w = WeightSequence::perturbed(psi.clone(), delta).unwrap();
        let d = weights::besicovich_defect(&w, &psi, n).unwrap();
        prop_assert!((d - delta.abs() * harmonic(n) / n as f64).abs() <= 1e-9);
        let clean = WeightSequence::trig(psi.clone()).unwrap();
        prop_assert_eq!(weights::besicovich_defect(&clean, &psi, n).unwrap(), 0.0);
    }

    #[test]
    fn defect_decays_along_doublings(theta in 0.0f64..1.0, delta in 0.01f64..1.0) {
        let psi = TrigPolynomial::single(theta, 1.0, 0.5).unwrap();
        let w = WeightSequence::perturbed(psi.clone(), delta).unwrap();
        prop_assert!(weights::defect_trend(&w, &psi, 1 << 12).unwrap().nonincreasing);
    }

    #[test]
    fn fit_is_least_squares(t1 in 0.05f64..0.45, t2 in 0.55f64..0.95, a in -1.0f64..1.0, b in -1.0f64..1.0, delta in -1.0f64..1.0, nudge in -0.1f64..0.1) {
        let psi = TrigPolynomial::new(vec![
            TrigTerm { theta: t1, cos_coef: a, sin_coef: b },
            TrigTerm { theta: t2, cos_coef: b, sin_coef: a },
        ]).unwrap();
        let w = WeightSequence::perturbed(psi.clone(), delta).unwrap();
        let n = 400;
        let (fit, defect) = weights::fit_trig_poly(&w, &[t1, t2], n).unwrap();
        prop_assert_eq!(defect, weights::besicovich_defect(&w, &fit, n).unwrap());
        // any nearby coefficient vector does no better in least squares
        let residual = weights::squared_residual(&w, &fit, n);
        let mut other: Vec<TrigTerm> = fit.terms().to_vec();
        other[0].cos_coef += nudge;
        other[1].sin_coef -= nudge;
        let other = TrigPolynomial::new(other).unwrap();
        prop_assert!(weights::squared_residual(&w, &other, n) >= residual - 1e-9 * residual.max(1.0));
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), n_max in 2usize..1_000_000, base in 1usize..=16, fiber in 1usize..=64, tol in 1e-9f64..1.0, k0 in any::<bool>(), mixing in 0.01f64..1.0) {
        let cfg = Config { seed, n_max, base_atoms: base, fiber_atoms: fiber, tol, include_k0: k0, mixing, ..Config::default() };
        prop_assert_eq!(Config::parse(&cfg.to_string()).unwrap(), cfg);
    }
}

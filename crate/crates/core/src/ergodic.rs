//! Weighted ergodic averages `Ã_n f = (1/n) Σ_{k=1}^{n-1} b(k) T^k f`, their
//! dominant supremum, order-convergence detection and a spectral prediction
//! of the limit.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::bundle::{o_converges, BaseVector, Bundle, OConvergenceReport, Section};
use crate::error::{usage, Result};
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::NFunction;
use crate::operators::{BundleOperator, FiberOperator};
use crate::orlicz;
use crate::weights::{neumaier_add, WeightKind, WeightSequence};

pub const DEFAULT_N_DENSE: usize = 64;
/// Growth factor of the recording schedule past the dense prefix.
pub const SCHEDULE_RATIO: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingParams {
    pub n_max: usize,
    pub n_dense: usize,
    /// Adds the `k = 0` term `b(0) f` (off by default).
    pub include_k0: bool,
}

impl AveragingParams {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            n_dense: DEFAULT_N_DENSE,
            include_k0: false,
        }
    }
}

/// Recorded values of `n`: every `n <= n_dense`, then a geometric ladder,
/// always ending at `n_max`. Returns the schedule and the index of its first
/// geometric entry (`len` if there is none).
pub fn schedule(n_max: usize, n_dense: usize) -> Result<(Vec<usize>, usize)> {
    if n_max < 1 {
        return Err(usage("averaging schedule is empty (n_max = 0)"));
    }
    let dense = n_dense.min(n_max);
    let mut ns: Vec<usize> = (1..=dense).collect();
    let first_geometric = ns.len();
    let mut n = dense.max(1);
    while n < n_max {
        n = ((n as f64 * SCHEDULE_RATIO).ceil() as usize).max(n + 1).min(n_max);
        ns.push(n);
    }
    Ok((ns, first_geometric))
}

/// Averages recorded along the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageTrace {
    pub schedule: Vec<usize>,
    pub averages: Vec<Section>,
    /// `sup_{m >= n recorded} |Ã_m - limit_estimate|`, one per recorded `n`.
    pub residual_envelopes: Vec<Section>,
    /// Sup over every `n <= n_max` of `(1/n) Σ |b(k)| T^k |f|`.
    pub sup_envelope: Section,
    /// `Ã` at the last recorded `n`.
    pub limit_estimate: Section,
    /// Index of the first geometric schedule entry, clamped to leave a tail.
    pub tail_start: usize,
    pub include_k0: bool,
}

/// Per-fiber run: averages at recorded `n` and prefix sups of the `|f|` averages.
struct FiberRun {
    averages: Vec<Vec<f64>>,
    prefix_sup: Vec<Vec<f64>>,
}

fn run_fiber(
    t: &FiberOperator,
    w: &WeightSequence,
    f: &[f64],
    schedule: &[usize],
    include_k0: bool,
) -> FiberRun {
    let dim = f.len();
    let n_max = *schedule.last().expect("nonempty schedule");
    let mut g = f.to_vec();
    let mut g_abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    let mut next = vec![0.0; dim];
    let (mut sum, mut comp) = (vec![0.0; dim], vec![0.0; dim]);
    let (mut sum_abs, mut comp_abs) = (vec![0.0; dim], vec![0.0; dim]);
    if include_k0 {
        let b0 = w.value_at_zero();
        for i in 0..dim {
            neumaier_add(&mut sum[i], &mut comp[i], b0 * g[i]);
            neumaier_add(&mut sum_abs[i], &mut comp_abs[i], b0.abs() * g_abs[i]);
        }
    }
    let mut running_sup = vec![f64::NEG_INFINITY; dim];
    let mut averages = Vec::with_capacity(schedule.len());
    let mut prefix_sup = Vec::with_capacity(schedule.len());
    let mut slot = 0;
    for n in 1..=n_max {
        // here sum = Σ_{k=1}^{n-1} b(k) T^k f
        let inv = 1.0 / n as f64;
        for i in 0..dim {
            running_sup[i] = running_sup[i].max((sum_abs[i] + comp_abs[i]) * inv);
        }
        if schedule[slot] == n {
            averages.push((0..dim).map(|i| (sum[i] + comp[i]) * inv).collect());
            prefix_sup.push(running_sup.clone());
            slot += 1;
        }
        if n == n_max {
            break;
        }
        let b = w.value(n as u64);
        t.apply_into(&g, &mut next);
        std::mem::swap(&mut g, &mut next);
        t.apply_into(&g_abs, &mut next);
        std::mem::swap(&mut g_abs, &mut next);
        for i in 0..dim {
            neumaier_add(&mut sum[i], &mut comp[i], b * g[i]);
            neumaier_add(&mut sum_abs[i], &mut comp_abs[i], b.abs() * g_abs[i]);
        }
    }
    FiberRun {
        averages,
        prefix_sup,
    }
}

fn run_bundle(
    t: &BundleOperator,
    w: &WeightSequence,
    f: &Section,
    params: &AveragingParams,
) -> Result<(Vec<usize>, usize, Vec<FiberRun>)> {
    if params.n_max < 2 {
        return Err(usage(format!("n_max must be at least 2, got {}", params.n_max)));
    }
    if f.base_len() != t.base_len()
        || t.components().iter().zip(f.components()).any(|(op, v)| op.dim() != v.len())
    {
        return Err(usage("section and operator cover different bundles"));
    }
    let (ns, first_geometric) = schedule(params.n_max, params.n_dense)?;
    let runs = t
        .components()
        .iter()
        .zip(f.components())
        .map(|(op, v)| run_fiber(op, w, v.values(), &ns, params.include_k0))
        .collect();
    Ok((ns, first_geometric, runs))
}

fn gather(runs: &[FiberRun], idx: usize, pick: fn(&FiberRun) -> &Vec<Vec<f64>>) -> Section {
    Section::new(
        runs.iter()
            .map(|r| FiberVector::from_vec_unchecked(pick(r)[idx].clone()))
            .collect(),
    )
}

/// Tail envelopes `sup_{m >= n} |trace_m - reference|`, for every index.
pub fn residual_envelopes(trace: &[Section], reference: &Section) -> Result<Vec<Section>> {
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    Ok(o_converges(trace, reference, 0, f64::INFINITY)?.envelopes)
}

/// Runs the weighted averages of `f` up to `params.n_max`.
///
/// Each step costs one application of `T` to `f` and one to `|f|`; every
/// fiber is processed independently in base-atom order.
pub fn weighted_averages(
    t: &BundleOperator,
    w: &WeightSequence,
    f: &Section,
    params: &AveragingParams,
) -> Result<AverageTrace> {
    let (ns, first_geometric, runs) = run_bundle(t, w, f, params)?;
    let last = ns.len() - 1;
    let averages: Vec<Section> = (0..ns.len()).map(|i| gather(&runs, i, |r| &r.averages)).collect();
    let sup_envelope = gather(&runs, last, |r| &r.prefix_sup);
    let limit_estimate = averages[last].clone();
    let residual_envelopes = residual_envelopes(&averages, &limit_estimate)?;
    Ok(AverageTrace {
        tail_start: first_geometric.min(ns.len().saturating_sub(2)),
        schedule: ns,
        averages,
        residual_envelopes,
        sup_envelope,
        limit_estimate,
        include_k0: params.include_k0,
    })
}

/// The dominant supremum of the `|f|` averages and its maximal ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantSup {
    pub sup: Section,
    /// `‖sup‖_(M) / (bound(w) · ‖f‖_(M))` per base atom, 0 where `f` vanishes.
    pub ratio: BaseVector,
    /// The ratio with the sup taken over `n <= schedule[i]`.
    pub ratio_history: Vec<(usize, BaseVector)>,
    pub weight_bound: f64,
    pub finite: bool,
}

/// Sup over all `n <= n_max` of `(1/n) Σ_{k=1}^{n-1} |b(k)| T^k |f|`.
pub fn dominant_sup(
    t: &BundleOperator,
    bundle: &Bundle,
    w: &WeightSequence,
    f: &Section,
    m: &NFunction,
    params: &AveragingParams,
) -> Result<DominantSup> {
    bundle.check_section(f)?;
    let (ns, _, runs) = run_bundle(t, w, f, params)?;
    let weight_bound = w.bound_through(params.n_max as u64);
    let f_norm = bundle.section_norm(m, f, crate::bundle::NormKind::Luxemburg)?;
    let ratio_at = |idx: usize| -> Result<BaseVector> {
        let values = runs
            .iter()
            .zip(bundle.fibers())
            .zip(f_norm.values())
            .map(|((r, fiber), &fn_)| {
                let denom = weight_bound * fn_;
                if denom == 0.0 {
                    return Ok(0.0);
                }
                let s = FiberVector::from_vec_unchecked(r.prefix_sup[idx].clone());
                Ok(orlicz::luxemburg_norm(m, fiber, &s)?.value / denom)
            })
            .collect::<Result<_>>()?;
        Ok(BaseVector::new(values))
    };
    let ratio_history = (0..ns.len())
        .map(|i| Ok((ns[i], ratio_at(i)?)))
        .collect::<Result<Vec<_>>>()?;
    let sup = gather(&runs, ns.len() - 1, |r| &r.prefix_sup);
    let ratio = ratio_history.last().expect("nonempty schedule").1.clone();
    let finite = sup.components().iter().all(|c| c.values().iter().all(|v| v.is_finite()));
    Ok(DominantSup {
        sup,
        ratio,
        ratio_history,
        weight_bound,
        finite,
    })
}

/// Order-convergence verdict for a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct OLimitReport {
    pub limit_estimate: Section,
    pub convergence: OConvergenceReport,
    pub per_base_converged: Vec<bool>,
    pub converged: bool,
}

/// Tests order convergence of the recorded averages toward the last one.
///
/// The final entry is the limit estimate, so it is left out of the envelope
/// computation; the tail starts at the first geometric schedule index.
pub fn detect_o_limit(trace: &AverageTrace, tol: f64) -> Result<OLimitReport> {
    let body = &trace.averages[..trace.averages.len() - 1];
    let convergence = o_converges(body, &trace.limit_estimate, trace.tail_start, tol)?;
    Ok(OLimitReport {
        limit_estimate: trace.limit_estimate.clone(),
        per_base_converged: convergence.per_base_converged.clone(),
        converged: convergence.converged,
        convergence,
    })
}

/// Unimodularity and eigenvalue-matching tolerance.
const SPECTRAL_TOL: f64 = 1e-8;

/// Predicted Cesàro limit of the weighted averages on one fiber, from the
/// spectral projections of `T` onto its unimodular eigenspaces.
///
/// Returns `None` (no prediction) when the Schur iteration fails or some
/// unimodular eigenvalue is defective. A perturbation `δ/k` contributes
/// nothing to the limit.
pub fn spectral_limit_oracle(
    t: &FiberOperator,
    fiber: &Fiber,
    w: &WeightSequence,
    f: &FiberVector,
) -> Result<Option<FiberVector>> {
    fiber.check(f)?;
    if t.dim() != fiber.atom_count() {
        return Err(usage("operator and fiber sizes differ"));
    }
    let n = t.dim();
    let a = DMatrix::from_fn(n, n, |j, i| t.entry(j, i));
    let Some(schur) = Schur::try_new(a.clone(), 1e-15, 10_000) else {
        return Ok(None);
    };
    let eigenvalues = schur.complex_eigenvalues();
    let ac = a.map(|v| Complex::new(v, 0.0));

    // every unimodular eigenvalue must be semisimple
    let unimodular: Vec<Complex<f64>> = eigenvalues
        .iter()
        .copied()
        .filter(|z| (z.norm() - 1.0).abs() < SPECTRAL_TOL)
        .collect();
    let mut seen: Vec<Complex<f64>> = Vec::new();
    for &z in &unimodular {
        if seen.iter().any(|s| (s - z).norm() < SPECTRAL_TOL) {
            continue;
        }
        seen.push(z);
        let target = z / z.norm();
        let algebraic = unimodular.iter().filter(|u| (*u - z).norm() < SPECTRAL_TOL).count();
        if null_bases(&ac, target).0.ncols() < algebraic {
            return Ok(None);
        }
    }

    let fc = DVector::from_iterator(n, f.values().iter().map(|&v| Complex::new(v, 0.0)));
    let project = |target: Complex<f64>| -> Option<DVector<Complex<f64>>> {
        if !unimodular.iter().any(|u| (u - target).norm() < SPECTRAL_TOL) {
            return Some(DVector::zeros(n));
        }
        let (v, u) = null_bases(&ac, target);
        // P = V (U* V)⁻¹ U*
        let coupling = u.adjoint() * &v;
        let inv = coupling.try_inverse()?;
        Some(&v * (inv * (u.adjoint() * &fc)))
    };

    let mut limit = DVector::<Complex<f64>>::zeros(n);
    let poly = match w.kind() {
        WeightKind::Constant(c) => {
            let Some(p1) = project(Complex::new(1.0, 0.0)) else {
                return Ok(None);
            };
            limit += p1 * Complex::new(*c, 0.0);
            None
        }
        WeightKind::Trig(p) | WeightKind::Perturbed { poly: p, .. } => Some(p),
    };
    if let Some(poly) = poly {
        for term in poly.terms() {
            let z = Complex::from_polar(1.0, std::f64::consts::TAU * term.theta);
            // (1/n) Σ z^k T^k f picks out the eigenvalue conj(z)
            let (Some(p_conj), Some(p_z)) = (project(z.conj()), project(z)) else {
                return Ok(None);
            };
            let half_a = Complex::new(term.cos_coef / 2.0, 0.0);
            let b_over_2i = Complex::new(0.0, -term.sin_coef / 2.0);
            limit += (&p_conj + &p_z) * half_a + (&p_conj - &p_z) * b_over_2i;
        }
    }
    Ok(Some(FiberVector::from_vec_unchecked(limit.iter().map(|z| z.re).collect())))
}

/// Bases of the right and left null spaces of `A - λI`.
fn null_bases(
    a: &DMatrix<Complex<f64>>,
    lambda: Complex<f64>,
) -> (DMatrix<Complex<f64>>, DMatrix<Complex<f64>>) {
    let n = a.nrows();
    let shifted = a - DMatrix::<Complex<f64>>::identity(n, n) * lambda;
    let tol = SPECTRAL_TOL * shifted.norm().max(1.0);
    (kernel_basis(&shifted, tol), kernel_basis(&shifted.adjoint(), tol))
}

/// Kernel of a square matrix by Gauss-Jordan elimination with complete
/// pivoting; elimination stops once every remaining entry is below `tol`.
fn kernel_basis(b: &DMatrix<Complex<f64>>, tol: f64) -> DMatrix<Complex<f64>> {
    let n = b.nrows();
    let mut m = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    while rank < n {
        let (mut pr, mut pc, mut best) = (rank, rank, 0.0);
        for c in rank..n {
            for r in rank..n {
                let v = m[(r, c)].norm();
                if v > best {
                    (pr, pc, best) = (r, c, v);
                }
            }
        }
        if best < tol {
            break;
        }
        m.swap_rows(rank, pr);
        m.swap_columns(rank, pc);
        perm.swap(rank, pc);
        let pivot = m[(rank, rank)];
        for c in rank..n {
            m[(rank, c)] /= pivot;
        }
        for r in 0..n {
            if r == rank {
                continue;
            }
            let factor = m[(r, rank)];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in rank..n {
                let v = m[(rank, c)];
                m[(r, c)] -= factor * v;
            }
        }
        rank += 1;
    }
    let free = n - rank;
    let mut basis = DMatrix::<Complex<f64>>::zeros(n, free);
    for k in 0..free {
        let col = rank + k;
        basis[(perm[col], k)] = Complex::new(1.0, 0.0);
        for r in 0..rank {
            basis[(perm[r], k)] = -m[(r, col)];
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::TrigPolynomial;
    use approx::assert_abs_diff_eq;

    fn one_fiber(n: usize) -> (Bundle, Fiber) {
        let fiber = Fiber::uniform(n).unwrap();
        (Bundle::single(fiber.clone()), fiber)
    }

    #[test]
    fn schedule_shape() {
        let (ns, g) = schedule(1000, 64).unwrap();
        assert_eq!(&ns[..64], &(1..=64).collect::<Vec<_>>()[..]);
        assert_eq!(g, 64);
        assert_eq!(ns[64], 80);
        assert_eq!(*ns.last().unwrap(), 1000);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
        let (ns, g) = schedule(10, 64).unwrap();
        assert_eq!(ns, (1..=10).collect::<Vec<_>>());
        assert_eq!(g, 10);
    }

    #[test]
    fn first_average_is_zero_and_identity_closed_form() {
        let (b, _) = one_fiber(3);
        let t = BundleOperator::identity(&b);
        let f = Section::new(vec![FiberVector::new(vec![1.0, -2.0, 0.5]).unwrap()]);
        let w = WeightSequence::constant(1.0).unwrap();
        let tr = weighted_averages(&t, &w, &f, &AveragingParams::new(200)).unwrap();
        assert!(tr.averages[0].max_abs() == 0.0);
        for (n, a) in tr.schedule.iter().zip(&tr.averages) {
            let expect = f.scale((*n as f64 - 1.0) / *n as f64);
            assert!(a.combine(1.0, &expect, -1.0).unwrap().max_abs() <= 1e-15);
        }
    }

    #[test]
    fn include_k0_adds_first_term() {
        let (b, _) = one_fiber(2);
        let t = BundleOperator::identity(&b);
        let f = Section::constant(&b, 2.0);
        let w = WeightSequence::constant(1.0).unwrap();
        let mut p = AveragingParams::new(10);
        p.include_k0 = true;
        let tr = weighted_averages(&t, &w, &f, &p).unwrap();
        for a in &tr.averages {
            assert_abs_diff_eq!(a.max_abs(), 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn swap_oracles() {
        let fiber = Fiber::uniform(2).unwrap();
        let swap = FiberOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let f = FiberVector::new(vec![1.0, 0.0]).unwrap();
        let w = WeightSequence::constant(1.0).unwrap();
        let p = spectral_limit_oracle(&swap, &fiber, &w, &f).unwrap().unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-12);
        let alt = WeightSequence::trig(TrigPolynomial::single(0.5, 1.0, 0.0).unwrap()).unwrap();
        let p = spectral_limit_oracle(&swap, &fiber, &alt, &f).unwrap().unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_invariant_mean_on_mixing_operators() {
        for (n, seed) in [(8, 5u64), (11, 6), (16, 7), (32, 8)] {
            let fiber = Fiber::new((0..n).map(|i| 0.3 + 0.2 * i as f64).collect()).unwrap();
            let t = crate::operators::generate_admissible(&fiber, seed, 0.2).unwrap();
            let f = FiberVector::new((0..n).map(|i| (i as f64 * 1.7).sin()).collect()).unwrap();
            let w = WeightSequence::constant(1.0).unwrap();
            let p = spectral_limit_oracle(&t, &fiber, &w, &f).unwrap().unwrap();
            let mean = crate::oracles::invariant_mean(&fiber, &f).unwrap();
            for i in 0..n {
                assert_abs_diff_eq!(p[i], mean[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn identity_oracle_is_f() {
        let fiber = Fiber::uniform(4).unwrap();
        let f = FiberVector::new(vec![1.0, -3.0, 2.0, 0.25]).unwrap();
        let w = WeightSequence::constant(1.0).unwrap();
        let p = spectral_limit_oracle(&FiberOperator::identity(4), &fiber, &w, &f)
            .unwrap()
            .unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(p[i], f[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn defective_unimodular_declines() {
        // Jordan block at 1 (not a contraction, but exercises the decline path)
        let fiber = Fiber::uniform(2).unwrap();
        let t = FiberOperator::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let f = FiberVector::new(vec![1.0, 1.0]).unwrap();
        let w = WeightSequence::constant(1.0).unwrap();
        assert!(spectral_limit_oracle(&t, &fiber, &w, &f).unwrap().is_none());
    }

    #[test]
    fn dominant_sup_identity_ratio_tends_to_one() {
        let (b, _) = one_fiber(3);
        let t = BundleOperator::identity(&b);
        let f = Section::new(vec![FiberVector::new(vec![1.0, -2.0, 0.5]).unwrap()]);
        let w = WeightSequence::constant(1.0).unwrap();
        let m = NFunction::power(2.0, 1.0).unwrap();
        let d = dominant_sup(&t, &b, &w, &f, &m, &AveragingParams::new(1000)).unwrap();
        assert_abs_diff_eq!(d.ratio.values()[0], 0.999, epsilon = 1e-9);
        assert!(d.ratio_history.windows(2).all(|w| w[1].1.values()[0] >= w[0].1.values()[0]));
        let z = dominant_sup(&t, &b, &w, &Section::zeros(&b), &m, &AveragingParams::new(50)).unwrap();
        assert_eq!(z.ratio.values()[0], 0.0);
        assert_eq!(z.sup.max_abs(), 0.0);
    }

    #[test]
    fn identity_detects_convergence() {
        let (b, _) = one_fiber(2);
        let t = BundleOperator::identity(&b);
        let f = Section::constant(&b, 1.0);
        let w = WeightSequence::constant(1.0).unwrap();
        let tr = weighted_averages(&t, &w, &f, &AveragingParams::new(10_000)).unwrap();
        let r = detect_o_limit(&tr, 1e-3).unwrap();
        assert!(r.converged);
        assert!(r.convergence.monotone);
    }
}

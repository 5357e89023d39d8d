//! Positive fiberwise operators and the contraction conditions that make
//! their weighted averages converge.
//!
//! An operator on a bundle is a family of nonnegative matrices, one per base
//! atom, together with a recorded positive fixed point `h`. It is
//! *admissible* when on every fiber
//!
//! * (i) `∫ M(|T f|) dμ <= ∫ M(|f|) dμ` (sampled),
//! * (ii) `‖T‖_{L₁→L₁} <= 1` (exact for positive matrices on atomic `L₁`),
//! * (iii) `T h = h` with `h(ω) != 0` (exact residual),
//!
//! plus the fiberwise contraction surrogates `‖T f‖_(M) <= ‖f‖_(M)` and
//! `‖T f‖_∞ <= ‖f‖_∞` on the same samples.

use rand::Rng;

use crate::bundle::{Bundle, Section};
use crate::error::{domain, usage, Error, Result};
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::NFunction;
use crate::orlicz;
use crate::seed;

pub const L1_NORM_SLACK: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const MODULAR_SLACK: f64 = 1e-10;
pub const LUXEMBURG_SLACK: f64 = 1e-9;
pub const LINF_SLACK: f64 = 1e-10;

const SINKHORN_TOL: f64 = 1e-12;
const SINKHORN_MAX_SWEEPS: usize = 100_000;

/// Nonnegative `n×n` matrix acting by `(T x)_j = Σ_i T_{ji} x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator {
    n: usize,
    /// Row-major, `entries[j*n + i] = T_{ji}`.
    entries: Vec<f64>,
}

impl FiberOperator {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(usage(format!("operator needs {n}x{n} entries, got {}", entries.len())));
        }
        if let Some(v) = entries.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("operator entries must be finite and >= 0, got {v}")));
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(usage("operator rows must form a square matrix"));
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `T_{ji}`.
    pub fn entry(&self, j: usize, i: usize) -> f64 {
        self.entries[j * self.n + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|v| c * v).collect())
    }

    pub fn apply(&self, x: &FiberVector) -> Result<FiberVector> {
        if x.len() != self.n {
            return Err(usage(format!(
                "operator of size {} applied to a vector of length {}",
                self.n,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.n];
        self.apply_into(x.values(), &mut out);
        Ok(FiberVector::from_vec_unchecked(out))
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.entries.chunks(self.n)) {
            *o = row.iter().zip(x).map(|(t, v)| t * v).sum();
        }
    }

    /// `max_i (1/μ_i) Σ_j μ_j T_{ji}`, the exact `L₁(μ)` operator norm.
    pub fn l1_operator_norm(&self, fiber: &Fiber) -> Result<f64> {
        if fiber.atom_count() != self.n {
            return Err(usage("operator and fiber sizes differ"));
        }
        let mu = fiber.weights();
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| mu[j] * self.entry(j, i)).sum::<f64>() / mu[i])
            .fold(0.0, f64::max))
    }
}

/// One [`FiberOperator`] per base atom and a positive fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleOperator {
    components: Vec<FiberOperator>,
    fixed_point: Section,
}

impl BundleOperator {
    /// `fixed_point` must be nonnegative and nonzero on every fiber; the
    /// residual `T h - h` is checked by [`verify_conditions`], not here.
    pub fn new(components: Vec<FiberOperator>, fixed_point: Section) -> Result<Self> {
        if components.len() != fixed_point.base_len() {
            return Err(usage("fixed point and operator cover different base sizes"));
        }
        for (omega, (t, h)) in components.iter().zip(fixed_point.components()).enumerate() {
            if t.dim() != h.len() {
                return Err(usage(format!("fixed point at base atom {omega} has the wrong length")));
            }
            if h.values().iter().any(|&v| v < 0.0) {
                return Err(domain(format!("fixed point at base atom {omega} is not positive")));
            }
            if h.max_abs() == 0.0 {
                return Err(domain(format!("fixed point vanishes at base atom {omega}")));
            }
        }
        Ok(Self {
            components,
            fixed_point,
        })
    }

    /// Identity on every fiber, fixed point `1`.
    pub fn identity(bundle: &Bundle) -> Self {
        Self {
            components: bundle
                .fibers()
                .iter()
                .map(|f| FiberOperator::identity(f.atom_count()))
                .collect(),
            fixed_point: Section::constant(bundle, 1.0),
        }
    }

    pub fn components(&self) -> &[FiberOperator] {
        &self.components
    }

    pub fn fixed_point(&self) -> &Section {
        &self.fixed_point
    }

    pub fn base_len(&self) -> usize {
        self.components.len()
    }

    /// Per base atom components.
    pub fn decompose(&self) -> Vec<(usize, &FiberOperator)> {
        self.components.iter().enumerate().collect()
    }

    /// The operator restricted to base atom `omega`.
    pub fn restrict(&self, omega: usize) -> Result<Self> {
        let t = self
            .components
            .get(omega)
            .ok_or_else(|| usage(format!("base atom {omega} out of range")))?;
        Ok(Self {
            components: vec![t.clone()],
            fixed_point: self.fixed_point.restrict(omega)?,
        })
    }

    /// Replaces the component at `omega`.
    pub fn with_component(&self, omega: usize, t: FiberOperator) -> Result<Self> {
        let mut components = self.components.clone();
        let slot = components
            .get_mut(omega)
            .ok_or_else(|| usage(format!("base atom {omega} out of range")))?;
        *slot = t;
        Self::new(components, self.fixed_point.clone())
    }

    pub fn apply(&self, f: &Section) -> Result<Section> {
        if f.base_len() != self.base_len() {
            return Err(usage("section and operator cover different base sizes"));
        }
        Ok(Section::new(
            self.components
                .iter()
                .zip(f.components())
                .map(|(t, v)| t.apply(v))
                .collect::<Result<_>>()?,
        ))
    }

    /// `T^k f`.
    pub fn power_apply(&self, f: &Section, k: i64) -> Result<Section> {
        if k < 0 {
            return Err(domain(format!("operator power must be >= 0, got {k}")));
        }
        let mut out = f.clone();
        for _ in 0..k {
            out = self.apply(&out)?;
        }
        Ok(out)
    }
}

/// Generates a μ-doubly-stochastic operator on `fiber`.
///
/// A random positive matrix is blended with the identity (`mixing` is the
/// identity's weight, so `mixing = 1` returns the identity) and then scaled
/// as `T_{ji} = a_j K_{ji} c_i` by alternating row and μ-weighted column
/// normalization until `T·1 = 1` and `Σ_j μ_j T_{ji} = μ_i` both hold to
/// `1e-12`. Such a `T` has `L₁` norm 1, fixes `1`, and contracts every
/// convex modular by Jensen's inequality.
pub fn generate_admissible(fiber: &Fiber, seed: u64, mixing: f64) -> Result<FiberOperator> {
    if !(mixing > 0.0 && mixing <= 1.0) {
        return Err(domain(format!("mixing must lie in (0, 1], got {mixing}")));
    }
    let n = fiber.atom_count();
    let mu = fiber.weights();
    let mut rng = seed::rng(seed);
    let mut kernel = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let noise: f64 = rng.random_range(0.05..1.0);
            kernel[j * n + i] = (1.0 - mixing) * noise + if i == j { mixing } else { 0.0 };
        }
    }
    let mut a = vec![1.0; n];
    let mut c = vec![1.0; n];
    let build = |a: &[f64], c: &[f64]| -> Vec<f64> {
        let mut t = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                t[j * n + i] = a[j] * kernel[j * n + i] * c[i];
            }
        }
        t
    };
    for _ in 0..SINKHORN_MAX_SWEEPS {
        for j in 0..n {
            let s: f64 = (0..n).map(|i| kernel[j * n + i] * c[i]).sum();
            a[j] = 1.0 / s;
        }
        for i in 0..n {
            let s: f64 = (0..n).map(|j| mu[j] * a[j] * kernel[j * n + i]).sum();
            c[i] = mu[i] / s;
        }
        let t = build(&a, &c);
        let (row, col) = stochastic_residuals(&t, mu);
        if row < SINKHORN_TOL && col < SINKHORN_TOL {
            return FiberOperator::new(n, t);
        }
    }
    Err(Error::Generation(format!(
        "weighted Sinkhorn balancing did not reach {SINKHORN_TOL:e} within {SINKHORN_MAX_SWEEPS} sweeps (seed {seed})"
    )))
}

/// Row residual `max_j |Σ_i T_{ji} - 1|` and relative column residual.
fn stochastic_residuals(t: &[f64], mu: &[f64]) -> (f64, f64) {
    let n = mu.len();
    let row = (0..n)
        .map(|j| ((0..n).map(|i| t[j * n + i]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let col = (0..n)
        .map(|i| ((0..n).map(|j| mu[j] * t[j * n + i]).sum::<f64>() - mu[i]).abs() / mu[i])
        .fold(0.0, f64::max);
    (row, col)
}

/// Admissible operator on every fiber of `bundle` with fixed point `1`.
///
/// Fiber `ω` uses the sub-seed `indexed_seed(seed, ω)`.
pub fn generate_bundle_operator(bundle: &Bundle, seed: u64, mixing: f64) -> Result<BundleOperator> {
    let components = bundle
        .fibers()
        .iter()
        .enumerate()
        .map(|(omega, f)| generate_admissible(f, seed::indexed_seed(seed, omega as u64), mixing))
        .collect::<Result<_>>()?;
    BundleOperator::new(components, Section::constant(bundle, 1.0))
}

/// Per-fiber outcome of the admissibility checks.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberConditionReport {
    pub omega: usize,
    /// (ii)
    pub l1_norm: f64,
    pub l1_pass: bool,
    /// (iii): `‖T h - h‖_∞`
    pub fixed_point_residual: f64,
    pub fixed_point_pass: bool,
    /// (i), sampled evidence only: worst `∫M(|Tf|) - ∫M(|f|)`.
    pub modular_excess: f64,
    pub modular_pass: bool,
    /// Worst `‖Tf‖_(M) - ‖f‖_(M)` on the samples.
    pub luxemburg_excess: f64,
    pub luxemburg_pass: bool,
    /// Worst `‖Tf‖_∞ - ‖f‖_∞` on the samples.
    pub linf_excess: f64,
    pub linf_pass: bool,
    pub samples: usize,
}

impl FiberConditionReport {
    pub fn passes(&self) -> bool {
        self.l1_pass && self.fixed_point_pass && self.modular_pass && self.luxemburg_pass && self.linf_pass
    }

    /// `(condition, passed, residual)` rows in a fixed order.
    pub fn rows(&self) -> [(&'static str, bool, f64); 5] {
        [
            ("l1_contraction", self.l1_pass, self.l1_norm),
            ("fixed_point", self.fixed_point_pass, self.fixed_point_residual),
            ("modular_contraction_sampled", self.modular_pass, self.modular_excess),
            ("luxemburg_contraction_sampled", self.luxemburg_pass, self.luxemburg_excess),
            ("linf_contraction_sampled", self.linf_pass, self.linf_excess),
        ]
    }
}

/// Outcome of [`verify_conditions`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub fibers: Vec<FiberConditionReport>,
}

impl ConditionReport {
    pub fn admissible(&self) -> bool {
        self.fibers.iter().all(FiberConditionReport::passes)
    }
}

/// Random test vector: dense with a random scale, or a scaled indicator of one atom.
fn sample_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-1.3..0.5));
    if rng.random_bool(0.2) {
        let mut v = vec![0.0; n];
        v[rng.random_range(0..n)] = scale * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        v
    } else {
        (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
    }
}

/// Checks (i)–(iii) and the contraction surrogates on one fiber.
pub fn fiber_condition_report(
    omega: usize,
    t: &FiberOperator,
    fiber: &Fiber,
    h: &FiberVector,
    m: &NFunction,
    sample_count: usize,
    seed: u64,
) -> Result<FiberConditionReport> {
    m.validate()?;
    if t.dim() != fiber.atom_count() || h.len() != fiber.atom_count() {
        return Err(usage(format!("operator, fiber and fixed point sizes differ at base atom {omega}")));
    }
    let n = t.dim();
    let l1_norm = t.l1_operator_norm(fiber)?;
    let th = t.apply(h)?;
    let fixed_point_residual = th
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut rng = seed::rng(seed);
    let mut modular_excess = f64::NEG_INFINITY;
    let mut luxemburg_excess = f64::NEG_INFINITY;
    let mut linf_excess = f64::NEG_INFINITY;
    let (mut modular_pass, mut luxemburg_pass, mut linf_pass) = (true, true, true);
    let mut tf = vec![0.0; n];
    for _ in 0..sample_count {
        let f = FiberVector::from_vec_unchecked(sample_vector(&mut rng, n));
        t.apply_into(f.values(), &mut tf);
        let tf_vec = FiberVector::from_vec_unchecked(tf.clone());

        let before = orlicz::modular(m, fiber, &f)?;
        let after = orlicz::modular(m, fiber, &tf_vec)?;
        modular_excess = modular_excess.max(after - before);
        modular_pass &= after <= before + MODULAR_SLACK * before.max(1.0);

        let before = orlicz::luxemburg_norm(m, fiber, &f)?.value;
        let after = orlicz::luxemburg_norm(m, fiber, &tf_vec)?.value;
        luxemburg_excess = luxemburg_excess.max(after - before);
        luxemburg_pass &= after <= before + LUXEMBURG_SLACK * before.max(1.0);

        let before = f.max_abs();
        let after = tf_vec.max_abs();
        linf_excess = linf_excess.max(after - before);
        linf_pass &= after <= before + LINF_SLACK * before.max(1.0);
    }
    if sample_count == 0 {
        modular_excess = 0.0;
        luxemburg_excess = 0.0;
        linf_excess = 0.0;
    }
    Ok(FiberConditionReport {
        omega,
        l1_norm,
        l1_pass: l1_norm <= 1.0 + L1_NORM_SLACK,
        fixed_point_residual,
        fixed_point_pass: fixed_point_residual <= FIXED_POINT_TOL && h.max_abs() > 0.0,
        modular_excess,
        modular_pass,
        luxemburg_excess,
        luxemburg_pass,
        linf_excess,
        linf_pass,
        samples: sample_count,
    })
}

/// Runs [`fiber_condition_report`] on every fiber; fiber `ω` samples with
/// `indexed_seed(seed, ω)`, so each row depends only on its own fiber.
pub fn verify_conditions(
    t: &BundleOperator,
    bundle: &Bundle,
    m: &NFunction,
    sample_count: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if t.base_len() != bundle.base_len() {
        return Err(usage("operator and bundle cover different base sizes"));
    }
    let fibers = t
        .decompose()
        .into_iter()
        .map(|(omega, op)| {
            fiber_condition_report(
                omega,
                op,
                bundle.fiber(omega),
                t.fixed_point().component(omega),
                m,
                sample_count,
                seed::indexed_seed(seed, omega as u64),
            )
        })
        .collect::<Result<_>>()?;
    Ok(ConditionReport { fibers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn swap_permutes() {
        let t = FiberOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let f = FiberVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(t.apply(&f).unwrap().values(), &[2.0, 1.0]);
    }

    #[test]
    fn l1_norm_examples() {
        let f = Fiber::uniform(3).unwrap();
        assert_eq!(FiberOperator::identity(3).l1_operator_norm(&f).unwrap(), 1.0);
        let mut entries = vec![0.0; 9];
        entries[0] = 2.0;
        let t = FiberOperator::new(3, entries).unwrap();
        assert_eq!(t.l1_operator_norm(&f).unwrap(), 2.0);
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(FiberOperator::new(1, vec![-0.1]).is_err());
        assert!(FiberOperator::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn negative_power_rejected() {
        let fiber = Fiber::uniform(2).unwrap();
        let b = Bundle::single(fiber);
        let t = BundleOperator::identity(&b);
        assert!(matches!(
            t.power_apply(&Section::zeros(&b), -1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn mixing_one_gives_identity() {
        let fiber = Fiber::new(vec![0.2, 1.0, 3.0]).unwrap();
        let t = generate_admissible(&fiber, 11, 1.0).unwrap();
        assert_eq!(t, FiberOperator::identity(3));
        assert!(generate_admissible(&fiber, 11, 0.0).is_err());
        assert!(generate_admissible(&fiber, 11, 1.5).is_err());
    }

    #[test]
    fn uniform_generator_is_doubly_stochastic() {
        let fiber = Fiber::uniform(6).unwrap();
        let t = generate_admissible(&fiber, 3, 0.2).unwrap();
        for j in 0..6 {
            let row: f64 = (0..6).map(|i| t.entry(j, i)).sum();
            let col: f64 = (0..6).map(|i| t.entry(i, j)).sum();
            assert_relative_eq!(row, 1.0, epsilon = 1e-12);
            assert_relative_eq!(col, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn doubled_identity_is_rejected() {
        let fiber = Fiber::uniform(3).unwrap();
        let b = Bundle::single(fiber.clone());
        let t = BundleOperator::new(
            vec![FiberOperator::identity(3).scaled(2.0).unwrap()],
            Section::constant(&b, 1.0),
        )
        .unwrap();
        let m = NFunction::power(2.0, 1.0).unwrap();
        let r = verify_conditions(&t, &b, &m, 50, 1).unwrap();
        let f = &r.fibers[0];
        assert!(!f.l1_pass);
        assert_eq!(f.l1_norm, 2.0);
        assert!(!f.modular_pass);
        assert!(!r.admissible());
    }

    #[test]
    fn fixed_point_must_be_nonzero() {
        let fiber = Fiber::uniform(2).unwrap();
        let b = Bundle::single(fiber);
        assert!(BundleOperator::new(vec![FiberOperator::identity(2)], Section::zeros(&b)).is_err());
    }
}

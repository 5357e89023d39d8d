//! Bundles of finite fibers over a finite base, and their sections.
//!
//! A [`Bundle`] assigns one [`Fiber`] to every base atom. Global objects are
//! sections (one fiber vector per base atom) and global measures and norms
//! are [`BaseVector`]s, i.e. functions of the base point. Everything is
//! computed base atom by base atom in index order.

use crate::error::{domain, usage, Result};
use crate::measure::{Fiber, FiberIdempotent, FiberVector};
use crate::nfunction::NFunction;
use crate::orlicz;

/// Base atoms with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSpace {
    weights: Vec<f64>,
}

impl BaseSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(domain("base space needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain(format!("base weights must be finite and positive, got {w}")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// One fiber per base atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    base: BaseSpace,
    fibers: Vec<Fiber>,
}

/// A real function of the base point: values of measures and norms.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseVector(Vec<f64>);

impl BaseVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Componentwise `self <= other + slack`.
    pub fn le(&self, other: &Self, slack: f64) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| *a <= b + slack)
    }
}

/// One fiber vector per base atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Section(Vec<FiberVector>);

/// One fiber idempotent per base atom.
#[derive(Debug, Clone, PartialEq)]
pub struct IdempotentSection(Vec<FiberIdempotent>);

impl IdempotentSection {
    pub fn new(components: Vec<FiberIdempotent>) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[FiberIdempotent] {
        &self.0
    }

    pub fn top(bundle: &Bundle) -> Self {
        Self(bundle.fibers.iter().map(|f| FiberIdempotent::top(f.atom_count())).collect())
    }

    pub fn bottom(bundle: &Bundle) -> Self {
        Self(bundle.fibers.iter().map(|f| FiberIdempotent::bottom(f.atom_count())).collect())
    }

    pub fn join(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.join(b)).collect())
    }

    pub fn meet(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a.meet(b)).collect())
    }
}

/// Fiber norm used for the L₀-valued section norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Luxemburg,
    Orlicz,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Luxemburg => "luxemburg",
            NormKind::Orlicz => "orlicz",
        }
    }
}

impl Section {
    pub fn new(components: Vec<FiberVector>) -> Self {
        Self(components)
    }

    pub fn zeros(bundle: &Bundle) -> Self {
        Self(bundle.fibers.iter().map(|f| FiberVector::zeros(f.atom_count())).collect())
    }

    pub fn constant(bundle: &Bundle, c: f64) -> Self {
        Self(
            bundle
                .fibers
                .iter()
                .map(|f| FiberVector::constant(f.atom_count(), c))
                .collect(),
        )
    }

    pub fn components(&self) -> &[FiberVector] {
        &self.0
    }

    pub fn component(&self, omega: usize) -> &FiberVector {
        &self.0[omega]
    }

    pub fn base_len(&self) -> usize {
        self.0.len()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.len() == b.len())
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(FiberVector::abs).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v.scale(c)).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(usage("sections are bound to different bundles"));
        }
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| x.combine(a, y, b))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }

    /// Per base atom sup-norm.
    pub fn fiber_max_abs(&self) -> BaseVector {
        BaseVector(self.0.iter().map(FiberVector::max_abs).collect())
    }

    /// Componentwise `self <= other + slack`.
    pub fn le(&self, other: &Self, slack: f64) -> bool {
        self.same_shape(other)
            && self.0.iter().zip(&other.0).all(|(a, b)| {
                a.values().iter().zip(b.values()).all(|(x, y)| *x <= y + slack)
            })
    }

    /// The single-base-atom section at `omega`.
    pub fn restrict(&self, omega: usize) -> Result<Self> {
        self.0
            .get(omega)
            .map(|c| Self(vec![c.clone()]))
            .ok_or_else(|| usage(format!("base atom {omega} out of range")))
    }
}

impl Bundle {
    pub fn new(base: BaseSpace, fibers: Vec<Fiber>) -> Result<Self> {
        if fibers.len() != base.len() {
            return Err(usage(format!(
                "{} fibers for {} base atoms",
                fibers.len(),
                base.len()
            )));
        }
        Ok(Self { base, fibers })
    }

    /// A bundle over a single base atom of weight 1.
    pub fn single(fiber: Fiber) -> Self {
        Self {
            base: BaseSpace { weights: vec![1.0] },
            fibers: vec![fiber],
        }
    }

    pub fn base(&self) -> &BaseSpace {
        &self.base
    }

    pub fn fibers(&self) -> &[Fiber] {
        &self.fibers
    }

    pub fn fiber(&self, omega: usize) -> &Fiber {
        &self.fibers[omega]
    }

    pub fn base_len(&self) -> usize {
        self.fibers.len()
    }

    /// The one-fiber bundle over base atom `omega`.
    pub fn restrict(&self, omega: usize) -> Result<Self> {
        let fiber = self
            .fibers
            .get(omega)
            .ok_or_else(|| usage(format!("base atom {omega} out of range")))?;
        Ok(Self {
            base: BaseSpace {
                weights: vec![self.base.weights[omega]],
            },
            fibers: vec![fiber.clone()],
        })
    }

    pub fn check_section(&self, f: &Section) -> Result<()> {
        if f.base_len() != self.base_len() {
            return Err(usage(format!(
                "section over {} base atoms, bundle has {}",
                f.base_len(),
                self.base_len()
            )));
        }
        for (fiber, v) in self.fibers.iter().zip(f.components()) {
            fiber.check(v)?;
        }
        Ok(())
    }

    fn check_idempotents(&self, e: &IdempotentSection) -> Result<()> {
        if e.0.len() != self.base_len()
            || e.0.iter().zip(&self.fibers).any(|(c, f)| c.len() != f.atom_count())
        {
            return Err(usage("idempotent section is not bound to this bundle"));
        }
        Ok(())
    }

    /// The L₀-valued measure `ω ↦ μ_ω(e(ω))`.
    pub fn measure_of(&self, e: &IdempotentSection) -> Result<BaseVector> {
        self.check_idempotents(e)?;
        Ok(BaseVector(
            self.fibers
                .iter()
                .zip(&e.0)
                .map(|(f, c)| f.measure(c))
                .collect::<Result<_>>()?,
        ))
    }

    /// Largest componentwise gap between `μ(g·e)` and `g·μ(e)` for a 0/1 base function `g`.
    pub fn module_property_check(&self, g: &BaseVector, e: &IdempotentSection) -> Result<f64> {
        if g.len() != self.base_len() {
            return Err(usage("base function length does not match the bundle"));
        }
        if g.values().iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(domain("module property needs a 0/1-valued base function"));
        }
        let ge = IdempotentSection(
            e.0.iter()
                .zip(g.values())
                .map(|(c, &gv)| {
                    if gv == 0.0 {
                        FiberIdempotent::bottom(c.len())
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        );
        let lhs = self.measure_of(&ge)?;
        let rhs = self.measure_of(e)?;
        Ok(lhs
            .values()
            .iter()
            .zip(rhs.values().iter().zip(g.values()))
            .map(|(l, (r, gv))| (l - gv * r).abs())
            .fold(0.0, f64::max))
    }

    /// The L₀-valued norm `ω ↦ ‖f(ω)‖` for the chosen fiber norm.
    pub fn section_norm(&self, m: &NFunction, f: &Section, kind: NormKind) -> Result<BaseVector> {
        self.check_section(f)?;
        let values = self
            .fibers
            .iter()
            .zip(f.components())
            .map(|(fiber, v)| match kind {
                NormKind::Luxemburg => orlicz::luxemburg_norm(m, fiber, v).map(|r| r.value),
                NormKind::Orlicz => orlicz::orlicz_norm(m, fiber, v).map(|r| r.value),
            })
            .collect::<Result<_>>()?;
        Ok(BaseVector(values))
    }
}

fn lattice_fold(fs: &[Section], pick: fn(f64, f64) -> f64) -> Result<Section> {
    let (first, rest) = fs
        .split_first()
        .ok_or_else(|| usage("supremum of an empty family"))?;
    let mut out = first.clone();
    for f in rest {
        if !f.same_shape(&out) {
            return Err(usage("sections are bound to different bundles"));
        }
        for (acc, v) in out.0.iter_mut().zip(&f.0) {
            for (a, b) in acc.values_mut().iter_mut().zip(v.values()) {
                *a = pick(*a, *b);
            }
        }
    }
    Ok(out)
}

/// Least upper bound of a finite family, computed fiber by fiber and atom by atom.
pub fn section_sup(fs: &[Section]) -> Result<Section> {
    lattice_fold(fs, f64::max)
}

/// Greatest lower bound of a finite family.
pub fn section_inf(fs: &[Section]) -> Result<Section> {
    lattice_fold(fs, f64::min)
}

/// Outcome of [`o_converges`].
#[derive(Debug, Clone, PartialEq)]
pub struct OConvergenceReport {
    pub tail_start: usize,
    /// `d_n = sup_{m >= n} |f_m - limit|` for `n = tail_start..len`.
    pub envelopes: Vec<Section>,
    /// Envelopes are componentwise nonincreasing.
    pub monotone: bool,
    /// Largest atom value of the last envelope.
    pub final_max: f64,
    pub per_base_final: BaseVector,
    pub per_base_converged: Vec<bool>,
    pub converged: bool,
}

/// Order convergence on a finite trace: the tail envelopes must decay below `tol`.
///
/// The envelope `d_n` dominates `|f_m - limit|` for all `m >= n` and is
/// nonincreasing in `n`; the verdict is taken on the last envelope, per base
/// atom and globally.
pub fn o_converges(
    trace: &[Section],
    limit: &Section,
    tail_start: usize,
    tol: f64,
) -> Result<OConvergenceReport> {
    if tail_start >= trace.len() {
        return Err(usage(format!(
            "tail_start {tail_start} beyond a trace of length {}",
            trace.len()
        )));
    }
    if trace.iter().any(|f| !f.same_shape(limit)) {
        return Err(usage("limit is not bound to the bundle of the trace"));
    }
    let mut envelopes: Vec<Section> = Vec::with_capacity(trace.len() - tail_start);
    let mut running: Option<Section> = None;
    for f in trace[tail_start..].iter().rev() {
        let dev = f.combine(1.0, limit, -1.0)?.abs();
        let next = match running {
            Some(prev) => section_sup(&[prev, dev])?,
            None => dev,
        };
        envelopes.push(next.clone());
        running = Some(next);
    }
    envelopes.reverse();
    let monotone = envelopes.windows(2).all(|w| w[1].le(&w[0], 0.0));
    let last = envelopes.last().expect("nonempty tail");
    let per_base_final = last.fiber_max_abs();
    let per_base_converged: Vec<bool> = per_base_final.values().iter().map(|&v| v <= tol).collect();
    let final_max = per_base_final.max_abs();
    Ok(OConvergenceReport {
        tail_start,
        monotone,
        final_max,
        converged: per_base_converged.iter().all(|&c| c),
        per_base_final,
        per_base_converged,
        envelopes,
    })
}

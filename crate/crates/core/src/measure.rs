//! Finite, strictly positive measure fibers and the functions living on them.

use std::ops::Index;

use crate::error::{domain, usage, Result};

/// A finite measure space whose Boolean algebra is the power set of its atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    weights: Vec<f64>,
    total: f64,
}

impl Fiber {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(domain("a fiber needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(domain(format!("atom weights must be finite and positive, got {w}")));
        }
        let total = weights.iter().sum();
        Ok(Self { weights, total })
    }

    /// `n` atoms of mass 1.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Comparison tolerance: `1e-12` scaled by total mass.
    pub fn tolerance(&self) -> f64 {
        1e-12 * self.total
    }

    pub(crate) fn check(&self, x: &FiberVector) -> Result<()> {
        if x.len() != self.atom_count() {
            return Err(usage(format!(
                "vector of length {} is not bound to a fiber with {} atoms",
                x.len(),
                self.atom_count()
            )));
        }
        Ok(())
    }

    fn check_idempotent(&self, e: &FiberIdempotent) -> Result<()> {
        if e.len() != self.atom_count() {
            return Err(usage(format!(
                "idempotent over {} atoms is not bound to a fiber with {} atoms",
                e.len(),
                self.atom_count()
            )));
        }
        Ok(())
    }

    /// `Σ μ_i x_i`.
    pub fn integrate(&self, x: &FiberVector) -> Result<f64> {
        self.check(x)?;
        Ok(self.integrate_unchecked(x.values()))
    }

    pub(crate) fn integrate_unchecked(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(m, v)| m * v).sum()
    }

    /// Measure of an idempotent (a set of atoms).
    pub fn measure(&self, e: &FiberIdempotent) -> Result<f64> {
        self.check_idempotent(e)?;
        Ok(self
            .weights
            .iter()
            .zip(&e.0)
            .filter(|(_, &b)| b)
            .map(|(m, _)| m)
            .sum())
    }

    /// `μ(e Δ g)`.
    pub fn idempotent_metric(&self, e: &FiberIdempotent, g: &FiberIdempotent) -> Result<f64> {
        self.check_idempotent(e)?;
        self.check_idempotent(g)?;
        Ok(self
            .weights
            .iter()
            .zip(e.0.iter().zip(&g.0))
            .filter(|(_, (a, b))| a != b)
            .map(|(m, _)| m)
            .sum())
    }

    /// `∫ |f-g| / (1+|f-g|) dμ`.
    pub fn rho_metric(&self, f: &FiberVector, g: &FiberVector) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self
            .weights
            .iter()
            .zip(f.0.iter().zip(&g.0))
            .map(|(m, (a, b))| {
                let d = (a - b).abs();
                m * d / (1.0 + d)
            })
            .sum())
    }

    pub fn linf_norm(&self, x: &FiberVector) -> Result<f64> {
        self.check(x)?;
        Ok(x.max_abs())
    }

    /// `(Σ μ_i |x_i|^p)^{1/p}`, `p >= 1`.
    pub fn lp_norm(&self, x: &FiberVector, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(domain(format!("lp_norm needs finite p >= 1, got {p}")));
        }
        self.check(x)?;
        let s: f64 = self
            .weights
            .iter()
            .zip(&x.0)
            .map(|(m, v)| m * v.abs().powf(p))
            .sum();
        Ok(s.powf(1.0 / p))
    }
}

/// A real function on the atoms of a fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector(Vec<f64>);

impl FiberVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("fiber vector entries must be finite, got {v}")));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn abs(&self) -> Self {
        Self(self.0.iter().map(|v| v.abs()).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| c * v).collect())
    }

    /// `a·self + b·other`; lengths must agree.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(usage("vectors of different length"));
        }
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|self| <= |other|` atomwise.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.abs() <= b.abs())
    }
}

impl Index<usize> for FiberVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// An element of the fiber's Boolean algebra: a set of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiberIdempotent(Vec<bool>);

impl FiberIdempotent {
    pub fn new(members: Vec<bool>) -> Self {
        Self(members)
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(usage(format!("atom index {i} out of range for {n} atoms")));
            }
            members[i] = true;
        }
        Ok(Self(members))
    }

    pub fn top(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn bottom(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// All `2^n` idempotents of an `n`-atom fiber, ordered by bitmask.
    pub fn enumerate(n: usize) -> impl Iterator<Item = Self> {
        assert!(n < usize::BITS as usize, "too many atoms to enumerate");
        (0..1usize << n).map(move |mask| Self((0..n).map(|i| mask >> i & 1 == 1).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn join(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn meet(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn is_bottom(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    /// The 0/1 characteristic vector.
    pub fn indicator(&self) -> FiberVector {
        FiberVector(self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}

//! N-functions given by their densities.
//!
//! An N-function is `M(t) = ∫₀^{|t|} p(s) ds` for a right-continuous,
//! nondecreasing density `p` with `p(0) = 0`, `p(t) > 0` for `t > 0` and
//! `p(t) → ∞`. The complementary function `N` integrates the generalized
//! inverse `q(s) = sup{t : p(t) ≤ s}`.
//!
//! Besides the closed-form catalog (`c|t|^r`, `e^{|t|} - |t| - 1` and its
//! conjugate) a [`TabulatedDensity`] stores a piecewise-linear density. Knots
//! may repeat an abscissa to encode a jump, which is what makes the
//! generalized inverse of a tabulated density tabulated again: flat pieces
//! become jumps and jumps become flat pieces.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Number of knots used by [`NFunction::tabulate_geometric`] when no count is given.
pub const DEFAULT_TABULATION_KNOTS: usize = 512;

const SMALL_PROBE_LIMIT: f64 = 1e-6;
const LARGE_PROBE_LIMIT: f64 = 1e6;
const PROBE_DECADES: i32 = 16;

/// Piecewise-linear, right-continuous density on `[0, t_m]` with a linear tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    t: Vec<f64>,
    p: Vec<f64>,
    tail_slope: f64,
    /// `cumulative[i] = ∫₀^{t_i} p`.
    cumulative: Vec<f64>,
}

impl TabulatedDensity {
    /// Builds a density from `(t, p)` knots.
    ///
    /// The first knot must be `(0, 0)`; abscissae are nondecreasing (a
    /// repeated abscissa is a jump, the later value wins) and values are
    /// nondecreasing and nonnegative. `tail_slope` is the slope past the last knot.
    pub fn new(knots: &[(f64, f64)], tail_slope: f64) -> Result<Self> {
        if knots.is_empty() {
            return Err(domain("tabulated density needs at least one knot"));
        }
        if !(tail_slope.is_finite() && tail_slope > 0.0) {
            return Err(domain(format!("tail_slope must be positive, got {tail_slope}")));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(domain(format!(
                "first knot must be (0, 0), got ({}, {})",
                knots[0].0, knots[0].1
            )));
        }
        for (i, w) in knots.windows(2).enumerate() {
            let ((t0, p0), (t1, p1)) = (w[0], w[1]);
            if !(t1.is_finite() && p1.is_finite()) {
                return Err(domain(format!("knot {} is not finite", i + 1)));
            }
            if t1 < t0 {
                return Err(domain(format!("knot abscissae decrease at knot {}", i + 1)));
            }
            if p1 < p0 {
                return Err(domain(format!("density decreases at knot {}", i + 1)));
            }
        }
        let t: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let p: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let mut cumulative = Vec::with_capacity(t.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 1..t.len() {
            acc += 0.5 * (t[i] - t[i - 1]) * (p[i - 1] + p[i]);
            cumulative.push(acc);
        }
        Ok(Self {
            t,
            p,
            tail_slope,
            cumulative,
        })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.p.iter().copied())
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn last_abscissa(&self) -> f64 {
        *self.t.last().expect("nonempty")
    }

    /// Index of the last knot with abscissa `<= t` (right-continuity).
    fn segment(&self, t: f64) -> usize {
        self.t.partition_point(|&x| x <= t) - 1
    }

    fn density(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let last = self.t.len() - 1;
        if i == last {
            self.p[last] + self.tail_slope * (t - self.t[last])
        } else {
            let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
            self.p[i] + w * (self.p[i + 1] - self.p[i])
        }
    }

    fn density_left(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.density(0.0);
        }
        // last knot strictly left of t
        let i = self.t.partition_point(|&x| x < t) - 1;
        let last = self.t.len() - 1;
        if i == last {
            self.p[last] + self.tail_slope * (t - self.t[last])
        } else {
            let w = (t - self.t[i]) / (self.t[i + 1] - self.t[i]);
            self.p[i] + w * (self.p[i + 1] - self.p[i])
        }
    }

    fn integral(&self, a: f64) -> f64 {
        let i = self.segment(a);
        let pa = self.density(a);
        self.cumulative[i] + 0.5 * (a - self.t[i]) * (self.p[i] + pa)
    }

    /// Exact generalized inverse: the graph reflected through the diagonal.
    fn inverse(&self) -> Self {
        let knots: Vec<(f64, f64)> = self.knots().map(|(t, p)| (p, t)).collect();
        Self::new(&knots, 1.0 / self.tail_slope).expect("reflection of a valid density is valid")
    }

    /// `inf{t : p(t) > 0}`.
    fn positive_from(&self) -> f64 {
        match self.p.iter().position(|&v| v > 0.0) {
            Some(0) => 0.0,
            Some(i) => self.t[i - 1],
            None => self.last_abscissa(),
        }
    }

    fn strictly_increasing_somewhere(&self) -> bool {
        self.tail_slope > 0.0
            || self
                .t
                .windows(2)
                .zip(self.p.windows(2))
                .any(|(t, p)| t[1] > t[0] && p[1] > p[0])
    }
}

/// The concrete family an [`NFunction`] belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// `M(t) = c·|t|^r`, `r > 1`, `c > 0`.
    Power { exponent: f64, scale: f64 },
    /// `M(t) = e^{|t|} - |t| - 1`.
    Exp,
    /// `N(s) = (1+|s|)·ln(1+|s|) - |s|`, the complement of [`Kind::Exp`].
    ExpConjugate,
    Tabulated(TabulatedDensity),
}

/// An even convex Young function represented through its density.
#[derive(Debug, Clone, PartialEq)]
pub struct NFunction {
    kind: Kind,
}

/// Outcome of [`NFunction::check_axioms`]. Limit conditions are finite probes.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub density_monotone: bool,
    pub density_zero_at_origin: bool,
    /// `inf{t : p(t) > 0}`; must be 0.
    pub positive_from: f64,
    /// Smallest `M(t)/t` over the small probes.
    pub small_probe_ratio: f64,
    pub small_limit: bool,
    /// Largest `M(t)/t` over the large probes.
    pub large_probe_ratio: f64,
    pub large_limit: bool,
    pub convex: bool,
    pub even: bool,
    /// Density strictly increasing on some interval, i.e. `M` strictly convex there.
    pub strictly_convex_somewhere: bool,
}

impl AxiomReport {
    /// All N-function axioms hold. `strictly_convex_somewhere` is informational.
    pub fn passes(&self) -> bool {
        self.density_monotone
            && self.density_zero_at_origin
            && self.positive_from == 0.0
            && self.small_limit
            && self.large_limit
            && self.convex
            && self.even
    }
}

impl NFunction {
    pub fn power(exponent: f64, scale: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 1.0) {
            return Err(domain(format!("power exponent must exceed 1, got {exponent}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(domain(format!("power scale must be positive, got {scale}")));
        }
        Ok(Self {
            kind: Kind::Power { exponent, scale },
        })
    }

    pub fn exp_type() -> Self {
        Self { kind: Kind::Exp }
    }

    pub fn exp_conjugate() -> Self {
        Self {
            kind: Kind::ExpConjugate,
        }
    }

    pub fn tabulated(knots: &[(f64, f64)], tail_slope: f64) -> Result<Self> {
        Ok(Self {
            kind: Kind::Tabulated(TabulatedDensity::new(knots, tail_slope)?),
        })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Short catalog name, e.g. `power:r=2,c=0.5`.
    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Power { exponent, scale } => format!("power:r={exponent},c={scale}"),
            Kind::Exp => "exp_type".into(),
            Kind::ExpConjugate => "exp_conjugate".into(),
            Kind::Tabulated(d) => format!("tabulated({} knots)", d.t.len()),
        }
    }

    /// Structural N-function requirements: `p(0) = 0` and `p(t) > 0` for `t > 0`.
    ///
    /// This is what the norm routines demand; the limit probes of
    /// [`check_axioms`](Self::check_axioms) are not rerun on every call.
    pub fn validate(&self) -> Result<()> {
        if let Kind::Tabulated(d) = &self.kind {
            if d.density(0.0) != 0.0 {
                return Err(Error::Axiom(format!("p(0) = {} != 0", d.density(0.0))));
            }
            let from = d.positive_from();
            if from > 0.0 {
                return Err(Error::Axiom(format!("density vanishes on [0, {from}]")));
            }
        }
        Ok(())
    }

    /// `M(t) = ∫₀^{|t|} p`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(domain(format!("eval at non-finite t = {t}")));
        }
        Ok(self.eval_unchecked(t.abs()))
    }

    /// Evaluation for finite `a >= 0`; internal hot path.
    pub(crate) fn eval_unchecked(&self, a: f64) -> f64 {
        match &self.kind {
            Kind::Power { exponent, scale } => scale * a.powf(*exponent),
            Kind::Exp => exp_minus_linear(a),
            Kind::ExpConjugate => entropy_like(a),
            Kind::Tabulated(d) => d.integral(a),
        }
    }

    /// Right-continuous density `p(t)`, `t >= 0`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(domain(format!("density needs finite t >= 0, got {t}")));
        }
        Ok(self.density_unchecked(t))
    }

    pub(crate) fn density_unchecked(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { exponent, scale } => {
                if t == 0.0 {
                    0.0
                } else {
                    scale * exponent * t.powf(exponent - 1.0)
                }
            }
            Kind::Exp => t.exp_m1(),
            Kind::ExpConjugate => t.ln_1p(),
            Kind::Tabulated(d) => d.density(t),
        }
    }

    /// Left limit `p(t-)`; equals `p(t)` except at jumps of a tabulated density.
    pub fn density_left(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(domain(format!("density needs finite t >= 0, got {t}")));
        }
        Ok(match &self.kind {
            Kind::Tabulated(d) => d.density_left(t),
            _ => self.density_unchecked(t),
        })
    }

    /// The complementary N-function, whose density is `q(s) = sup{t : p(t) <= s}`.
    pub fn complement(&self) -> Result<NFunction> {
        self.validate()?;
        let kind = match &self.kind {
            Kind::Power { exponent, scale } => {
                // p(t) = c r t^{r-1}  =>  q(s) = (s / (c r))^{1/(r-1)}
                let r = *exponent;
                let dual = r / (r - 1.0);
                let dual_scale = (scale * r).powf(-1.0 / (r - 1.0)) / dual;
                Kind::Power {
                    exponent: dual,
                    scale: dual_scale,
                }
            }
            Kind::Exp => Kind::ExpConjugate,
            Kind::ExpConjugate => Kind::Exp,
            Kind::Tabulated(d) => Kind::Tabulated(d.inverse()),
        };
        Ok(NFunction { kind })
    }

    /// `M(u) + N(v) - u·v` with `N` the complement; nonnegative by Young's inequality.
    pub fn young_gap(&self, u: f64, v: f64) -> Result<f64> {
        if !(u.is_finite() && v.is_finite()) || u < 0.0 || v < 0.0 {
            return Err(domain(format!("young_gap needs finite u, v >= 0, got ({u}, {v})")));
        }
        let n = self.complement()?;
        Ok(self.eval_unchecked(u) + n.eval_unchecked(v) - u * v)
    }

    /// Solves `M(t) = y` for `t >= 0`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y < 0.0 {
            return Err(domain(format!("inverse needs finite y >= 0, got {y}")));
        }
        self.validate()?;
        if y == 0.0 {
            return Ok(0.0);
        }
        if let Kind::Power { exponent, scale } = &self.kind {
            return Ok((y / scale).powf(1.0 / exponent));
        }
        let mut hi = 1.0;
        while self.eval_unchecked(hi) < y {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_unchecked(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Scale at which the limit probes are centered.
    fn probe_scale(&self) -> f64 {
        match &self.kind {
            // M(t) = t at t = c^{-1/(r-1)}
            Kind::Power { exponent, scale } => scale.powf(-1.0 / (exponent - 1.0)),
            Kind::Exp | Kind::ExpConjugate => 1.0,
            Kind::Tabulated(d) => {
                let last = d.last_abscissa();
                if last > 0.0 {
                    last
                } else {
                    1.0
                }
            }
        }
    }

    /// Checks the N-function axioms numerically.
    ///
    /// `M(t)/t` is probed on the geometric grid `scale·10^{±j}`, `j = 1..=16`;
    /// the small end must drop below `1e-6` and the large end exceed `1e6`.
    /// Convexity and evenness are tested on a midpoint grid.
    pub fn check_axioms(&self) -> AxiomReport {
        let scale = self.probe_scale();
        let (density_monotone, positive_from, strictly) = match &self.kind {
            Kind::Tabulated(d) => (
                d.t.windows(2).all(|w| w[1] >= w[0])
                    && d.p.windows(2).all(|w| w[1] >= w[0])
                    && d.tail_slope > 0.0,
                d.positive_from(),
                d.strictly_increasing_somewhere(),
            ),
            _ => (true, 0.0, true),
        };
        let density_zero_at_origin = self.density_unchecked(0.0) == 0.0;

        let ratio = |t: f64| self.eval_unchecked(t) / t;
        let small_probe_ratio = (1..=PROBE_DECADES)
            .map(|j| ratio(scale * 10f64.powi(-j)))
            .fold(f64::INFINITY, f64::min);
        let large_probe_ratio = (1..=PROBE_DECADES)
            .map(|j| ratio(scale * 10f64.powi(j)))
            .fold(f64::NEG_INFINITY, f64::max);

        let grid: Vec<f64> = (0..=40).map(|i| scale * (i as f64 / 10.0 - 2.0)).collect();
        let mut convex = true;
        let mut even = true;
        for &a in &grid {
            let ma = self.eval_unchecked(a.abs());
            even &= self.eval(a).ok() == self.eval(-a).ok();
            for &b in &grid {
                let mb = self.eval_unchecked(b.abs());
                let mid = self.eval_unchecked((0.5 * (a + b)).abs());
                let tol = 1e-12 * (ma.abs() + mb.abs()).max(f64::MIN_POSITIVE);
                if mid > 0.5 * (ma + mb) + tol {
                    convex = false;
                }
            }
        }

        AxiomReport {
            density_monotone,
            density_zero_at_origin,
            positive_from,
            small_probe_ratio,
            small_limit: small_probe_ratio < SMALL_PROBE_LIMIT,
            large_probe_ratio,
            large_limit: large_probe_ratio > LARGE_PROBE_LIMIT,
            convex,
            even,
            strictly_convex_somewhere: strictly,
        }
    }

    /// Tabulated copy: density sampled at 0 and on a geometric grid ending at `t_max`.
    ///
    /// The first positive knot is `t_max·1e-8`; the tail continues with the
    /// slope of the last segment.
    pub fn tabulate_geometric(&self, t_max: f64, knots: usize) -> Result<NFunction> {
        if !(t_max.is_finite() && t_max > 0.0) || knots < 3 {
            return Err(domain("tabulation needs t_max > 0 and at least 3 knots"));
        }
        self.validate()?;
        let t_min = t_max * 1e-8;
        let ratio = (t_max / t_min).powf(1.0 / (knots - 2) as f64);
        let mut pts = vec![(0.0, 0.0)];
        let mut t = t_min;
        for i in 0..knots - 1 {
            if i == knots - 2 {
                t = t_max;
            }
            pts.push((t, self.density_unchecked(t)));
            t *= ratio;
        }
        let (ta, pa) = pts[pts.len() - 2];
        let (tb, pb) = pts[pts.len() - 1];
        let slope = ((pb - pa) / (tb - ta)).max(f64::MIN_POSITIVE);
        NFunction::tabulated(&pts, slope)
    }
}

impl fmt::Display for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `e^a - a - 1` without cancellation near 0.
fn exp_minus_linear(a: f64) -> f64 {
    if a < 0.5 {
        // Σ_{k≥2} a^k / k!
        let mut term = a * a / 2.0;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term > sum * 1e-18 && k < 40.0 {
            sum += term;
            k += 1.0;
            term *= a / k;
        }
        sum
    } else {
        a.exp_m1() - a
    }
}

/// `(1+a)·ln(1+a) - a` without cancellation near 0.
fn entropy_like(a: f64) -> f64 {
    if a < 0.5 {
        // Σ_{k≥2} (-1)^k a^k / (k(k-1))
        let mut sum = 0.0;
        let mut pow = a * a;
        let mut k = 2.0;
        let mut sign = 1.0;
        while k < 80.0 {
            let term = pow / (k * (k - 1.0));
            sum += sign * term;
            if term < 1e-18 * sum.abs() {
                break;
            }
            pow *= a;
            k += 1.0;
            sign = -sign;
        }
        sum
    } else {
        (1.0 + a) * a.ln_1p() - a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_tabulated() -> NFunction {
        NFunction::tabulated(&[(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)], 2.0).unwrap()
    }

    #[test]
    fn power_eval_and_density() {
        let m = NFunction::power(2.0, 1.0).unwrap();
        assert_eq!(m.eval(2.0).unwrap(), 4.0);
        assert_eq!(m.eval(-2.0).unwrap(), 4.0);
        assert_eq!(m.density(3.0).unwrap(), 6.0);
        assert_eq!(m.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_non_finite() {
        let m = NFunction::exp_type();
        assert!(matches!(m.eval(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(m.eval(f64::INFINITY), Err(Error::Domain(_))));
        assert!(matches!(m.density(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tabulated_density_extrapolates_tail() {
        let m = sample_tabulated();
        assert_eq!(m.density(2.5).unwrap(), 4.0);
        assert_eq!(m.density(0.5).unwrap(), 0.5);
        assert_eq!(m.eval(2.0).unwrap(), 2.5);
    }

    #[test]
    fn exp_density_at_one() {
        let m = NFunction::exp_type();
        assert_relative_eq!(m.density(1.0).unwrap(), 1.718281828459045, epsilon = 1e-15);
    }

    #[test]
    fn exp_small_argument_is_accurate() {
        let m = NFunction::exp_type();
        let t = 1e-5;
        let exact = t * t / 2.0 + t * t * t / 6.0;
        assert_relative_eq!(m.eval(t).unwrap(), exact, max_relative = 1e-14);
        let n = NFunction::exp_conjugate();
        let exact = t * t / 2.0 - t * t * t / 6.0;
        assert_relative_eq!(n.eval(t).unwrap(), exact, max_relative = 1e-14);
    }

    #[test]
    fn series_branches_join_continuously() {
        for f in [NFunction::exp_type(), NFunction::exp_conjugate()] {
            let below = f.eval(0.5 - 1e-12).unwrap();
            let above = f.eval(0.5).unwrap();
            assert_relative_eq!(below, above, max_relative = 1e-10);
        }
    }

    #[test]
    fn half_square_is_self_conjugate() {
        let m = NFunction::power(2.0, 0.5).unwrap();
        let n = m.complement().unwrap();
        match n.kind() {
            Kind::Power { exponent, scale } => {
                assert_relative_eq!(*exponent, 2.0, epsilon = 1e-15);
                assert_relative_eq!(*scale, 0.5, epsilon = 1e-15);
            }
            other => panic!("unexpected kind {other:?}"),
        }
    }

    #[test]
    fn cube_over_three_conjugate() {
        let m = NFunction::power(3.0, 1.0 / 3.0).unwrap();
        let n = m.complement().unwrap();
        for s in [0.1, 1.0, 2.5, 7.0] {
            assert_relative_eq!(
                n.eval(s).unwrap(),
                2.0 / 3.0 * s.powf(1.5),
                max_relative = 1e-12
            );
        }
        for i in 0..50 {
            let u = 0.1 * i as f64;
            let v = m.density(u).unwrap();
            assert!(m.young_gap(u, v).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn young_gap_closed_forms() {
        let m = NFunction::power(2.0, 0.5).unwrap();
        assert_eq!(m.young_gap(3.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(m.young_gap(1.0, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(m.young_gap(-1.0, 1.0).is_err());
    }

    #[test]
    fn tabulated_complement_swaps_flats_and_jumps() {
        // flat piece on [1, 2] and a jump at 3
        let m = NFunction::tabulated(
            &[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 2.0), (3.0, 4.0)],
            1.0,
        )
        .unwrap();
        let n = m.complement().unwrap();
        // q jumps at s = 1 from 1 to 2
        assert_eq!(n.density(1.0).unwrap(), 2.0);
        assert_eq!(n.density_left(1.0).unwrap(), 1.0);
        // q is flat (= 3) on [2, 4]
        assert_eq!(n.density(2.5).unwrap(), 3.0);
        assert_eq!(n.density(4.0).unwrap(), 3.0);
        // and carries the reciprocal tail
        assert_eq!(n.density(5.0).unwrap(), 4.0);
        assert_eq!(n.complement().unwrap(), m);
    }

    #[test]
    fn axioms_catalog() {
        let r = NFunction::power(2.0, 1.0).unwrap().check_axioms();
        assert!(r.passes(), "{r:?}");
        assert!(r.strictly_convex_somewhere);
        let r = NFunction::exp_type().check_axioms();
        assert!(r.passes(), "{r:?}");
        let r = NFunction::power(1.5, 2.0 / 3.0).unwrap().check_axioms();
        assert!(r.passes(), "{r:?}");
    }

    #[test]
    fn axioms_reject_absolute_value() {
        // p ≡ 1 beyond 0, i.e. M(t) ≈ |t|
        let m = NFunction::tabulated(&[(0.0, 0.0), (0.0, 1.0), (10.0, 1.0)], 1e-12).unwrap();
        let r = m.check_axioms();
        assert!(!r.small_limit);
        assert!(!r.large_limit);
        assert!(!r.density_zero_at_origin);
        assert!(!r.passes());
        assert!(matches!(m.validate(), Err(Error::Axiom(_))));
    }

    #[test]
    fn axioms_flag_late_positivity() {
        let m = NFunction::tabulated(&[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)], 1.0).unwrap();
        let r = m.check_axioms();
        assert_eq!(r.positive_from, 1.0);
        assert!(!r.passes());
    }

    #[test]
    fn constructor_rejects_bad_tables() {
        assert!(NFunction::tabulated(&[(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)], 1.0).is_err());
        assert!(NFunction::tabulated(&[(0.0, 0.0), (1.0, 1.0)], 0.0).is_err());
        assert!(NFunction::tabulated(&[(0.5, 0.0)], 1.0).is_err());
        assert!(NFunction::power(1.0, 1.0).is_err());
        assert!(NFunction::power(2.0, -1.0).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for m in [
            NFunction::power(1.5, 2.0).unwrap(),
            NFunction::exp_type(),
            NFunction::exp_conjugate(),
            sample_tabulated(),
        ] {
            for y in [1e-6, 0.3, 1.0, 4.0, 100.0] {
                let t = m.inverse(y).unwrap();
                assert_relative_eq!(m.eval(t).unwrap(), y, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn geometric_tabulation_tracks_exp() {
        let m = NFunction::exp_type();
        let tab = m.tabulate_geometric(10.0, DEFAULT_TABULATION_KNOTS).unwrap();
        for t in [0.5, 1.0, 3.0, 8.0] {
            assert_relative_eq!(tab.eval(t).unwrap(), m.eval(t).unwrap(), max_relative = 1e-2);
        }
        assert!(tab.check_axioms().passes());
    }
}

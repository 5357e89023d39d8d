//! Bounded Besicovich weight sequences and their trigonometric approximants.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, usage, Error, Result};

/// Horizon over which [`WeightSequence::bound`] is cached.
pub const DEFAULT_BOUND_HORIZON: u64 = 100_000;

/// One term `a cos(2πθk) + b sin(2πθk)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub theta: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
}

impl TrigTerm {
    pub fn eval(&self, k: f64) -> f64 {
        // reduce the phase first so large k keep full precision
        let phase = TAU * (self.theta * k).rem_euclid(1.0);
        self.cos_coef * phase.cos() + self.sin_coef * phase.sin()
    }
}

/// Finite real trigonometric polynomial in the integer variable `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn new(terms: Vec<TrigTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.theta.is_finite() && (0.0..1.0).contains(&t.theta)) {
                return Err(domain(format!("frequency must lie in [0, 1), got {}", t.theta)));
            }
            if !(t.cos_coef.is_finite() && t.sin_coef.is_finite()) {
                return Err(domain("trigonometric coefficients must be finite"));
            }
        }
        Ok(Self { terms })
    }

    pub fn single(theta: f64, cos_coef: f64, sin_coef: f64) -> Result<Self> {
        Self::new(vec![TrigTerm {
            theta,
            cos_coef,
            sin_coef,
        }])
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(k)).sum()
    }

    /// `Σ |a_m| + |b_m|`.
    pub fn coefficient_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.cos_coef.abs() + t.sin_coef.abs()).sum()
    }
}

impl fmt::Display for TrigPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "theta={},a={},b={}", t.theta, t.cos_coef, t.sin_coef)?;
        }
        Ok(())
    }
}

impl FromStr for TrigPolynomial {
    type Err = Error;

    /// `theta=<θ>,a=<a>,b=<b>;...`; omitted coefficients default to 0.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (mut theta, mut a, mut b) = (None, 0.0, 0.0);
            for field in term.split(',') {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| usage(format!("expected key=value in trig term, got `{field}`")))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad number `{}` in trig term", value.trim())))?;
                match key.trim() {
                    "theta" => theta = Some(value),
                    "a" => a = value,
                    "b" => b = value,
                    other => return Err(usage(format!("unknown trig field `{other}`"))),
                }
            }
            let theta = theta.ok_or_else(|| usage(format!("trig term `{term}` has no theta")))?;
            terms.push(TrigTerm {
                theta,
                cos_coef: a,
                sin_coef: b,
            });
        }
        if terms.is_empty() {
            return Err(usage("trig polynomial with no terms"));
        }
        Self::new(terms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant(f64),
    Trig(TrigPolynomial),
    /// `ψ(k) + δ/k`.
    Perturbed { poly: TrigPolynomial, delta: f64 },
}

/// A bounded real weight sequence `b(1), b(2), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
    bound: f64,
    horizon: u64,
}

impl WeightSequence {
    pub fn new(kind: WeightKind) -> Result<Self> {
        Self::with_horizon(kind, DEFAULT_BOUND_HORIZON)
    }

    /// Like [`new`](Self::new) with the bound cached over `k <= horizon`.
    pub fn with_horizon(kind: WeightKind, horizon: u64) -> Result<Self> {
        match &kind {
            WeightKind::Constant(c) if !c.is_finite() => {
                return Err(domain(format!("constant weight must be finite, got {c}")))
            }
            WeightKind::Perturbed { delta, .. } if !delta.is_finite() => {
                return Err(domain(format!("perturbation amplitude must be finite, got {delta}")))
            }
            _ => {}
        }
        if horizon == 0 {
            return Err(domain("bound horizon must be positive"));
        }
        let mut w = Self {
            kind,
            bound: 0.0,
            horizon,
        };
        w.bound = w.sup_abs(1, horizon);
        Ok(w)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(WeightKind::Constant(c))
    }

    pub fn trig(poly: TrigPolynomial) -> Result<Self> {
        Self::new(WeightKind::Trig(poly))
    }

    pub fn perturbed(poly: TrigPolynomial, delta: f64) -> Result<Self> {
        Self::new(WeightKind::Perturbed { poly, delta })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Cached `sup_{1 <= k <= horizon} |b(k)|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `sup_{1 <= k <= n} |b(k)|`, reusing the cache when `n` is within the horizon.
    pub fn bound_through(&self, n: u64) -> f64 {
        if n <= self.horizon {
            self.bound
        } else {
            self.bound.max(self.sup_abs(self.horizon + 1, n))
        }
    }

    fn sup_abs(&self, from: u64, to: u64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => c.abs(),
            _ => (from..=to).fold(0.0, |m, k| m.max(self.value(k).abs())),
        }
    }

    /// `b(k)` for `k >= 1`.
    pub fn eval(&self, k: i64) -> Result<f64> {
        if k <= 0 {
            return Err(domain(format!("weights are indexed from k = 1, got {k}")));
        }
        Ok(self.value(k as u64))
    }

    pub(crate) fn value(&self, k: u64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Trig(p) => p.eval(k as f64),
            WeightKind::Perturbed { poly, delta } => poly.eval(k as f64) + delta / k as f64,
        }
    }

    /// Weight given to the `k = 0` term in comparison runs: `c`, or `ψ(0)`.
    pub fn value_at_zero(&self) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Trig(p) | WeightKind::Perturbed { poly: p, .. } => p.eval(0.0),
        }
    }

    /// The trigonometric part (`c` at frequency 0 for constants).
    pub fn trig_part(&self) -> TrigPolynomial {
        match &self.kind {
            WeightKind::Constant(c) => TrigPolynomial {
                terms: vec![TrigTerm {
                    theta: 0.0,
                    cos_coef: *c,
                    sin_coef: 0.0,
                }],
            },
            WeightKind::Trig(p) | WeightKind::Perturbed { poly: p, .. } => p.clone(),
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            WeightKind::Constant(c) => write!(f, "constant:{c}"),
            WeightKind::Trig(p) => write!(f, "trig:{p}"),
            WeightKind::Perturbed { poly, delta } => write!(f, "perturbed:{poly}|delta={delta}"),
        }
    }
}

impl FromStr for WeightSequence {
    type Err = Error;

    /// `constant:<c>`, `trig:<terms>` or `perturbed:[trig:]<terms>|delta=<δ>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| usage(format!("weight spec `{s}` lacks a kind prefix")))?;
        match kind.trim() {
            "constant" => {
                let c = rest
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad constant weight `{rest}`")))?;
                Self::constant(c)
            }
            "trig" => Self::trig(rest.parse()?),
            "perturbed" => {
                let (poly, delta) = rest
                    .split_once('|')
                    .ok_or_else(|| usage("perturbed weights need `|delta=<value>`"))?;
                let poly = poly.trim();
                let poly = poly.strip_prefix("trig:").unwrap_or(poly);
                let delta = delta
                    .trim()
                    .strip_prefix("delta=")
                    .ok_or_else(|| usage("perturbed weights need `|delta=<value>`"))?;
                let delta = delta
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad delta `{delta}`")))?;
                Self::perturbed(poly.parse()?, delta)
            }
            other => Err(usage(format!("unknown weight kind `{other}`"))),
        }
    }
}

/// `(1/N) Σ_{k=1}^N |b(k) - ψ(k)|`.
pub fn besicovich_defect(w: &WeightSequence, psi: &TrigPolynomial, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("defect horizon must be at least 1"));
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 1..=n {
        neumaier_add(&mut sum, &mut comp, (w.value(k) - psi.eval(k as f64)).abs());
    }
    Ok((sum + comp) / n as f64)
}

/// Defects on the doubling schedule `1, 2, 4, ...` up to `n_max` (always included).
#[derive(Debug, Clone, PartialEq)]
pub struct DefectTrend {
    pub points: Vec<(u64, f64)>,
    /// `defect(N₂) <= defect(N₁) + 1e-12` for every pair with `N₂ >= 2N₁`.
    pub nonincreasing: bool,
}

pub fn defect_trend(w: &WeightSequence, psi: &TrigPolynomial, n_max: u64) -> Result<DefectTrend> {
    if n_max == 0 {
        return Err(domain("defect horizon must be at least 1"));
    }
    let mut horizons = Vec::new();
    let mut n = 1;
    while n < n_max {
        horizons.push(n);
        n *= 2;
    }
    horizons.push(n_max);
    // one pass, reading off the running sum at each horizon
    let mut points = Vec::with_capacity(horizons.len());
    let (mut sum, mut comp) = (0.0, 0.0);
    let mut next = horizons.iter().peekable();
    for k in 1..=n_max {
        neumaier_add(&mut sum, &mut comp, (w.value(k) - psi.eval(k as f64)).abs());
        if next.peek() == Some(&&k) {
            points.push((k, (sum + comp) / k as f64));
            next.next();
        }
    }
    let nonincreasing = points.iter().all(|&(n1, d1)| {
        points
            .iter()
            .filter(|&&(n2, _)| n2 >= 2 * n1)
            .all(|&(_, d2)| d2 <= d1 + 1e-12)
    });
    Ok(DefectTrend {
        points,
        nonincreasing,
    })
}

/// Least-squares trigonometric polynomial at the given frequencies.
///
/// Fits `b(k)` for `k = 1..=n` through the normal equations. Frequencies 0
/// and 1/2 get no sine column since `sin(2πθk)` vanishes on the integers
/// there. Returns the fit and its `L₁` defect at horizon `n`.
pub fn fit_trig_poly(w: &WeightSequence, freqs: &[f64], n: u64) -> Result<(TrigPolynomial, f64)> {
    if freqs.is_empty() {
        return Err(usage("fit needs at least one frequency"));
    }
    if n < 2 * freqs.len() as u64 {
        return Err(usage(format!(
            "fit over {n} samples needs at most {} frequencies",
            n / 2
        )));
    }
    // (frequency index, is_sine)
    let mut columns = Vec::new();
    for (i, &theta) in freqs.iter().enumerate() {
        if !(theta.is_finite() && (0.0..1.0).contains(&theta)) {
            return Err(domain(format!("frequency must lie in [0, 1), got {theta}")));
        }
        columns.push((i, false));
        if theta != 0.0 && theta != 0.5 {
            columns.push((i, true));
        }
    }
    let basis = |col: (usize, bool), k: u64| {
        let phase = TAU * (freqs[col.0] * k as f64).rem_euclid(1.0);
        if col.1 {
            phase.sin()
        } else {
            phase.cos()
        }
    };
    let m = columns.len();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    let mut row = vec![0.0; m];
    for k in 1..=n {
        for (r, &c) in row.iter_mut().zip(&columns) {
            *r = basis(c, k);
        }
        let y = w.value(k);
        for a in 0..m {
            rhs[a] += row[a] * y;
            for b in 0..=a {
                gram[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    // Jacobi scaling makes the pivot test independent of n
    let scale: Vec<f64> = (0..m).map(|a| gram[(a, a)].sqrt()).collect();
    if scale.contains(&0.0) {
        return Err(usage("fit design has an identically zero column"));
    }
    let scaled = DMatrix::from_fn(m, m, |a, b| gram[(a, b)] / (scale[a] * scale[b]));
    let chol = scaled
        .cholesky()
        .ok_or_else(|| usage("fit design is rank deficient (duplicate or aliased frequencies)"))?;
    let min_pivot = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    if min_pivot < 1e-10 {
        return Err(usage("fit design is rank deficient (duplicate or aliased frequencies)"));
    }
    let scaled_rhs = DVector::from_fn(m, |a, _| rhs[a] / scale[a]);
    let coef = chol.solve(&scaled_rhs);

    let mut terms: Vec<TrigTerm> = freqs
        .iter()
        .map(|&theta| TrigTerm {
            theta,
            cos_coef: 0.0,
            sin_coef: 0.0,
        })
        .collect();
    for (c, &(i, sine)) in columns.iter().enumerate() {
        let v = coef[c] / scale[c];
        if sine {
            terms[i].sin_coef = v;
        } else {
            terms[i].cos_coef = v;
        }
    }
    let poly = TrigPolynomial::new(terms)?;
    let defect = besicovich_defect(w, &poly, n)?;
    Ok((poly, defect))
}

/// Sum of squared residuals `Σ_{k=1}^n (b(k) - ψ(k))²`.
pub fn squared_residual(w: &WeightSequence, psi: &TrigPolynomial, n: u64) -> f64 {
    let (mut sum, mut comp) = (0.0, 0.0);
    for k in 1..=n {
        let r = w.value(k) - psi.eval(k as f64);
        neumaier_add(&mut sum, &mut comp, r * r);
    }
    sum + comp
}

/// One step of Neumaier compensated summation.
pub(crate) fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

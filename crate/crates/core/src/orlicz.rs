//! Modular, Luxemburg norm and Orlicz norm of a vector on a finite fiber.

use crate::error::Result;
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::NFunction;

/// Vectors whose sup-norm falls below this are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-300;

const BISECTION_REL_WIDTH: f64 = 1e-12;
const GOLDEN_LOG_WIDTH: f64 = 1e-12;

/// Luxemburg norm `inf{λ > 0 : ∫ M(x/λ) dμ <= 1}` and how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct LuxemburgResult {
    pub value: f64,
    /// `∫ M(x/value) dμ`; equals 1 up to the bisection width for nonzero `x`.
    pub modular_at_lambda: f64,
    pub iterations: usize,
    /// Final bisection bracket `(λ_lo, λ_hi)`.
    pub bracket: (f64, f64),
}

/// Orlicz norm `sup{∫ x·y dμ : ∫ N(y) dμ <= 1}` with a near-maximizing witness.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczNormResult {
    pub value: f64,
    pub witness: FiberVector,
    /// `∫ N(witness) dμ`, at most 1.
    pub witness_modular: f64,
    /// Minimizer of `k ↦ (1 + ∫ M(k x) dμ) / k`.
    pub amemiya_k: f64,
    pub iterations: usize,
}

/// `∫ M(x) dμ`.
pub fn modular(m: &NFunction, fiber: &Fiber, x: &FiberVector) -> Result<f64> {
    fiber.check(x)?;
    Ok(modular_scaled(m, fiber, x.values(), 1.0))
}

/// `∫ M(c·x) dμ` without binding checks.
pub(crate) fn modular_scaled(m: &NFunction, fiber: &Fiber, x: &[f64], c: f64) -> f64 {
    fiber
        .weights()
        .iter()
        .zip(x)
        .map(|(w, v)| w * m.eval_unchecked((c * v).abs()))
        .sum()
}

/// Luxemburg norm by bracketing and bisection on `λ ↦ ∫ M(x/λ) dμ`.
///
/// The upper bracket starts at `‖x‖_∞ / M⁻¹(1/μ(fiber))` and the lower at
/// `‖x‖_∞ / M⁻¹(1/μ_i)` for the atom carrying `‖x‖_∞`; both are doubled or
/// halved until they bracket the level 1, then bisection runs to relative
/// width `1e-12`.
pub fn luxemburg_norm(m: &NFunction, fiber: &Fiber, x: &FiberVector) -> Result<LuxemburgResult> {
    m.validate()?;
    fiber.check(x)?;
    let sup = x.max_abs();
    if sup < ZERO_THRESHOLD {
        return Ok(LuxemburgResult {
            value: 0.0,
            modular_at_lambda: 0.0,
            iterations: 0,
            bracket: (0.0, 0.0),
        });
    }
    let peak_atom = x
        .values()
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.abs() > x[best].abs() { i } else { best });
    let level = |lambda: f64| modular_scaled(m, fiber, x.values(), 1.0 / lambda);

    let mut hi = sup / m.inverse(1.0 / fiber.total_mass())?;
    let mut lo = sup / m.inverse(1.0 / fiber.weights()[peak_atom])?;
    let mut iterations = 0;
    while level(hi) > 1.0 {
        hi *= 2.0;
        iterations += 1;
    }
    while level(lo) < 1.0 {
        lo *= 0.5;
        iterations += 1;
    }
    while hi - lo > BISECTION_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if level(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let value = 0.5 * (lo + hi);
    Ok(LuxemburgResult {
        value,
        modular_at_lambda: level(value),
        iterations,
        bracket: (lo, hi),
    })
}

/// Orlicz norm through the Amemiya functional `k ↦ (1 + ∫ M(k x) dμ) / k`.
///
/// The functional is minimized by golden-section search in `log k` after a
/// doubling search for a bracket. The witness is `sign(x)·p(k*|x|)`, moved
/// inside the subdifferential at jumps of `p` and rescaled if needed so that
/// `∫ N(y) dμ <= 1`.
pub fn orlicz_norm(m: &NFunction, fiber: &Fiber, x: &FiberVector) -> Result<OrliczNormResult> {
    m.validate()?;
    fiber.check(x)?;
    let n = x.len();
    if x.max_abs() < ZERO_THRESHOLD {
        return Ok(OrliczNormResult {
            value: 0.0,
            witness: FiberVector::zeros(n),
            witness_modular: 0.0,
            amemiya_k: 0.0,
            iterations: 0,
        });
    }
    let amemiya = |log_k: f64| {
        let k = log_k.exp();
        (1.0 + modular_scaled(m, fiber, x.values(), k)) / k
    };

    let lux = luxemburg_norm(m, fiber, x)?.value;
    let step = std::f64::consts::LN_2;
    let mut center = -lux.ln();
    let mut iterations = 0;
    let mut f_center = amemiya(center);
    loop {
        let left = amemiya(center - step);
        if left < f_center {
            center -= step;
            f_center = left;
            iterations += 1;
            continue;
        }
        let right = amemiya(center + step);
        if right < f_center {
            center += step;
            f_center = right;
            iterations += 1;
            continue;
        }
        break;
    }

    let (log_k, value, golden_iters) = golden_section(amemiya, center - step, center + step);
    iterations += golden_iters;
    let k = log_k.exp();

    let conj = m.complement()?;
    let signs: Vec<f64> = x.values().iter().map(|v| v.signum()).collect();
    let right: Vec<f64> = x
        .values()
        .iter()
        .map(|v| m.density_unchecked(k * v.abs()))
        .collect();
    let left: Vec<f64> = x
        .values()
        .iter()
        .map(|v| m.density_left(k * v.abs()).expect("finite nonnegative"))
        .collect();
    let dual_modular = |y: &[f64]| modular_scaled(&conj, fiber, y, 1.0);

    let mut y = right.clone();
    let mut y_mod = dual_modular(&y);
    if y_mod > 1.0 {
        let left_mod = dual_modular(&left);
        if left_mod < 1.0 {
            // pick y inside [p(k|x|-), p(k|x|)] with ∫N(y) = 1
            let (mut a, mut b) = (0.0, 1.0);
            for _ in 0..200 {
                let theta = 0.5 * (a + b);
                let mix: Vec<f64> = left
                    .iter()
                    .zip(&right)
                    .map(|(l, r)| l + theta * (r - l))
                    .collect();
                if dual_modular(&mix) > 1.0 {
                    b = theta;
                } else {
                    a = theta;
                }
            }
            y = left.iter().zip(&right).map(|(l, r)| l + a * (r - l)).collect();
        } else {
            y = left;
        }
        y_mod = dual_modular(&y);
        if y_mod > 1.0 {
            // N(cy) <= c N(y) for c <= 1
            let c = 1.0 / y_mod;
            y.iter_mut().for_each(|v| *v *= c);
            y_mod = dual_modular(&y);
        }
    }
    let witness = FiberVector::from_vec_unchecked(y.iter().zip(&signs).map(|(v, s)| v * s).collect());
    Ok(OrliczNormResult {
        value,
        witness,
        witness_modular: y_mod,
        amemiya_k: k,
        iterations,
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > GOLDEN_LOG_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    if fc <= fd {
        (c, fc, iterations)
    } else {
        (d, fd, iterations)
    }
}

//! Slow, independent reference computations used to cross-check the main
//! routines: plain quadrature, grid searches, direct maximization and brute
//! force. None of these share code paths with what they check.

use rand::Rng;

use crate::error::{usage, Result};
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::NFunction;
use crate::operators::FiberOperator;
use crate::seed;
use crate::weights::WeightSequence;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}

/// `∫₀^{|t|} p` by quadrature of the density alone.
pub fn quadrature_eval(m: &NFunction, t: f64, tol: f64) -> f64 {
    adaptive_simpson(&|s| m.density_unchecked(s), 0.0, t.abs(), tol)
}

/// `Σ μ_i ∫₀^{|x_i|} p` by quadrature.
pub fn quadrature_modular(m: &NFunction, fiber: &Fiber, x: &FiberVector, tol: f64) -> f64 {
    fiber
        .weights()
        .iter()
        .zip(x.values())
        .map(|(w, v)| w * quadrature_eval(m, *v, tol))
        .sum()
}

fn plain_modular(m: &NFunction, fiber: &Fiber, x: &[f64], scale: f64) -> f64 {
    fiber
        .weights()
        .iter()
        .zip(x)
        .map(|(w, v)| w * m.eval_unchecked((v * scale).abs()))
        .sum()
}

/// Luxemburg norm by a two-stage uniform grid over `λ`: `points` cells on a
/// doubling bracket, then `points / 1000` cells inside the located cell.
/// Returns the smallest grid `λ` with `∫ M(x/λ) <= 1`.
pub fn luxemburg_grid_search(m: &NFunction, fiber: &Fiber, x: &FiberVector, points: usize) -> f64 {
    let s = x.max_abs();
    if s == 0.0 {
        return 0.0;
    }
    let over = |lam: f64| plain_modular(m, fiber, x.values(), 1.0 / lam) > 1.0;
    let mut hi = s;
    while over(hi) {
        hi *= 2.0;
    }
    let mut lo = s;
    while !over(lo) {
        lo /= 2.0;
    }
    let mut found = hi;
    for stage_points in [points, (points / 1000).max(10)] {
        let step = (hi - lo) / stage_points as f64;
        let mut prev = lo;
        for i in 1..=stage_points {
            let lam = lo + step * i as f64;
            if !over(lam) {
                found = lam;
                hi = lam;
                lo = prev;
                break;
            }
            prev = lam;
        }
    }
    found
}

/// Largest `c > 0` with `∫ N(c·y) <= 1`, by bisection.
fn boundary_scale(n: &NFunction, fiber: &Fiber, y: &[f64]) -> f64 {
    let at = |c: f64| plain_modular(n, fiber, y, c);
    let (mut lo, mut hi) = (0.0, 1.0);
    while at(hi) <= 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

fn pairing(fiber: &Fiber, x: &[f64], y: &[f64]) -> f64 {
    fiber
        .weights()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(w, (a, b))| w * a * b)
        .sum()
}

/// Direct lower approximation of `sup{∫ x·y dμ : ∫ N(y) dμ <= 1}`.
///
/// Combines a one-parameter sweep over the dual family
/// `y_s = sign(x)·p(s|x|)` (each pushed to the boundary `∫N(y) = 1`) with
/// `restarts` random feasible starts followed by projected random ascent.
pub fn orlicz_dual_sup(m: &NFunction, fiber: &Fiber, x: &FiberVector, restarts: usize, seed: u64) -> Result<f64> {
    fiber.check(x)?;
    if x.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let n = m.complement()?;
    let xs = x.values();
    let value_of = |y: &[f64]| {
        if y.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        pairing(fiber, xs, y) * boundary_scale(&n, fiber, y)
    };
    let family = |log_s: f64| {
        let s = log_s.exp();
        let y: Vec<f64> = xs
            .iter()
            .map(|v| v.signum() * m.density_unchecked(s * v.abs()))
            .collect();
        value_of(&y)
    };

    // coarse log-grid, then golden refinement around the best cell
    let top = x.max_abs().ln();
    let (a0, b0) = (-40.0 - top, 40.0 - top);
    let cells = 400;
    let h = (b0 - a0) / cells as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=cells {
        let v = family(a0 + h * i as f64);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (a0 + h * (best_i as f64 - 1.0), a0 + h * (best_i as f64 + 1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if family(c) >= family(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    best = best.max(family(0.5 * (a + b)));

    let mut rng = seed::rng(seed);
    let dim = xs.len();
    let mut starts: Vec<(f64, Vec<f64>)> = (0..restarts)
        .map(|_| {
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            (value_of(&y), y)
        })
        .collect();
    starts.sort_by(|p, q| q.0.total_cmp(&p.0));
    for (mut val, mut y) in starts.into_iter().take(3) {
        let mut step = 0.5 * y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
        for _ in 0..400 {
            let cand: Vec<f64> = y.iter().map(|v| v + step * rng.random_range(-1.0..1.0)).collect();
            let cv = value_of(&cand);
            if cv > val {
                val = cv;
                y = cand;
            } else {
                step *= 0.97;
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

/// `H_n = Σ_{k=1}^n 1/k`, summed from the small end.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

/// `max ‖Tx‖₁/‖x‖₁` over all coordinate vectors and `samples` random `x`.
pub fn l1_norm_brute(t: &FiberOperator, fiber: &Fiber, samples: usize, seed: u64) -> Result<f64> {
    let dim = t.dim();
    if fiber.atom_count() != dim {
        return Err(usage("operator and fiber sizes differ"));
    }
    let l1 = |v: &[f64]| fiber.weights().iter().zip(v).map(|(w, x)| w * x.abs()).sum::<f64>();
    let ratio = |x: Vec<f64>| {
        let x = FiberVector::new(x).expect("finite sample");
        let tx = t.apply(&x).expect("sizes checked");
        l1(tx.values()) / l1(x.values())
    };
    let mut best = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            ratio(e)
        })
        .fold(0.0, f64::max);
    let mut rng = seed::rng(seed);
    for _ in 0..samples {
        best = best.max(ratio((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()));
    }
    Ok(best)
}

/// `(1/n) Σ_{k=1}^{n-1} b(k) T^k f` by a plain loop with ordinary summation.
pub fn direct_average(t: &FiberOperator, w: &WeightSequence, f: &FiberVector, n: usize) -> Result<FiberVector> {
    let mut g = f.clone();
    let mut acc = vec![0.0; f.len()];
    for k in 1..n {
        g = t.apply(&g)?;
        let b = w.eval(k as i64)?;
        for (a, v) in acc.iter_mut().zip(g.values()) {
            *a += b * v;
        }
    }
    FiberVector::new(acc.into_iter().map(|v| v / n as f64).collect())
}

/// `(∫ f dμ / μ(fiber))·1`, the mean a μ-preserving ergodic Markov operator
/// with fixed point 1 drives Cesàro averages toward.
pub fn invariant_mean(fiber: &Fiber, f: &FiberVector) -> Result<FiberVector> {
    let mean = fiber.integrate(f)? / fiber.total_mass();
    Ok(FiberVector::constant(f.len(), mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_on_polynomials_and_kinks() {
        assert_relative_eq!(adaptive_simpson(&|x| x * x, 0.0, 3.0, 1e-12), 9.0, max_relative = 1e-13);
        let v = adaptive_simpson(&|x: f64| (x - 1.0).abs(), 0.0, 3.0, 1e-13);
        assert_relative_eq!(v, 2.5, max_relative = 1e-11);
    }

    #[test]
    fn harmonic_small() {
        assert_relative_eq!(harmonic(4), 25.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn grid_search_matches_lp_norm() {
        let fiber = Fiber::new(vec![0.3, 1.0, 0.7]).unwrap();
        let x = FiberVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        let m = NFunction::power(2.0, 1.0).unwrap();
        let v = luxemburg_grid_search(&m, &fiber, &x, 100_000);
        let exact = fiber.lp_norm(&x, 2.0).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-8);
    }

    #[test]
    fn dual_sup_quadratic() {
        // M = t²/2: sup equals √2‖x‖₂
        let fiber = Fiber::new(vec![0.5, 1.5]).unwrap();
        let x = FiberVector::new(vec![1.0, -0.5]).unwrap();
        let m = NFunction::power(2.0, 0.5).unwrap();
        let v = orlicz_dual_sup(&m, &fiber, &x, 50, 1).unwrap();
        let exact = 2f64.sqrt() * fiber.lp_norm(&x, 2.0).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-9);
    }
}

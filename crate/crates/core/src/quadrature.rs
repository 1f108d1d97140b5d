//! One-dimensional quadrature rules shared by the phase integrals.

/// Composite Simpson rule over `[a, b]` with `intervals` subintervals
/// (rounded up to the next even number).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

const MAX_DEPTH: u32 = 48;
/// Cap on integrand evaluations; noisy integrands otherwise never meet `tol`.
const MAX_EVALS: usize = 2_000_000;

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Refines until the local error estimate falls below `tol` (scaled per
/// subinterval), so integrands with isolated jumps are handled by bisecting
/// down onto the discontinuity. Once the evaluation budget is spent the
/// remaining subintervals are accepted as they are.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = MAX_EVALS;
    recurse(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut budget)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> f64 {
    *budget = budget.saturating_sub(2);
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || *budget == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget);
    l + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)
}

//! Adaptive Simpson quadrature.

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Classic recursive Simpson with Richardson error control, bootstrapped on
/// a uniform 16-panel split so that narrow features inside a long interval
/// are not skipped by the first subdivision test. Suited to the smooth
/// integrands of this crate; not an oscillatory-integral workhorse.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        let x0 = a + h * k as f64;
        let x1 = if k + 1 == PANELS { b } else { a + h * (k + 1) as f64 };
        let fa = f(x0);
        let fb = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(f, x0, x1, fa, fm, fb, whole, panel_tol, 50);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
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
    if !(a < m && m < b) {
        return whole; // interval no longer representable
    }
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return left + right;
    }
    // accept on the Richardson estimate, at the roundoff floor, or at the
    // depth cap; children keep the parent tolerance (subdividing already
    // shrinks the true error much faster than the bound)
    if depth == 0
        || delta.abs() <= 15.0 * tol
        || delta.abs() <= 1e-14 * (left.abs() + right.abs())
    {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

//! Adaptive Simpson quadrature.

#[allow(unused_imports)]
use num_traits::Float;

const MAX_DEPTH: u32 = 48;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol || m - a <= f64::EPSILON * a.abs() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 0)
}

/// Integrates over `[a, b]` split into panels no wider than `step` (at most
/// `max_panels` of them) and additionally at every breakpoint inside the
/// range, so jump discontinuities sit on panel edges.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    step: f64,
    breakpoints: &[f64],
    tol: f64,
) -> f64 {
    const MAX_PANELS: f64 = 4096.0;
    if b <= a {
        return 0.0;
    }
    let width = step.max((b - a) / MAX_PANELS);
    let mut edges: alloc::vec::Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    edges.push(a);
    edges.push(b);
    edges.sort_by(|x, y| x.total_cmp(y));
    edges.dedup();
    let mut total = 0.0;
    let pieces = edges.len() - 1;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        let panel_tol = tol / (pieces * panels) as f64;
        for k in 0..panels {
            let x0 = lo + k as f64 * h;
            let x1 = if k + 1 == panels { hi } else { x0 + h };
            // nudge inwards so one-sided limits at jumps are used
            let eps = (x1 - x0) * 1e-13;
            total += adaptive_simpson(f, x0 + eps, x1 - eps, panel_tol);
        }
    }
    total
}

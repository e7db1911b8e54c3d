use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{Reflected, Tails};
use crate::error::{invalid, Result};
use crate::quad::integrate_panels;

/// Slack below `-PASS_TOLERANCE` (after normalization) counts as a failure.
pub const PASS_TOLERANCE: f64 = 1e-9;

/// Tails are truncated where they fall below this fraction of `μ([x, ∞))`.
const TRUNCATION: f64 = 1e-14;
const TRUNCATION_CAP: f64 = 1e12;
/// Mass of `∫ y μ([y,∞)) dy` over `[b, 2b]`, relative to the truncated
/// integral, above which the integral is declared divergent.
const DIVERGENCE_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassMParams {
    pub m: f64,
    pub sigma_sq: f64,
}

impl ClassMParams {
    pub fn new(m: f64, sigma_sq: f64) -> Result<Self> {
        let p = Self { m, sigma_sq };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(invalid("class M parameter m must be positive"));
        }
        if !(self.sigma_sq >= 0.0) || !self.sigma_sq.is_finite() {
            return Err(invalid("class M parameter sigma_sq must be nonnegative"));
        }
        Ok(())
    }
}

/// `E X² 1{X ≥ t}` against `(t² + 2σ²) P(X ≥ t)`, per grid point and side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentForm {
    pub lhs_upper: Vec<f64>,
    pub rhs_upper: Vec<f64>,
    pub lhs_lower: Vec<f64>,
    pub rhs_lower: Vec<f64>,
    pub margin_upper: Vec<f64>,
    pub margin_lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub check: String,
    pub grid: Vec<f64>,
    /// Normalized slack per grid point; empty for one-sided checks.
    pub margin_upper: Vec<f64>,
    pub margin_lower: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub worst_point: Option<f64>,
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub second_moment: Option<SecondMomentForm>,
}

impl MembershipReport {
    fn assemble(
        check: &str,
        grid: &[f64],
        margin_upper: Vec<f64>,
        margin_lower: Vec<f64>,
        diagnostics: Vec<String>,
    ) -> Self {
        let mut worst: Option<(f64, f64)> = None;
        for (i, &x) in grid.iter().enumerate() {
            let m = [margin_upper.get(i), margin_lower.get(i)]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            if m.is_finite() && worst.is_none_or(|(w, _)| m < w) {
                worst = Some((m, x));
            }
        }
        let passed = diagnostics.is_empty()
            && margin_upper
                .iter()
                .chain(&margin_lower)
                .all(|&m| m >= -PASS_TOLERANCE);
        Self {
            check: check.to_string(),
            grid: grid.to_vec(),
            margin_upper,
            margin_lower,
            tolerance: PASS_TOLERANCE,
            passed,
            worst_point: worst.map(|(_, x)| x),
            diagnostics,
            second_moment: None,
        }
    }

    /// Smallest slack over both sides.
    pub fn min_margin(&self) -> f64 {
        self.margin_upper
            .iter()
            .chain(&self.margin_lower)
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

/// `(rhs − lhs) / max(|rhs|, |lhs|)`, zero when both vanish.
fn normalized_slack(rhs: f64, lhs: f64) -> f64 {
    let scale = rhs.abs().max(lhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

/// `n` geometrically spaced points on `[lo, hi]`, `lo > 0`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let ratio = hi / lo;
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        lo * ratio.powf(k as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

/// 200 geometric points on `[m, m + 5σ + 5]`.
pub fn default_grid(params: &ClassMParams) -> Vec<f64> {
    geometric_grid(params.m, params.m + 5.0 * params.sigma_sq.sqrt() + 5.0, 200)
}

pub fn derive_ii_constants(params: &ClassMParams) -> (f64, f64) {
    (2.0 * params.sigma_sq, 0.5)
}

fn check_grid(grid: &[f64], m: f64) -> Result<()> {
    if let Some(x) = grid.iter().find(|x| !(**x >= m) || !x.is_finite()) {
        return Err(invalid(format!("grid point {x} is below m = {m}")));
    }
    Ok(())
}

/// `∫_x^∞ y μ([y,∞)) dy`, or a diagnostic when the truncated integral does
/// not settle.
fn tail_moment_integral<T: Tails + ?Sized>(
    tails: &T,
    x: f64,
    step: f64,
) -> core::result::Result<f64, String> {
    let qx = tails.upper_tail(x);
    if qx <= 0.0 {
        return Ok(0.0);
    }
    let mut b = x + x.abs().max(1.0);
    while tails.upper_tail(b) >= TRUNCATION * qx {
        if b > TRUNCATION_CAP {
            return Err(format!(
                "tail at x = {x} does not fall below {TRUNCATION:e} relative before {TRUNCATION_CAP:e}"
            ));
        }
        b = x + 2.0 * (b - x);
    }
    let breaks = tails.breakpoints();
    let integrand = |y: f64| y * tails.upper_tail(y);
    let tol = 1e-13 * qx * x.abs().max(1.0);
    let value = integrate_panels(&integrand, x, b, step, &breaks, tol);
    let beyond = integrate_panels(&integrand, b, 2.0 * b, step, &breaks, tol);
    if beyond.abs() > DIVERGENCE_RATIO * value.abs() {
        return Err(format!(
            "integral of y*Q(y) from x = {x} does not converge: {beyond:e} beyond truncation point {b:e} against {value:e} before it"
        ));
    }
    Ok(value)
}

struct SideResult {
    margin: Vec<f64>,
    lhs2: Vec<f64>,
    rhs2: Vec<f64>,
    margin2: Vec<f64>,
}

fn class_m_side<T: Tails + ?Sized>(
    tails: &T,
    sigma_sq: f64,
    grid: &[f64],
    step: f64,
    side: &str,
    diagnostics: &mut Vec<String>,
) -> SideResult {
    let mut out = SideResult {
        margin: Vec::with_capacity(grid.len()),
        lhs2: Vec::with_capacity(grid.len()),
        rhs2: Vec::with_capacity(grid.len()),
        margin2: Vec::with_capacity(grid.len()),
    };
    for &x in grid {
        let q = tails.upper_tail(x);
        match tail_moment_integral(tails, x, step) {
            Ok(integral) => {
                out.margin.push(normalized_slack(sigma_sq * q, integral));
                let lhs = x * x * q + 2.0 * integral;
                let rhs = (x * x + 2.0 * sigma_sq) * q;
                out.lhs2.push(lhs);
                out.rhs2.push(rhs);
                out.margin2.push(normalized_slack(rhs, lhs));
            }
            Err(msg) => {
                diagnostics.push(format!("{side} tail: {msg}"));
                out.margin.push(-1.0);
                out.lhs2.push(f64::INFINITY);
                out.rhs2.push((x * x + 2.0 * sigma_sq) * q);
                out.margin2.push(-1.0);
            }
        }
    }
    out
}

/// Tests `∫_x^∞ y μ([y,∞)) dy ≤ σ² μ([x,∞))` on both tails at every grid
/// point, together with the equivalent second-moment form.
pub fn check_class_m<T: Tails + ?Sized>(
    dist: &T,
    params: &ClassMParams,
    grid: &[f64],
    quad_step: f64,
) -> Result<MembershipReport> {
    params.validate()?;
    check_grid(grid, params.m)?;
    if !(quad_step > 0.0) {
        return Err(invalid("quad_step must be positive"));
    }
    let mut diagnostics = Vec::new();
    let up = class_m_side(
        dist,
        params.sigma_sq,
        grid,
        quad_step,
        "upper",
        &mut diagnostics,
    );
    let lo = class_m_side(
        &Reflected(dist),
        params.sigma_sq,
        grid,
        quad_step,
        "lower",
        &mut diagnostics,
    );
    let mut report = MembershipReport::assemble("class_m", grid, up.margin, lo.margin, diagnostics);
    report.second_moment = Some(SecondMomentForm {
        lhs_upper: up.lhs2,
        rhs_upper: up.rhs2,
        lhs_lower: lo.lhs2,
        rhs_lower: lo.rhs2,
        margin_upper: up.margin2,
        margin_lower: lo.margin2,
    });
    Ok(report)
}

/// Tests `μ([x + C/x, ∞)) ≤ α μ([x, ∞))` on both tails.
pub fn check_equivalence_ii<T: Tails + ?Sized>(
    dist: &T,
    m: f64,
    c: f64,
    alpha: f64,
    grid: &[f64],
) -> Result<MembershipReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha must lie in (0, 1)"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("C must be positive"));
    }
    check_grid(grid, m)?;
    let side = |t: &dyn Tails| -> Vec<f64> {
        grid.iter()
            .map(|&x| normalized_slack(alpha * t.upper_tail(x), t.upper_tail(x + c / x)))
            .collect()
    };
    let upper = side(&DynRef(dist));
    let lower = side(&Reflected(&DynRef(dist)));
    Ok(MembershipReport::assemble(
        "equivalence_ii",
        grid,
        upper,
        lower,
        Vec::new(),
    ))
}

/// Tests `P(|X| ≥ t) ≤ C1 exp(−t²/C2)`; the slack goes in `margin_upper`.
pub fn check_subgaussian<T: Tails + ?Sized>(
    dist: &T,
    c1: f64,
    c2: f64,
    grid: &[f64],
) -> Result<MembershipReport> {
    if !(c1 >= 1.0) || !(c2 > 0.0) {
        return Err(invalid("subgaussian check needs C1 >= 1 and C2 > 0"));
    }
    let margin = grid
        .iter()
        .map(|&t| normalized_slack(c1 * (-t * t / c2).exp(), dist.abs_tail(t)))
        .collect();
    Ok(MembershipReport::assemble(
        "subgaussian",
        grid,
        margin,
        Vec::new(),
        Vec::new(),
    ))
}

/// Tests `V′(x) ≥ x/σ²` and `V′(−x) ≤ −x/σ²` for a density `e^{−V}`.
pub fn check_density_criterion<F: Fn(f64) -> f64>(
    v_prime: F,
    params: &ClassMParams,
    grid: &[f64],
) -> Result<MembershipReport> {
    params.validate()?;
    if params.sigma_sq == 0.0 {
        return Err(invalid("density criterion is undefined for sigma_sq = 0"));
    }
    check_grid(grid, params.m)?;
    let mut diagnostics = Vec::new();
    let mut upper = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    for &x in grid {
        let target = x / params.sigma_sq;
        let (vp, vm) = (v_prime(x), v_prime(-x));
        if !vp.is_finite() || !vm.is_finite() {
            diagnostics.push(format!("V' is not finite at ±{x}"));
        }
        upper.push(normalized_slack(vp, target));
        lower.push(normalized_slack(-target, vm));
    }
    Ok(MembershipReport::assemble(
        "density_criterion",
        grid,
        upper,
        lower,
        diagnostics,
    ))
}

/// Smallest σ² for which the class M inequality holds on the grid, or
/// `None` when some tail integral diverges.
pub fn minimal_sigma_sq<T: Tails + ?Sized>(
    dist: &T,
    m: f64,
    grid: &[f64],
    quad_step: f64,
) -> Result<Option<f64>> {
    check_grid(grid, m)?;
    if !(quad_step > 0.0) {
        return Err(invalid("quad_step must be positive"));
    }
    let mut best = 0.0f64;
    for &x in grid {
        for side in [&DynRef(dist) as &dyn Tails, &Reflected(&DynRef(dist))] {
            let q = side.upper_tail(x);
            match tail_moment_integral(side, x, quad_step) {
                Ok(v) if q > 0.0 => best = best.max(v / q),
                Ok(_) => {}
                Err(_) => return Ok(None),
            }
        }
    }
    Ok(Some(best))
}

/// For each candidate `C2`, the least `C1 ≥ 1` with
/// `P(|X| ≥ t) ≤ C1 exp(−t²/C2)` on the grid.
pub fn find_subgaussian_constants<T: Tails + ?Sized>(
    dist: &T,
    grid: &[f64],
    c2_candidates: &[f64],
) -> Vec<(f64, f64)> {
    c2_candidates
        .iter()
        .filter(|c2| **c2 > 0.0)
        .map(|&c2| {
            let c1 = grid.iter().fold(1.0f64, |acc, &t| {
                let p = dist.abs_tail(t);
                if p > 0.0 {
                    acc.max((p.ln() + t * t / c2).exp())
                } else {
                    acc
                }
            });
            (c1, c2)
        })
        .collect()
}

/// Adapter so generic `?Sized` tails can be passed as `&dyn Tails`.
struct DynRef<'a, T: ?Sized>(&'a T);

impl<T: Tails + ?Sized> Tails for DynRef<'_, T> {
    fn upper_tail(&self, x: f64) -> f64 {
        self.0.upper_tail(x)
    }
    fn lower_tail(&self, x: f64) -> f64 {
        self.0.lower_tail(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::math::{normal_pdf, normal_sf};
    use crate::quad::adaptive_simpson;

    /// `Q(x) = 1/x²` for `x ≥ 1`, symmetric.
    struct InverseSquare;

    impl Tails for InverseSquare {
        fn upper_tail(&self, x: f64) -> f64 {
            if x <= 1.0 {
                0.5
            } else {
                0.5 / (x * x)
            }
        }
        fn lower_tail(&self, x: f64) -> f64 {
            self.upper_tail(-x)
        }
    }

    fn gauss() -> DistributionSpec {
        DistributionSpec::standard_gaussian()
    }

    fn half_steps(lo: f64, hi: f64) -> Vec<f64> {
        let n = ((hi - lo) / 0.5).round() as usize;
        (0..=n).map(|k| lo + 0.5 * k as f64).collect()
    }

    #[test]
    fn gaussian_is_in_class_m() {
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        let r = check_class_m(&gauss(), &p, &half_steps(1.0, 6.0), 0.01).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.diagnostics.is_empty());
        let r = check_class_m(&gauss(), &p, &default_grid(&p), 0.01).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn gaussian_tail_integral_matches_closed_form() {
        // ∫_x^∞ y Q(y) dy = ((1 − x²)Q(x) + xφ(x)) / 2 for the standard normal
        for x in [1.0, 2.5, 4.0, 6.0] {
            let got = tail_moment_integral(&gauss(), x, 0.01).unwrap();
            let want = 0.5 * ((1.0 - x * x) * normal_sf(x) + x * normal_pdf(x));
            assert!((got - want).abs() <= 1e-9 * want, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn second_moment_form_at_one() {
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        let r = check_class_m(&gauss(), &p, &[1.0], 0.01).unwrap();
        let s = r.second_moment.unwrap();
        let lhs_oracle = adaptive_simpson(&|y: f64| y * y * normal_pdf(y), 1.0, 40.0, 1e-15);
        assert!((s.lhs_upper[0] - lhs_oracle).abs() < 1e-10);
        assert!((s.lhs_upper[0] - 0.40063).abs() < 1e-5);
        assert!((s.rhs_upper[0] - 3.0 * normal_sf(1.0)).abs() < 1e-15);
        assert!((s.rhs_upper[0] - 0.47598).abs() < 2e-5);
        assert!(s.margin_upper[0] > 0.0);
    }

    #[test]
    fn bounded_support_beyond_m_has_zero_margins() {
        let d = DistributionSpec::TwoPoint {
            v1: -1.0,
            p1: 0.4,
            v2: 2.0,
        };
        let p = ClassMParams::new(3.0, 0.0).unwrap();
        let r = check_class_m(&d, &p, &[3.0, 4.0, 10.0], 0.01).unwrap();
        assert!(r.passed);
        assert!(r
            .margin_upper
            .iter()
            .chain(&r.margin_lower)
            .all(|&m| m == 0.0));
    }

    #[test]
    fn discrete_class_m_against_exact_sums() {
        // For atoms the tail integral is Σ_{a ≥ x} p (a² − x²)/2
        let d = DistributionSpec::Discrete {
            atoms: alloc::vec![-3.0, -1.0, 0.5, 2.0, 4.0],
            probs: alloc::vec![0.1, 0.2, 0.3, 0.25, 0.15],
        };
        for x in [1.0, 1.7, 2.0, 3.0] {
            let want: f64 = [(2.0, 0.25), (4.0, 0.15)]
                .iter()
                .filter(|(a, _)| *a >= x)
                .map(|(a, p)| p * (a * a - x * x) / 2.0)
                .sum();
            let got = tail_moment_integral(&d, x, 0.01).unwrap();
            assert!((got - want).abs() < 1e-11, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn heavy_tail_is_reported_not_raised() {
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        let r = check_class_m(&InverseSquare, &p, &[1.0, 2.0], 0.1).unwrap();
        assert!(!r.passed);
        assert!(!r.diagnostics.is_empty());
        assert_eq!(
            minimal_sigma_sq(&InverseSquare, 1.0, &[2.0], 0.1).unwrap(),
            None
        );
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(ClassMParams::new(0.0, 1.0).is_err());
        assert!(ClassMParams::new(1.0, -1.0).is_err());
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        assert!(check_class_m(&gauss(), &p, &[0.5], 0.01).is_err());
        assert!(check_class_m(&gauss(), &p, &[1.0], 0.0).is_err());
        assert!(check_equivalence_ii(&gauss(), 1.0, 2.0, 1.0, &[1.0]).is_err());
        assert!(check_subgaussian(&gauss(), 0.5, 1.0, &[1.0]).is_err());
        let p0 = ClassMParams::new(1.0, 0.0).unwrap();
        assert!(check_density_criterion(|x| x, &p0, &[1.0]).is_err());
    }

    #[test]
    fn ii_constants() {
        let c = |m, s| derive_ii_constants(&ClassMParams::new(m, s).unwrap());
        assert_eq!(c(1.0, 1.0), (2.0, 0.5));
        assert_eq!(c(3.0, 0.0), (0.0, 0.5));
        assert_eq!(c(1.0, 2.5), (5.0, 0.5));
    }

    #[test]
    fn equivalence_ii_examples() {
        let grid = half_steps(1.0, 6.0);
        let r = check_equivalence_ii(&gauss(), 1.0, 2.0, 0.5, &grid).unwrap();
        assert!(r.passed);
        // independent oracle: density quadrature for both tail values
        for (i, &x) in grid.iter().enumerate() {
            let q = |a: f64| adaptive_simpson(&|y: f64| normal_pdf(y), a, a + 40.0, 1e-16);
            let slack = 0.5 * q(x) - q(x + 2.0 / x);
            assert!(slack > 0.0);
            let norm = slack / (0.5 * q(x)).max(q(x + 2.0 / x));
            assert!((norm - r.margin_upper[i]).abs() < 1e-6);
        }
        let r = check_equivalence_ii(&DistributionSpec::Rademacher, 2.0, 0.3, 0.2, &[2.0, 5.0])
            .unwrap();
        assert!(r.passed);
        let r = check_equivalence_ii(&InverseSquare, 1.0, 2.0, 0.5, &[10.0]).unwrap();
        assert!(!r.passed);
        // Q(x + 2/x)/Q(x) = x⁴/(x² + 2)² → 1
        let ratio: f64 = 100.0 / (102.0f64 * 102.0 / 100.0);
        assert!(
            (InverseSquare.upper_tail(10.2) / InverseSquare.upper_tail(10.0) - ratio).abs() < 1e-12
        );
        assert_eq!(r.worst_point, Some(10.0));
    }

    #[test]
    fn subgaussian_examples() {
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 / 10.0).collect();
        assert!(check_subgaussian(&gauss(), 1.0, 2.0, &grid).unwrap().passed);
        let r = check_subgaussian(
            &DistributionSpec::Rademacher,
            core::f64::consts::E,
            1.0,
            &grid,
        )
        .unwrap();
        assert!(r.passed);
        let r = check_subgaussian(
            &DistributionSpec::Uniform { a: -1.0, b: 1.0 },
            1.0,
            0.1,
            &[0.0],
        )
        .unwrap();
        assert_eq!(r.margin_upper, alloc::vec![0.0]);
    }

    #[test]
    fn density_criterion_examples() {
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        let grid = default_grid(&p);
        assert!(check_density_criterion(|x| x, &p, &grid).unwrap().passed);
        assert!(
            check_density_criterion(|x| x * x * x, &p, &grid)
                .unwrap()
                .passed
        );
        let r = check_density_criterion(|x| 0.1 * x, &p, &grid).unwrap();
        assert!(!r.passed);
        assert!(r.margin_upper.iter().all(|&m| m < 0.0));
        assert!(r.margin_lower.iter().all(|&m| m < 0.0));
    }

    #[test]
    fn forward_direction_and_subgaussian_sweep() {
        let cases = [
            (gauss(), 1.0, 1.0),
            (DistributionSpec::Gaussian { mean: 0.3, sd: 1.5 }, 1.0, 3.0),
            (DistributionSpec::ExpPower { r: 3.0, scale: 1.0 }, 1.0, 1.0),
            (DistributionSpec::Uniform { a: -2.0, b: 1.0 }, 0.5, 1.0),
            (DistributionSpec::Rademacher, 0.5, 1.0),
        ];
        for (d, m, s) in cases {
            let p = ClassMParams::new(m, s).unwrap();
            let grid = default_grid(&p);
            let rm = check_class_m(&d, &p, &grid, 0.01).unwrap();
            assert!(rm.passed, "{d:?}: {}", rm.min_margin());
            let (c, a) = derive_ii_constants(&p);
            assert!(
                check_equivalence_ii(&d, m, c, a, &grid).unwrap().passed,
                "{d:?}"
            );
            let tgrid: Vec<f64> = (0..=300).map(|k| k as f64 / 20.0).collect();
            let found = find_subgaussian_constants(&d, &tgrid, &[0.5, 1.0, 2.0, 4.0, 8.0]);
            let (c1, c2) = found
                .iter()
                .copied()
                .find(|(c1, _)| c1.is_finite())
                .unwrap();
            assert!(check_subgaussian(&d, c1, c2, &tgrid).unwrap().passed);
        }
    }

    #[test]
    fn minimal_sigma_sq_is_tight() {
        let p = ClassMParams::new(1.0, 1.0).unwrap();
        let grid = default_grid(&p);
        let s = minimal_sigma_sq(&gauss(), 1.0, &grid, 0.01)
            .unwrap()
            .unwrap();
        assert!(s <= 1.0 && s > 0.5);
        let at = ClassMParams::new(1.0, s).unwrap();
        assert!(check_class_m(&gauss(), &at, &grid, 0.01).unwrap().passed);
        let below = ClassMParams::new(1.0, s * 0.999).unwrap();
        assert!(!check_class_m(&gauss(), &below, &grid, 0.01).unwrap().passed);
    }
}

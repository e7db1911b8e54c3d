//! Ground truth computed along code paths that share nothing with the main
//! routines: exhaustive sign enumeration, grid search with coordinate polish,
//! and closed forms.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::chaos::ChaosSpec;
use crate::error::{invalid, Error, Result};
use crate::math::ln_gamma;
use crate::stats::ExactDistribution;

/// Largest number of outcomes any enumeration visits.
pub const MAX_OUTCOMES: u64 = 1 << 20;
/// Largest dimension accepted by [`grid_polish_max`].
pub const MAX_GRID_DIM: usize = 6;
/// Largest number of grid points visited by [`grid_polish_max`].
pub const MAX_GRID_POINTS: u64 = 1 << 26;

/// `sup_T |Σ_i t_i Π_k x^{(k)}_{i_k}|` by a direct sum over all index tuples.
pub fn naive_chaos_value(spec: &ChaosSpec, x: &[f64]) -> f64 {
    let d = spec.order();
    let n = spec.side();
    let mut best = 0.0f64;
    for t in spec.family() {
        let mut total = 0.0;
        for (flat, &coef) in t.entries().iter().enumerate() {
            let mut rest = flat;
            let mut prod = coef;
            for k in (0..d).rev() {
                let i = rest % n;
                rest /= n;
                let row = if spec.decoupled() { k } else { 0 };
                prod *= x[row * n + i];
            }
            total += prod;
        }
        best = best.max(total.abs());
    }
    best
}

/// Exact law of the chaos over all sign patterns of a Rademacher spec.
pub fn brute_force_enumerate(spec: &ChaosSpec) -> Result<ExactDistribution> {
    if !spec.all_rademacher() {
        return Err(invalid("enumeration needs Rademacher generators"));
    }
    let signs = spec.rows() * spec.side();
    if signs > 20 {
        return Err(Error::SizeCap {
            what: "sign count",
            limit: 20,
        });
    }
    let count = 1u64 << signs;
    let prob = 1.0 / count as f64;
    let mut x = vec![0.0; signs];
    let mut values = Vec::with_capacity(count as usize);
    for pattern in 0..count {
        for (b, v) in x.iter_mut().enumerate() {
            *v = if pattern >> b & 1 == 1 { -1.0 } else { 1.0 };
        }
        values.push(naive_chaos_value(spec, &x));
    }
    ExactDistribution::from_pairs(values.into_iter().map(|v| (v, prob)))
}

/// Law of `Σ_{i<n} ε_i` from binomial coefficients.
pub fn rademacher_sum_law(n: u32) -> Result<ExactDistribution> {
    let ln2n = n as f64 * core::f64::consts::LN_2;
    let lf = |k: u32| ln_gamma(k as f64 + 1.0);
    ExactDistribution::from_pairs((0..=n).map(|k| {
        let p = (lf(n) - lf(k) - lf(n - k) - ln2n).exp();
        (2.0 * k as f64 - n as f64, p)
    }))
}

/// `P(Σ_{i<n} ε_i ≥ s)`.
pub fn rademacher_sum_tail(n: u32, s: f64) -> Result<f64> {
    Ok(rademacher_sum_law(n)?.prob_at_least(s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMax {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub grid_value: f64,
    pub grid_points: u64,
}

/// Maximum of `objective` over the feasible points of the box `[lo, hi]`,
/// first on a grid of spacing at most `resolution`, then by coordinate
/// pattern search from the best grid point. Never exceeds the true supremum.
pub fn grid_polish_max<F, G>(
    objective: F,
    feasible: G,
    lo: &[f64],
    hi: &[f64],
    resolution: f64,
    polish_steps: usize,
) -> Result<GridMax>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> bool,
{
    let dim = lo.len();
    if hi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: hi.len(),
        });
    }
    if dim > MAX_GRID_DIM {
        return Err(Error::SizeCap {
            what: "grid dimension",
            limit: MAX_GRID_DIM as u64,
        });
    }
    if !(resolution > 0.0) || lo.iter().zip(hi).any(|(a, b)| !(b >= a)) {
        return Err(invalid("grid needs a positive resolution and lo <= hi"));
    }
    let cells: Vec<u64> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((b - a) / resolution).ceil().max(0.0) as u64)
        .collect();
    let total = cells
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c + 1))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or(Error::SizeCap {
            what: "grid points",
            limit: MAX_GRID_POINTS,
        })?;
    let coord = |axis: usize, i: u64| {
        if cells[axis] == 0 {
            lo[axis]
        } else {
            lo[axis] + (hi[axis] - lo[axis]) * i as f64 / cells[axis] as f64
        }
    };
    let mut x = lo.to_vec();
    let mut counter = vec![0u64; dim];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..total {
        for axis in 0..dim {
            x[axis] = coord(axis, counter[axis]);
        }
        if feasible(&x) {
            let v = objective(&x);
            if v.is_finite() && best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, x.clone()));
            }
        }
        for axis in (0..dim).rev() {
            counter[axis] += 1;
            if counter[axis] <= cells[axis] {
                break;
            }
            counter[axis] = 0;
        }
    }
    let (grid_value, mut argmax) = best.ok_or_else(|| invalid("no feasible grid point"))?;
    let mut value = grid_value;
    let mut step = resolution;
    for _ in 0..polish_steps {
        let mut improved = false;
        for axis in 0..dim {
            for dir in [1.0, -1.0] {
                let mut y = argmax.clone();
                y[axis] = (y[axis] + dir * step).clamp(lo[axis], hi[axis]);
                if feasible(&y) {
                    let v = objective(&y);
                    if v > value {
                        value = v;
                        argmax = y;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(GridMax {
        value,
        argmax,
        grid_value,
        grid_points: total,
    })
}

/// Feasible sets the form oracle handles in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OracleBall {
    Euclidean,
    /// `{Σα² ≤ p, |α_i| ≤ 1}`.
    Rademacher {
        p: f64,
    },
}

impl OracleBall {
    /// Minkowski gauge.
    pub fn gauge(&self, a: &[f64]) -> f64 {
        let l2 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        match *self {
            OracleBall::Euclidean => l2,
            OracleBall::Rademacher { p } => {
                let linf = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                linf.max(l2 / p.sqrt())
            }
        }
    }

    /// `sup_{α in the set} ⟨c, α⟩`.
    pub fn support(&self, c: &[f64]) -> f64 {
        match *self {
            OracleBall::Euclidean => c.iter().map(|v| v * v).sum::<f64>().sqrt(),
            OracleBall::Rademacher { p } => water_fill(c, p),
        }
    }
}

/// `sup {⟨c, α⟩ : Σα² ≤ p, |α_i| ≤ 1}`: the largest `k` entries saturate,
/// the rest are proportional to `c` with a common multiplier.
pub fn water_fill(c: &[f64], p: f64) -> f64 {
    let mut a: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let mut head = 0.0;
    for k in 0..=a.len() {
        let rest: f64 = a[k..].iter().map(|v| v * v).sum();
        if rest == 0.0 {
            return head;
        }
        let room = p - k as f64;
        if room > 0.0 {
            let lambda = (rest / room).sqrt();
            if a[k] <= lambda {
                return head + rest / lambda;
            }
        }
        head += a[k];
    }
    head
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormOracle {
    /// Certified lower bound on the supremum.
    pub value: f64,
    /// The supremum is at most `value + resolution_bound`.
    pub resolution_bound: f64,
    pub grid_points: u64,
}

/// Supremum of the multilinear form with coefficients `coeffs` (block 0 most
/// significant) over `balls`, by grid search on all blocks but the last and
/// the closed-form support function on the last.
/// Largest singular value of a row-major `n × n` matrix, from cyclic Jacobi
/// sweeps on its Gram matrix.
pub fn spectral_norm(a: &[f64], n: usize) -> f64 {
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum();
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| g[i * n + j] * g[i * n + j])
            .sum();
        let diag: f64 = (0..n).map(|i| g[i * n + i] * g[i * n + i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = g[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (g[q * n + q] - g[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (gkp, gkq) = (g[k * n + p], g[k * n + q]);
                    g[k * n + p] = c * gkp - s * gkq;
                    g[k * n + q] = s * gkp + c * gkq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[p * n + k], g[q * n + k]);
                    g[p * n + k] = c * gpk - s * gqk;
                    g[q * n + k] = s * gpk + c * gqk;
                }
            }
        }
    }
    (0..n)
        .map(|i| g[i * n + i])
        .fold(0.0, f64::max)
        .max(0.0)
        .sqrt()
}

pub fn form_sup_oracle(
    coeffs: &[f64],
    side: usize,
    balls: &[OracleBall],
    resolution: f64,
    polish_steps: usize,
) -> Result<FormOracle> {
    let m = balls.len();
    if m == 0 || coeffs.len() != side.pow(m as u32) {
        return Err(invalid("coefficient count does not match blocks and side"));
    }
    let last = balls[m - 1];
    if m == 1 {
        return Ok(FormOracle {
            value: last.support(coeffs),
            resolution_bound: 0.0,
            grid_points: 1,
        });
    }
    // two trailing Euclidean blocks collapse to a spectral norm
    let pair = m >= 2
        && matches!(balls[m - 1], OracleBall::Euclidean)
        && matches!(balls[m - 2], OracleBall::Euclidean);
    let tail = if pair { 2 } else { 1 };
    let head = m - tail;
    let width = side.pow(tail as u32);
    let objective = |x: &[f64]| {
        let mut denom = 1.0;
        for (k, ball) in balls[..head].iter().enumerate() {
            denom *= ball.gauge(&x[k * side..(k + 1) * side]);
        }
        if denom == 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut c = vec![0.0; width];
        for (flat, &coef) in coeffs.iter().enumerate() {
            let mut rest = flat / width;
            let mut prod = coef;
            for k in (0..head).rev() {
                prod *= x[k * side + rest % side];
                rest /= side;
            }
            c[flat % width] += prod;
        }
        let top = if pair {
            spectral_norm(&c, side)
        } else {
            last.support(&c)
        };
        top / denom
    };
    if head == 0 {
        return Ok(FormOracle {
            value: objective(&[]),
            resolution_bound: 0.0,
            grid_points: 1,
        });
    }
    let dim = head * side;
    let g = grid_polish_max(
        objective,
        |_| true,
        &vec![-1.0; dim],
        &vec![1.0; dim],
        resolution,
        polish_steps,
    )?;
    // grid spacing h puts a point within h√n/2 (in ℓ₂, which dominates both
    // gauges) of every optimal block
    let h = 2.0 / (2.0 / resolution).ceil();
    let delta = h * (side as f64).sqrt() / 2.0;
    let grow = (1.0 + delta).powi(head as i32);
    let eps = 2.0 * (1.0 - 1.0 / grow);
    let value = g.value.max(0.0);
    let resolution_bound = if eps < 1.0 {
        value * eps / (1.0 - eps)
    } else {
        f64::INFINITY
    };
    Ok(FormOracle {
        value,
        resolution_bound,
        grid_points: g.grid_points,
    })
}

/// `‖T‖_I` for a Rademacher spec: every sign pattern of the rows outside
/// `subset` (bit `k` is mode `k`) is contracted by direct summation and the
/// remaining form is handed to [`form_sup_oracle`] with Euclidean balls.
/// The returned bound is the pattern average of the per-pattern bounds.
pub fn norm_t_i_oracle(
    spec: &ChaosSpec,
    subset: u32,
    resolution: f64,
    polish_steps: usize,
) -> Result<FormOracle> {
    if !spec.all_rademacher() {
        return Err(invalid("enumeration needs Rademacher generators"));
    }
    let (d, n) = (spec.order(), spec.side());
    if d >= 32 || subset >> d != 0 {
        return Err(invalid("subset names a mode beyond the order"));
    }
    let kept: Vec<usize> = (0..d).filter(|k| subset >> k & 1 == 1).collect();
    let free_rows = if spec.decoupled() {
        d - kept.len()
    } else {
        usize::from(kept.len() < d)
    };
    let signs = free_rows * n;
    if signs as u64 >= 64 || 1u64 << signs > MAX_OUTCOMES {
        return Err(Error::SizeCap {
            what: "sign patterns",
            limit: MAX_OUTCOMES,
        });
    }
    let count = 1u64 << signs;
    let width = n.pow(kept.len() as u32);
    let balls = vec![OracleBall::Euclidean; kept.len()];
    let (mut value, mut bound, mut points) = (0.0, 0.0, 0);
    let mut digits = vec![0usize; d];
    for pattern in 0..count {
        let sign = |row: usize, i: usize| {
            if pattern >> (row * n + i) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        };
        let (mut best, mut best_top) = (0.0f64, 0.0f64);
        for t in spec.family() {
            let mut c = vec![0.0; width];
            for (flat, &coef) in t.entries().iter().enumerate() {
                let mut rest = flat;
                for k in (0..d).rev() {
                    digits[k] = rest % n;
                    rest /= n;
                }
                let (mut prod, mut at, mut row) = (coef, 0, 0);
                for (k, &i) in digits.iter().enumerate() {
                    if subset >> k & 1 == 1 {
                        at = at * n + i;
                    } else {
                        prod *= sign(row, i);
                        if spec.decoupled() {
                            row += 1;
                        }
                    }
                }
                c[at] += prod;
            }
            let f = if kept.is_empty() {
                FormOracle {
                    value: c[0].abs(),
                    resolution_bound: 0.0,
                    grid_points: 1,
                }
            } else {
                form_sup_oracle(&c, n, &balls, resolution, polish_steps)?
            };
            best = best.max(f.value);
            best_top = best_top.max(f.value + f.resolution_bound);
            points += f.grid_points;
        }
        value += best;
        bound += best_top - best;
    }
    Ok(FormOracle {
        value: value / count as f64,
        resolution_bound: bound / count as f64,
        grid_points: points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::CoefficientTensor;

    #[test]
    fn enumeration_examples() {
        let id = ChaosSpec::rademacher(2, 2, vec![CoefficientTensor::identity(2).unwrap()], true)
            .unwrap();
        let law = brute_force_enumerate(&id).unwrap();
        assert_eq!(law.support(), &[0.0, 2.0]);
        assert_eq!(law.probs(), &[0.5, 0.5]);
        let zero = ChaosSpec::rademacher(2, 3, vec![CoefficientTensor::zeros(2, 3).unwrap()], true)
            .unwrap();
        assert_eq!(
            brute_force_enumerate(&zero).unwrap(),
            ExactDistribution::point_mass(0.0)
        );
        let lin = ChaosSpec::rademacher(
            1,
            2,
            vec![CoefficientTensor::vector(vec![1.0, 1.0]).unwrap()],
            true,
        )
        .unwrap();
        let law = brute_force_enumerate(&lin).unwrap();
        assert_eq!(law.support(), &[0.0, 2.0]);
        assert_eq!(law.probs(), &[0.5, 0.5]);
        let big = ChaosSpec::rademacher(3, 7, vec![], true).unwrap();
        assert!(matches!(
            brute_force_enumerate(&big),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn binomial_law_matches_enumeration() {
        let ones = CoefficientTensor::vector(vec![1.0; 6]).unwrap();
        let spec = ChaosSpec::rademacher(1, 6, vec![ones], true).unwrap();
        let enumerated = brute_force_enumerate(&spec).unwrap();
        let folded = ExactDistribution::from_pairs(
            rademacher_sum_law(6)
                .unwrap()
                .iter()
                .map(|(v, p)| (v.abs(), p)),
        )
        .unwrap();
        assert_eq!(enumerated.support(), folded.support());
        for (a, b) in enumerated.probs().iter().zip(folded.probs()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((rademacher_sum_tail(4, 4.0).unwrap() - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn grid_examples() {
        let disc = |x: &[f64]| x[0] * x[0] + x[1] * x[1] <= 1.0;
        let g = grid_polish_max(
            |x| 3.0 * x[0] + 4.0 * x[1],
            disc,
            &[-1.0; 2],
            &[1.0; 2],
            1e-3,
            40,
        )
        .unwrap();
        assert!(g.value >= 5.0 - 1e-3 && g.value <= 5.0);
        let c = grid_polish_max(|_| 7.5, |_| true, &[0.0; 3], &[1.0; 3], 0.5, 5).unwrap();
        assert_eq!(c.value, 7.5);
        assert!(grid_polish_max(|_| 0.0, |_| true, &[0.0; 7], &[1.0; 7], 1.0, 0).is_err());
    }

    #[test]
    fn bilinear_diag_oracle() {
        let f = form_sup_oracle(
            &[3.0, 0.0, 0.0, 1.0],
            2,
            &[OracleBall::Euclidean; 2],
            1e-3,
            40,
        )
        .unwrap();
        assert!((f.value - 3.0).abs() < 1e-6, "{f:?}");
        assert!(f.value + f.resolution_bound >= 3.0);
        assert_eq!(f.grid_points, 1);
    }

    #[test]
    fn trilinear_oracles() {
        // diagonal 3-tensor of side 2: sup over unit balls is the largest weight
        let mut c = vec![0.0; 8];
        c[0] = 2.0;
        c[7] = 1.0;
        let f = form_sup_oracle(&c, 2, &[OracleBall::Euclidean; 3], 1e-3, 60).unwrap();
        assert!((f.value - 2.0).abs() < 1e-6, "{f:?}");
        let mixed = [
            OracleBall::Rademacher { p: 1.0 },
            OracleBall::Euclidean,
            OracleBall::Euclidean,
        ];
        let g = form_sup_oracle(&c, 2, &mixed, 1e-3, 60).unwrap();
        assert!((g.value - 2.0).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn identity_norm_oracle() {
        use crate::chaos::CoefficientTensor;
        let spec = ChaosSpec::rademacher(2, 2, vec![CoefficientTensor::identity(2).unwrap()], true)
            .unwrap();
        let at = |s| norm_t_i_oracle(&spec, s, 1e-3, 60).unwrap().value;
        assert!((at(0) - 1.0).abs() < 1e-12);
        assert!((at(1) - 2f64.sqrt()).abs() < 1e-9);
        assert!((at(2) - 2f64.sqrt()).abs() < 1e-9);
        assert!((at(3) - 1.0).abs() < 1e-9);
        assert!(norm_t_i_oracle(&spec, 4, 1e-3, 60).is_err());
    }

    #[test]
    fn spectral_norm_cases() {
        assert!((spectral_norm(&[3.0, 0.0, 0.0, -1.0], 2) - 3.0).abs() < 1e-12);
        // [[1,1],[0,1]] has largest singular value golden ratio
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_norm(&[1.0, 1.0, 0.0, 1.0], 2) - phi).abs() < 1e-12);
        assert_eq!(spectral_norm(&[0.0; 9], 3), 0.0);
        // rank one: |u||v|
        let (u, v) = ([1.0, 2.0, 2.0], [2.0, -1.0, 2.0]);
        let a: Vec<f64> = (0..9).map(|k| u[k / 3] * v[k % 3]).collect();
        assert!((spectral_norm(&a, 3) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn water_fill_cases() {
        assert!((water_fill(&[3.0, 1.0], 1.0) - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(water_fill(&[3.0, -1.0, 0.5], 3.0), 4.5);
        // p = 1.5: first coordinate saturates, (1, 1) gets multiplier 1/2
        assert_eq!(water_fill(&[3.0, 1.0, 1.0], 1.5), 4.0);
        assert_eq!(water_fill(&[0.0, 0.0], 1.0), 0.0);
    }
}

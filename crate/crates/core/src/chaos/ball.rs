use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tail_fn::{Segment, TailFunctionN};
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;

/// Most coordinates with a non-convex tabulated `Ñ` in one constraint; the
/// solver enumerates `2^k` region assignments for them.
pub const MAX_NONCONVEX_TABULATED: usize = 16;

/// Feasible set for one factor of a multilinear form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BallConstraint {
    /// `{α : |α| ≤ 1}`.
    EuclideanUnit,
    /// `{α : Σ Ñ_i(α_i) ≤ p}`.
    #[serde(rename = "a_k_p")]
    Akp { funcs: Vec<TailFunctionN>, p: f64 },
}

impl BallConstraint {
    pub fn akp(funcs: Vec<TailFunctionN>, p: f64) -> Result<Self> {
        let c = Self::Akp { funcs, p };
        c.validate()?;
        Ok(c)
    }

    /// `{Σ α² ≤ p, |α_i| ≤ 1}` in dimension `n`.
    pub fn rademacher(n: usize, p: f64) -> Result<Self> {
        Self::akp(vec![TailFunctionN::Rademacher; n], p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Akp { funcs, p } = self {
            if !(*p > 0.0) || !p.is_finite() {
                return Err(invalid("A_{k,p} level p must be positive and finite"));
            }
            let k = funcs
                .iter()
                .filter(|f| matches!(f, TailFunctionN::Tabulated { .. }) && !f.tilde_is_convex())
                .count();
            if k > MAX_NONCONVEX_TABULATED {
                return Err(Error::SizeCap {
                    what: "coordinates with non-convex tabulated N",
                    limit: MAX_NONCONVEX_TABULATED as u64,
                });
            }
        }
        Ok(())
    }

    /// Dimension fixed by the constraint, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::EuclideanUnit => None,
            Self::Akp { funcs, .. } => Some(funcs.len()),
        }
    }

    /// Same tail functions at a different level.
    pub fn at_level(&self, level: f64) -> Self {
        match self {
            Self::EuclideanUnit => Self::EuclideanUnit,
            Self::Akp { funcs, .. } => Self::Akp {
                funcs: funcs.clone(),
                p: level,
            },
        }
    }

    /// Exact membership test.
    pub fn contains(&self, alpha: &[f64]) -> bool {
        self.contains_within(alpha, 0.0)
    }

    /// Membership with relative slack `tol` on the defining inequality.
    pub fn contains_within(&self, alpha: &[f64], tol: f64) -> bool {
        match self {
            Self::EuclideanUnit => alpha.iter().map(|a| a * a).sum::<f64>() <= 1.0 + tol,
            Self::Akp { funcs, p } => {
                funcs.len() == alpha.len()
                    && funcs
                        .iter()
                        .zip(alpha)
                        .map(|(f, &a)| f.eval_tilde(a))
                        .sum::<f64>()
                        <= p * (1.0 + tol)
            }
        }
    }

    /// Minkowski gauge `inf{s > 0 : α/s ∈ K}`.
    pub fn gauge(&self, alpha: &[f64]) -> f64 {
        let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        match self {
            Self::EuclideanUnit => norm,
            Self::Akp { funcs, p } => {
                if norm == 0.0 {
                    return 0.0;
                }
                let load = |s: f64| -> f64 {
                    funcs
                        .iter()
                        .zip(alpha)
                        .map(|(f, &a)| f.eval_tilde(a / s))
                        .sum()
                };
                let sup = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                // at this scale every coordinate is in the quadratic part
                let mut hi = sup.max(norm / p.sqrt());
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if load(mid) <= *p {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-16 * hi {
                        break;
                    }
                }
                hi
            }
        }
    }

    /// A random boundary point: the maximizer for a Gaussian direction.
    pub fn random_point(&self, n: usize, rng: &mut RandomStream) -> Vec<f64> {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        solve_unchecked(&g, self).0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallArgmax {
    pub argmax: Vec<f64>,
    pub value: f64,
}

/// `max ⟨c, α⟩` over the constraint set.
pub fn solve_ball_argmax(c: &[f64], constraint: &BallConstraint) -> Result<BallArgmax> {
    if let Some(n) = constraint.dim() {
        if n != c.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(invalid("objective vector must be finite"));
    }
    let (argmax, value) = solve_unchecked(c, constraint);
    Ok(BallArgmax { argmax, value })
}

pub(crate) fn solve_unchecked(c: &[f64], constraint: &BallConstraint) -> (Vec<f64>, f64) {
    match constraint {
        BallConstraint::EuclideanUnit => {
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                (vec![0.0; c.len()], 0.0)
            } else {
                (c.iter().map(|v| v / norm).collect(), norm)
            }
        }
        BallConstraint::Akp { funcs, p } => solve_akp(c, funcs, *p),
    }
}

/// Per-coordinate convex cost with its weight `|c_i|`.
struct Coord {
    w: f64,
    segs: Vec<Segment>,
}

impl Coord {
    fn lo(&self) -> f64 {
        self.segs[0].start()
    }

    fn segment_at(&self, s: f64) -> &Segment {
        self.segs
            .iter()
            .find(|seg| s <= seg.end())
            .unwrap_or_else(|| self.segs.last().unwrap())
    }

    fn cost(&self, s: f64) -> f64 {
        self.segment_at(s).cost(s)
    }

    /// Largest affordable point at total budget `p`.
    fn cap(&self, p: f64) -> f64 {
        for seg in &self.segs {
            if seg.cost(seg.end()) > p || seg.end().is_infinite() {
                return seg.inverse(p);
            }
        }
        self.segs.last().unwrap().end()
    }

    /// Maximizer of `w μ s − cost(s)`: the point where the derivative of
    /// the cost reaches `r = w μ` (left end of any plateau).
    fn position(&self, r: f64, cap: f64) -> f64 {
        let mut s = self.lo();
        for seg in &self.segs {
            match *seg {
                Segment::Quad { start, end } => {
                    if r < 2.0 * start {
                        s = start;
                        break;
                    }
                    if r <= 2.0 * end {
                        s = 0.5 * r;
                        break;
                    }
                }
                Segment::Lin { start, slope, .. } => {
                    if r <= slope {
                        s = start;
                        break;
                    }
                }
            }
            s = seg.end();
        }
        s.min(cap)
    }
}

/// Maximizes `Σ w_i s_i` subject to `Σ cost_i(s_i) ≤ p` for convex costs by
/// bisection on the dual multiplier, then spends leftover budget greedily.
/// `None` when even the smallest points overspend.
fn solve_convex(coords: &[Coord], p: f64) -> Option<Vec<f64>> {
    let floor: f64 = coords.iter().map(|c| c.cost(c.lo())).sum();
    if floor > p * (1.0 + 1e-15) {
        return None;
    }
    let caps: Vec<f64> = coords.iter().map(|c| c.cap(p)).collect();
    let place = |mu: f64| -> Vec<f64> {
        coords
            .iter()
            .zip(&caps)
            .map(|(c, &cap)| c.position(c.w * mu, cap))
            .collect()
    };
    let spend = |s: &[f64]| -> f64 { coords.iter().zip(s).map(|(c, &v)| c.cost(v)).sum() };

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if spend(&place(hi)) <= p {
        loop {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Some(place(lo));
            }
            if spend(&place(hi)) > p {
                break;
            }
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(&place(mid)) <= p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = place(lo);
    let mut left = p - spend(&s);

    // leftover: raise the coordinate with the best marginal rate, a quadratic
    // one only until its rate meets the runner-up
    for _ in 0..8 * (coords.len() + coords.iter().map(|c| c.segs.len()).sum::<usize>()) {
        if left <= 1e-15 * p {
            break;
        }
        let mut rates: Vec<(f64, bool, usize)> = Vec::new();
        for (i, c) in coords.iter().enumerate() {
            if c.w == 0.0 || s[i] >= caps[i] {
                continue;
            }
            let seg = c.segment_at(s[i]);
            let seg = if s[i] >= seg.end() {
                match c.segs.iter().find(|g| g.start() >= s[i] && g.end() > s[i]) {
                    Some(g) => g,
                    None => continue,
                }
            } else {
                seg
            };
            let d = seg.derivative(s[i]);
            let rate = if d <= 0.0 { f64::INFINITY } else { c.w / d };
            rates.push((rate, matches!(seg, Segment::Lin { .. }), i));
        }
        if rates.is_empty() {
            break;
        }
        // best rate first; among near-ties prefer linear pieces
        rates.sort_by(|a, b| {
            let tie = (a.0 - b.0).abs() <= 1e-12 * a.0.max(b.0);
            if tie && a.0.is_finite() {
                b.1.cmp(&a.1).then(a.2.cmp(&b.2))
            } else {
                b.0.total_cmp(&a.0).then(a.2.cmp(&b.2))
            }
        });
        let (_, is_lin, i) = rates[0];
        let c = &coords[i];
        let seg = *c
            .segs
            .iter()
            .find(|g| g.start() <= s[i] && s[i] < g.end())
            .unwrap();
        let before = c.cost(s[i]);
        let mut target = seg.inverse(before + left).min(caps[i]);
        if !is_lin {
            if let Some(&(next, _, _)) = rates.get(1) {
                if next.is_finite() && next > 0.0 {
                    target = target.min((c.w / (2.0 * next)).max(s[i]));
                }
            }
            if target <= s[i] {
                // already balanced against the runner-up: split the rest
                target = seg.inverse(before + left).min(caps[i]);
            }
        }
        let after = c.cost(target);
        left -= after - before;
        s[i] = target;
    }
    Some(s)
}

fn solve_akp(c: &[f64], funcs: &[TailFunctionN], p: f64) -> (Vec<f64>, f64) {
    let n = c.len();
    if c.iter().all(|&v| v == 0.0) {
        return (vec![0.0; n], 0.0);
    }
    let inner = Segment::Quad {
        start: 0.0,
        end: 1.0,
    };
    let outer_from_zero = |f: &TailFunctionN| -> Vec<Segment> {
        let mut segs = vec![inner];
        segs.extend(f.outer_segments());
        segs
    };
    // coordinates whose Ñ is not convex get a choice of region
    let exp_idx: Vec<usize> = (0..n)
        .filter(|&i| matches!(funcs[i], TailFunctionN::Exponential))
        .collect();
    let tab_idx: Vec<usize> = (0..n)
        .filter(|&i| {
            matches!(funcs[i], TailFunctionN::Tabulated { .. }) && !funcs[i].tilde_is_convex()
        })
        .collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    // a linear outer cost lets mass move between exponential coordinates at
    // no cost, so some maximizer has at most one of them beyond 1
    for exp_choice in core::iter::once(None).chain(exp_idx.iter().copied().map(Some)) {
        for mask in 0u32..(1u32 << tab_idx.len()) {
            let coords: Vec<Coord> = (0..n)
                .map(|i| {
                    let outer = exp_choice == Some(i)
                        || tab_idx
                            .iter()
                            .position(|&t| t == i)
                            .is_some_and(|bit| mask >> bit & 1 == 1);
                    let nonconvex = exp_idx.contains(&i) || tab_idx.contains(&i);
                    let segs = if nonconvex {
                        if outer {
                            funcs[i].outer_segments()
                        } else {
                            vec![inner]
                        }
                    } else {
                        outer_from_zero(&funcs[i])
                    };
                    Coord {
                        w: c[i].abs(),
                        segs,
                    }
                })
                .collect();
            if let Some(s) = solve_convex(&coords, p) {
                let value: f64 = coords.iter().zip(&s).map(|(k, v)| k.w * v).sum();
                if best.as_ref().is_none_or(|(_, b)| value > *b) {
                    best = Some((s, value));
                }
            }
        }
    }
    let (s, value) = best.unwrap_or_else(|| (vec![0.0; n], 0.0));
    let alpha = s
        .iter()
        .zip(c)
        .map(|(&v, &ci)| if ci < 0.0 { -v } else { v })
        .collect();
    (alpha, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rad(n: usize, p: f64) -> BallConstraint {
        BallConstraint::rademacher(n, p).unwrap()
    }

    /// Brute grid over `[-1, 1]²` at spacing `h`.
    fn grid2(c: [f64; 2], k: &BallConstraint, h: f64, lim: f64) -> f64 {
        let m = (lim / h).round() as i64;
        let mut best = f64::NEG_INFINITY;
        for a in -m..=m {
            for b in -m..=m {
                let x = [a as f64 * h, b as f64 * h];
                if k.contains(&x) {
                    best = best.max(c[0] * x[0] + c[1] * x[1]);
                }
            }
        }
        best
    }

    #[test]
    fn euclidean_examples() {
        let r = solve_ball_argmax(&[3.0, 4.0], &BallConstraint::EuclideanUnit).unwrap();
        assert_eq!(r.value, 5.0);
        assert_eq!(r.argmax, vec![0.6, 0.8]);
        let r = solve_ball_argmax(&[0.0, 0.0], &BallConstraint::EuclideanUnit).unwrap();
        assert_eq!((r.value, r.argmax), (0.0, vec![0.0, 0.0]));
    }

    #[test]
    fn rademacher_examples() {
        let r = solve_ball_argmax(&[3.0, 1.0], &rad(2, 2.0)).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        assert!((r.argmax[0] - 1.0).abs() < 1e-12 && (r.argmax[1] - 1.0).abs() < 1e-12);
        assert!((grid2([3.0, 1.0], &rad(2, 2.0), 1e-3, 1.0) - 4.0).abs() < 1e-9);
        let r = solve_ball_argmax(&[3.0, 1.0], &rad(2, 1.0)).unwrap();
        assert!((r.value - 10f64.sqrt()).abs() < 1e-12);
        let g = grid2([3.0, 1.0], &rad(2, 1.0), 1e-3, 1.0);
        assert!(g <= r.value && g >= r.value - 5e-3);
        // active constraint at the optimum
        let used: f64 = r.argmax.iter().map(|a| a * a).sum();
        assert!((used - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_regime_gives_l1() {
        let c = [0.5, -2.0, 1.5, -0.1];
        let r = solve_ball_argmax(&c, &rad(4, 4.0)).unwrap();
        assert!((r.value - 4.1).abs() < 1e-12);
        assert_eq!(r.argmax, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn rademacher_closed_form() {
        // α_i = sign(c_i) min(1, |c_i|/λ) with Σ min(1, |c_i|/λ)² = p
        let mut rng = RandomStream::new(8);
        for _ in 0..200 {
            let n = 2 + rng.below(6) as usize;
            let c: Vec<f64> = (0..n).map(|_| 4.0 * rng.uniform() - 2.0).collect();
            let p = 0.5 + rng.uniform() * n as f64;
            let r = solve_ball_argmax(&c, &rad(n, p)).unwrap();
            let load = |l: f64| {
                c.iter()
                    .map(|v| (v.abs() / l).min(1.0).powi(2))
                    .sum::<f64>()
            };
            let want = if load(1e-300) <= p {
                c.iter().map(|v| v.abs()).sum::<f64>()
            } else {
                let (mut lo, mut hi) = (1e-12, 1e6);
                for _ in 0..300 {
                    let mid = (lo * hi).sqrt();
                    if load(mid) > p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                c.iter().map(|v| v.abs() * (v.abs() / hi).min(1.0)).sum()
            };
            assert!(
                (r.value - want).abs() <= 1e-10 * want,
                "{} vs {want}",
                r.value
            );
            assert!(rad(n, p).contains_within(&r.argmax, 1e-12));
        }
    }

    #[test]
    fn exponential_against_grid() {
        let k = BallConstraint::akp(vec![TailFunctionN::Exponential; 2], 3.0).unwrap();
        for c in [[1.0, 0.2], [1.0, 1.0], [0.3, -2.0], [2.0, 1.9]] {
            let r = solve_ball_argmax(&c, &k).unwrap();
            let g = grid2(c, &k, 2e-3, 3.5);
            assert!(k.contains_within(&r.argmax, 1e-12));
            assert!(
                r.value >= g - 1e-12 && r.value <= g + 1e-2,
                "{c:?}: {} vs {g}",
                r.value
            );
        }
    }

    #[test]
    fn gaussian_like_is_a_scaled_ball() {
        let k = BallConstraint::akp(vec![TailFunctionN::GaussianLike; 3], 4.0).unwrap();
        let r = solve_ball_argmax(&[1.0, 2.0, 2.0], &k).unwrap();
        assert!((r.value - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_nonconvex_against_grid() {
        let f =
            TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.5), (4.0, 8.0)]).unwrap();
        let k = BallConstraint::akp(vec![f.clone(), f], 2.5).unwrap();
        for c in [[1.0, 0.5], [1.0, 1.0], [3.0, 0.1]] {
            let r = solve_ball_argmax(&c, &k).unwrap();
            let g = grid2(c, &k, 2e-3, 2.5);
            assert!(
                r.value >= g - 1e-12 && r.value <= g + 1e-2,
                "{c:?}: {} vs {g}",
                r.value
            );
        }
    }

    #[test]
    fn membership_of_rademacher_sets() {
        let mut rng = RandomStream::new(12);
        for _ in 0..2000 {
            let n = 3;
            let p = 1.5;
            let a: Vec<f64> = (0..n).map(|_| 2.6 * rng.uniform() - 1.3).collect();
            let direct =
                a.iter().map(|x| x * x).sum::<f64>() <= p && a.iter().all(|x| x.abs() <= 1.0);
            assert_eq!(rad(n, p).contains(&a), direct);
        }
    }

    #[test]
    fn gauge_matches_closed_form() {
        let k = rad(3, 2.0);
        let a = [0.5, -1.5, 0.2];
        let want = 1.5f64.max((0.25 + 2.25 + 0.04f64).sqrt() / 2f64.sqrt());
        assert!((k.gauge(&a) - want).abs() < 1e-14);
        assert_eq!(BallConstraint::EuclideanUnit.gauge(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(solve_ball_argmax(&[1.0], &rad(2, 1.0)).is_err());
    }
}

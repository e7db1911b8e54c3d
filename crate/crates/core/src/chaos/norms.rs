use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::ascent::{ascend, climb_from, MultilinearForm};
use super::ball::BallConstraint;
use super::spec::{contract, full_contract, ChaosSpec};
use super::tail_fn::TailFunctionN;
use crate::distributions::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;
use crate::stats::{std_dev, Estimate};

/// Largest number of sign patterns enumerated for an exact outer average.
pub const MAX_PATTERNS: u64 = 1 << 20;

/// A subset `I` of the modes `{0, …, d−1}` as a bitmask (mode `k` is bit `k`).
pub type Subset = u32;

pub fn all_subsets(order: usize) -> impl Iterator<Item = Subset> {
    0..(1u32 << order)
}

pub fn subset_size(subset: Subset) -> usize {
    subset.count_ones() as usize
}

fn full(order: usize) -> Subset {
    (1u32 << order) - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub subset: Subset,
    pub level: Option<f64>,
    pub value: f64,
    pub std_error: f64,
    pub n_outer: u64,
    pub exact: bool,
    pub restarts_disagree: bool,
    pub ascent_monotone: bool,
}

impl NormEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            std_error: self.std_error,
        }
    }
}

/// How the expectation over the generators outside `I` is taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Outer {
    /// Average over draws `0..n` of the shared sample set.
    MonteCarlo(usize),
    /// Full enumeration of sign patterns (Rademacher generators only).
    Exact,
}

/// Per-level constraints for the optimized modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Balls<'a> {
    Euclidean,
    /// Tail functions per generator row (one row for undecoupled specs, else
    /// one per mode) and ascending levels `p`.
    Akp {
        funcs: &'a [Vec<TailFunctionN>],
        levels: &'a [f64],
    },
}

impl Balls<'_> {
    fn levels(&self) -> usize {
        match self {
            Balls::Euclidean => 1,
            Balls::Akp { levels, .. } => levels.len(),
        }
    }

    fn constraint(&self, mode: usize, level: usize) -> BallConstraint {
        match self {
            Balls::Euclidean => BallConstraint::EuclideanUnit,
            Balls::Akp { funcs, levels } => {
                let row = if funcs.len() == 1 { 0 } else { mode };
                BallConstraint::Akp {
                    funcs: funcs[row].clone(),
                    p: levels[level],
                }
            }
        }
    }

    fn validate(&self, spec: &ChaosSpec) -> Result<()> {
        if let Balls::Akp { funcs, levels } = self {
            if funcs.len() != 1 && funcs.len() != spec.order() {
                return Err(Error::DimensionMismatch {
                    expected: spec.order(),
                    got: funcs.len(),
                });
            }
            for row in funcs.iter() {
                if row.len() != spec.side() {
                    return Err(Error::DimensionMismatch {
                        expected: spec.side(),
                        got: row.len(),
                    });
                }
            }
            if levels.is_empty() || levels.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
                return Err(invalid("levels p must be finite and >= 1"));
            }
            if levels.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("levels p must be strictly ascending"));
            }
            for k in 0..spec.order() {
                self.constraint(k, 0).validate()?;
            }
        }
        Ok(())
    }
}

/// Tail functions matching the generators: Rademacher, Gaussian (as
/// `N(t) = t²`) and symmetric exponential (`exp_power` with `r = 1`).
pub fn tail_functions_for(spec: &ChaosSpec) -> Result<Vec<Vec<TailFunctionN>>> {
    spec.generators()
        .iter()
        .map(|row| {
            row.iter()
                .map(|g| match *g {
                    DistributionSpec::Rademacher => Ok(TailFunctionN::Rademacher),
                    DistributionSpec::Gaussian { .. } => Ok(TailFunctionN::GaussianLike),
                    DistributionSpec::ExpPower { r: 2.0, .. } => Ok(TailFunctionN::GaussianLike),
                    DistributionSpec::ExpPower { r: 1.0, .. } => Ok(TailFunctionN::Exponential),
                    _ => Err(invalid(
                        "no built-in tail function for this generator; supply N explicitly",
                    )),
                })
                .collect()
        })
        .collect()
}

/// Per-draw values of `sup_T sup_α` for one subset over a level grid.
#[derive(Debug, Clone)]
pub(crate) struct SubsetSamples {
    /// Probability weight of each draw (all equal for Monte Carlo).
    pub weights: Vec<f64>,
    /// `values[j][level]`.
    pub values: Vec<Vec<f64>>,
    pub exact: bool,
    /// Aligned with the shared draw indices (false for enumeration and for
    /// `I` = all modes, which has a single draw).
    pub per_draw: bool,
    pub restarts_disagree: bool,
    pub ascent_monotone: bool,
}

impl SubsetSamples {
    fn mean(&self, level: usize) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v[level])
            .sum()
    }

    fn std_error(&self, level: usize) -> f64 {
        if self.exact || self.values.len() < 2 {
            return 0.0;
        }
        let column: Vec<f64> = self.values.iter().map(|v| v[level]).collect();
        std_dev(&column) / (column.len() as f64).sqrt()
    }
}

fn pattern_rows(spec: &ChaosSpec, subset: Subset) -> Vec<usize> {
    let order = spec.order();
    if spec.decoupled() {
        (0..order).filter(|k| subset >> k & 1 == 0).collect()
    } else if subset == full(order) {
        Vec::new()
    } else {
        vec![0]
    }
}

/// Values for one draw `x` at every level.
fn draw_values(
    spec: &ChaosSpec,
    subset: Subset,
    x: &[f64],
    balls: &Balls,
    restarts: usize,
    stream: &RandomStream,
    flags: &mut (bool, bool),
) -> Vec<f64> {
    let order = spec.order();
    let side = spec.side();
    let n_levels = balls.levels();
    let mut best = vec![0.0f64; n_levels];
    if spec.family().is_empty() {
        return best;
    }
    if subset == 0 {
        let rows: Vec<&[f64]> = (0..order).map(|k| spec.row(x, k)).collect();
        let z = spec
            .family()
            .iter()
            .map(|t| full_contract(t.entries(), side, &rows).abs())
            .fold(0.0, f64::max);
        return vec![z; n_levels];
    }
    let modes: Vec<usize> = (0..order).filter(|k| subset >> k & 1 == 1).collect();
    for (ti, t) in spec.family().iter().enumerate() {
        let vectors: Vec<Option<&[f64]>> = (0..order)
            .map(|k| (subset >> k & 1 == 0).then(|| spec.row(x, k)))
            .collect();
        let form = MultilinearForm::new(modes.len(), side, contract(t.entries(), side, &vectors))
            .expect("contracted shape");
        let rng = stream.split(ti as u64);
        let cons: Vec<Vec<BallConstraint>> = (0..n_levels)
            .map(|l| modes.iter().map(|&k| balls.constraint(k, l)).collect())
            .collect();
        // forward: each level starts from the previous level's maximizer
        let mut vals = Vec::with_capacity(n_levels);
        let mut args: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_levels);
        for level in &cons {
            let warm: Vec<Vec<Vec<f64>>> = args.last().cloned().into_iter().collect();
            let r = ascend(&form, level, restarts, &rng, &warm);
            flags.0 |= r.restarts_disagree;
            flags.1 &= r.monotone;
            vals.push(r.value);
            args.push(r.argmax);
        }
        // backward: shrink the next level's maximizer radially into this
        // level's set and climb from there
        for l in (0..n_levels.saturating_sub(1)).rev() {
            let cand: Vec<Vec<f64>> = args[l + 1]
                .iter()
                .zip(&cons[l])
                .map(|(a, c)| {
                    let g = c.gauge(a);
                    if g > 1.0 {
                        a.iter().map(|v| v / g).collect()
                    } else {
                        a.clone()
                    }
                })
                .collect();
            let (v, a, mono) = climb_from(&form, &cons[l], cand);
            flags.1 &= mono;
            if v > vals[l] {
                vals[l] = v;
                args[l] = a;
            }
        }
        for (b, v) in best.iter_mut().zip(&vals) {
            *b = b.max(*v);
        }
    }
    best
}

pub(crate) fn subset_samples(
    spec: &ChaosSpec,
    subset: Subset,
    balls: &Balls,
    outer: &Outer,
    restarts: usize,
    stream: &RandomStream,
) -> Result<SubsetSamples> {
    if subset >> spec.order() != 0 {
        return Err(invalid("subset refers to a mode beyond the chaos order"));
    }
    balls.validate(spec)?;
    let width = spec.rows() * spec.side();
    let mut flags = (false, true);
    let inner = stream.split(1);
    if subset == full(spec.order()) {
        let x = vec![0.0; width];
        let v = draw_values(spec, subset, &x, balls, restarts, &inner, &mut flags);
        return Ok(SubsetSamples {
            weights: vec![1.0],
            values: vec![v],
            exact: true,
            per_draw: false,
            restarts_disagree: flags.0,
            ascent_monotone: flags.1,
        });
    }
    let (weights, values, exact, per_draw) = match *outer {
        Outer::MonteCarlo(n) => {
            if n == 0 {
                return Err(invalid("Monte Carlo outer average needs draws"));
            }
            let mut x = vec![0.0; width];
            let values: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    spec.draw_indexed(stream, j as u64, &mut x);
                    draw_values(
                        spec,
                        subset,
                        &x,
                        balls,
                        restarts,
                        &inner.split(j as u64),
                        &mut flags,
                    )
                })
                .collect();
            (vec![1.0 / n as f64; n], values, false, true)
        }
        Outer::Exact => {
            if !spec.all_rademacher() {
                return Err(invalid(
                    "exact outer enumeration needs Rademacher generators",
                ));
            }
            let rows = pattern_rows(spec, subset);
            let bits = (rows.len() * spec.side()) as u32;
            if bits as u64 > MAX_PATTERNS.trailing_zeros() as u64 {
                return Err(Error::SizeCap {
                    what: "sign patterns",
                    limit: MAX_PATTERNS,
                });
            }
            let count = 1u64 << bits;
            let mut x = vec![1.0; width];
            let values: Vec<Vec<f64>> = (0..count)
                .map(|pattern| {
                    for (r, &row) in rows.iter().enumerate() {
                        for i in 0..spec.side() {
                            let bit = r * spec.side() + i;
                            x[row * spec.side() + i] =
                                if pattern >> bit & 1 == 1 { -1.0 } else { 1.0 };
                        }
                    }
                    draw_values(
                        spec,
                        subset,
                        &x,
                        balls,
                        restarts,
                        &inner.split(pattern),
                        &mut flags,
                    )
                })
                .collect();
            (
                vec![1.0 / count as f64; count as usize],
                values,
                true,
                false,
            )
        }
    };
    Ok(SubsetSamples {
        weights,
        values,
        exact,
        per_draw,
        restarts_disagree: flags.0,
        ascent_monotone: flags.1,
    })
}

fn estimates(samples: &SubsetSamples, subset: Subset, levels: &[Option<f64>]) -> Vec<NormEstimate> {
    levels
        .iter()
        .enumerate()
        .map(|(l, &level)| NormEstimate {
            subset,
            level,
            value: samples.mean(l),
            std_error: samples.std_error(l),
            n_outer: samples.values.len() as u64,
            exact: samples.exact,
            restarts_disagree: samples.restarts_disagree,
            ascent_monotone: samples.ascent_monotone,
        })
        .collect()
}

/// `‖T‖_I`: expected sup over `T` with the modes in `I` optimized over
/// Euclidean unit balls.
pub fn norm_t_i(
    spec: &ChaosSpec,
    subset: Subset,
    outer: &Outer,
    restarts: usize,
    stream: &RandomStream,
) -> Result<NormEstimate> {
    let s = subset_samples(spec, subset, &Balls::Euclidean, outer, restarts, stream)?;
    Ok(estimates(&s, subset, &[None]).remove(0))
}

/// `‖T‖_{N,I,p}` for every `p` in the ascending `levels`, sharing outer
/// draws and warm-starting across levels.
pub fn norm_t_n_i_p(
    spec: &ChaosSpec,
    subset: Subset,
    funcs: &[Vec<TailFunctionN>],
    levels: &[f64],
    outer: &Outer,
    restarts: usize,
    stream: &RandomStream,
) -> Result<Vec<NormEstimate>> {
    let balls = Balls::Akp { funcs, levels };
    let s = subset_samples(spec, subset, &balls, outer, restarts, stream)?;
    let tags: Vec<Option<f64>> = levels.iter().map(|&p| Some(p)).collect();
    let out = estimates(&s, subset, &tags);
    debug_assert!(out
        .windows(2)
        .all(|w| w[1].value >= w[0].value * (1.0 - 1e-12)));
    Ok(out)
}

/// `φ(t) = Σ_{I ⊆ {1..d}} ‖T‖_{N,I,t}` on an ascending grid, with every
/// subset evaluated on the same outer draws.
pub fn phi_of_t(
    spec: &ChaosSpec,
    funcs: &[Vec<TailFunctionN>],
    levels: &[f64],
    outer: &Outer,
    restarts: usize,
    stream: &RandomStream,
) -> Result<Vec<Estimate>> {
    let balls = Balls::Akp { funcs, levels };
    let all: Vec<SubsetSamples> = all_subsets(spec.order())
        .map(|s| subset_samples(spec, s, &balls, outer, restarts, stream))
        .collect::<Result<_>>()?;
    Ok(sum_over_subsets(&all, levels.len()))
}

/// Sums subset values draw by draw where draws are shared, so the standard
/// error accounts for their correlation.
pub(crate) fn sum_over_subsets(all: &[SubsetSamples], n_levels: usize) -> Vec<Estimate> {
    (0..n_levels)
        .map(|l| {
            let constant: f64 = all.iter().filter(|s| !s.per_draw).map(|s| s.mean(l)).sum();
            let shared: Vec<&SubsetSamples> = all.iter().filter(|s| s.per_draw).collect();
            match shared.first() {
                None => Estimate::exact(constant),
                Some(first) => {
                    let n = first.values.len();
                    let totals: Vec<f64> = (0..n)
                        .map(|j| shared.iter().map(|s| s.values[j][l]).sum::<f64>())
                        .collect();
                    let mean = totals.iter().sum::<f64>() / n as f64;
                    Estimate {
                        value: constant + mean,
                        std_error: std_dev(&totals) / (n as f64).sqrt(),
                    }
                }
            }
        })
        .collect()
}

/// Norm values indexed by subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetNorms {
    order: usize,
    values: Vec<Option<f64>>,
}

impl SubsetNorms {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            values: vec![None; 1 << order],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn set(&mut self, subset: Subset, value: f64) {
        self.values[subset as usize] = Some(value);
    }

    pub fn get(&self, subset: Subset) -> Result<f64> {
        self.values
            .get(subset as usize)
            .copied()
            .flatten()
            .ok_or(Error::MissingSubset(subset))
    }
}

/// `Σ_{I ≠ ∅} p^{|I|/2} ‖T‖_I`.
pub fn moment_bound_euclidean(norms: &SubsetNorms, p: f64) -> Result<f64> {
    all_subsets(norms.order)
        .skip(1)
        .map(|s| Ok(p.powf(subset_size(s) as f64 / 2.0) * norms.get(s)?))
        .sum()
}

/// `Σ_{I} ‖T‖_{N,I,p}` including `I = ∅`, returned as the (lower, upper)
/// shape pair, which coincide.
pub fn moment_bound_logconcave(norms_at_p: &SubsetNorms) -> Result<(f64, f64)> {
    let s: f64 = all_subsets(norms_at_p.order)
        .map(|s| norms_at_p.get(s))
        .sum::<Result<f64>>()?;
    Ok((s, s))
}

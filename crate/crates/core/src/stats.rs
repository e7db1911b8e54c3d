//! Sample summaries, bootstrap standard errors, exact finite laws, and the
//! tail/moment constant converters.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math::ln_gamma;
use crate::rng::RandomStream;

/// Default number of bootstrap resamples.
pub const BOOTSTRAP_RESAMPLES: usize = 500;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }

    /// Whether `other` lies within `k` standard errors of `self`.
    pub fn agrees_with(&self, other: f64, k: f64) -> bool {
        (self.value - other).abs() <= k * self.std_error
    }
}

/// Distinct sample values (ascending) with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    values: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
}

impl Tally {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut values = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for v in sorted {
            match values.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    values.push(v);
                    counts.push(1);
                }
            }
        }
        Self {
            values,
            counts,
            total: samples.len() as u64,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        let n = self.total as f64;
        self.values
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(move |(&v, &c)| (v, c as f64 / n))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, w)| v * w).sum()
    }

    /// Fraction of samples `>= x`.
    pub fn fraction_at_least(&self, x: f64) -> f64 {
        let start = self.values.partition_point(|&v| v < x);
        self.counts[start..].iter().sum::<u64>() as f64 / self.total as f64
    }

    /// Fraction of samples `> x`.
    pub fn fraction_above(&self, x: f64) -> f64 {
        let start = self.values.partition_point(|&v| v <= x);
        self.counts[start..].iter().sum::<u64>() as f64 / self.total as f64
    }

    /// `(mean |v - c|^p)^{1/p}` with `c` the mean when `centered`, else 0.
    pub fn moment(&self, p: f64, centered: bool) -> f64 {
        let c = if centered { self.mean() } else { 0.0 };
        power_mean(self.iter().map(|(v, w)| ((v - c).abs(), w)), p)
    }

    /// [`Tally::moment`] for every `p` in `p_grid`, written to `out`.
    pub fn moments_into(&self, p_grid: &[f64], centered: bool, out: &mut [f64]) {
        let c = if centered { self.mean() } else { 0.0 };
        let n = self.total as f64;
        let mut scale = 0.0f64;
        let mut items: Vec<(f64, f64)> = Vec::with_capacity(self.values.len());
        for (&v, &k) in self.values.iter().zip(&self.counts) {
            if k > 0 {
                let x = (v - c).abs();
                scale = scale.max(x);
                items.push((x, k as f64 / n));
            }
        }
        for (o, &p) in out.iter_mut().zip(p_grid) {
            *o = if scale == 0.0 {
                0.0
            } else {
                let inv = 1.0 / scale;
                power_mean_scaled(&items, inv, p) * scale
            };
        }
    }
}

fn power_mean_scaled(items: &[(f64, f64)], inv: f64, p: f64) -> f64 {
    let s: f64 = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        items.iter().map(|&(x, w)| w * (x * inv).powi(k)).sum()
    } else {
        items.iter().map(|&(x, w)| w * (x * inv).powf(p)).sum()
    };
    s.powf(1.0 / p)
}

/// `(Σ w |x|^p)^{1/p}` computed after scaling by the largest `|x|`.
fn power_mean<I: Iterator<Item = (f64, f64)> + Clone>(items: I, p: f64) -> f64 {
    let scale = items.clone().fold(0.0f64, |m, (x, _)| m.max(x));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = if p.fract() == 0.0 && p <= 64.0 {
        let k = p as i32;
        items.map(|(x, w)| w * (x / scale).powi(k)).sum()
    } else {
        items.map(|(x, w)| w * (x / scale).powf(p)).sum()
    };
    scale * s.powf(1.0 / p)
}

/// Multinomial redraw of `counts.iter().sum()` items with cell probabilities
/// proportional to `counts`.
fn multinomial_resample(counts: &[u64], stream: &mut RandomStream) -> Vec<u64> {
    let mut remaining_n: u64 = counts.iter().sum();
    let mut remaining_mass = remaining_n;
    let mut out = vec![0u64; counts.len()];
    for (i, &c) in counts.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if c == remaining_mass {
            out[i] = remaining_n;
            break;
        }
        let p = c as f64 / remaining_mass as f64;
        let k = if c == 0 {
            0
        } else {
            Binomial::new(remaining_n, p)
                .expect("valid binomial")
                .sample(stream)
        };
        out[i] = k;
        remaining_n -= k;
        remaining_mass -= c;
    }
    out
}

/// Redraw of `total` items uniformly from a table mapping each draw to its
/// cell.
fn slot_resample(slots: &[u32], cells: usize, stream: &mut RandomStream) -> Vec<u64> {
    let mut out = vec![0u64; cells];
    for _ in 0..slots.len() {
        out[slots[stream.below(slots.len() as u64) as usize] as usize] += 1;
    }
    out
}

pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Bootstrap over a tally: the statistic is evaluated on the original tally
/// and on `n_resamples` with-replacement resamples of the same size.
///
/// Resamples are drawn as multinomial counts when there are few distinct
/// values (same law as index resampling, much cheaper for discrete data).
pub fn bootstrap_tally<F: Fn(&Tally) -> f64>(
    tally: &Tally,
    statistic: F,
    n_resamples: usize,
    stream: &RandomStream,
) -> Estimate {
    bootstrap_tally_many(
        tally,
        1,
        |t, out| out[0] = statistic(t),
        n_resamples,
        stream,
    )[0]
}

/// Like [`bootstrap_tally`] for `n_stats` statistics evaluated on shared
/// resamples.
pub fn bootstrap_tally_many<F: Fn(&Tally, &mut [f64])>(
    tally: &Tally,
    n_stats: usize,
    statistic: F,
    n_resamples: usize,
    stream: &RandomStream,
) -> Vec<Estimate> {
    let mut value = vec![0.0; n_stats];
    statistic(tally, &mut value);
    if tally.values.len() <= 1 || n_resamples < 2 {
        return value.into_iter().map(Estimate::exact).collect();
    }
    let mut rng = stream.clone();
    let few_distinct = (tally.values.len() as u64) * 8 <= tally.total;
    let singletons = tally.total == tally.values.len() as u64;
    let slots: Vec<u32> = if few_distinct || singletons {
        Vec::new()
    } else {
        tally
            .counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| core::iter::repeat_n(i as u32, c as usize))
            .collect()
    };
    let mut reps: Vec<Vec<f64>> = vec![Vec::with_capacity(n_resamples); n_stats];
    let mut out = vec![0.0; n_stats];
    let mut resampled = tally.clone();
    for _ in 0..n_resamples {
        resampled.counts = if few_distinct {
            multinomial_resample(&tally.counts, &mut rng)
        } else if singletons {
            let n = tally.values.len();
            let mut c = vec![0u64; n];
            for _ in 0..n {
                c[rng.below(n as u64) as usize] += 1;
            }
            c
        } else {
            slot_resample(&slots, tally.values.len(), &mut rng)
        };
        statistic(&resampled, &mut out);
        for (r, v) in reps.iter_mut().zip(&out) {
            r.push(*v);
        }
    }
    value
        .into_iter()
        .zip(&reps)
        .map(|(value, r)| Estimate {
            value,
            std_error: std_dev(r),
        })
        .collect()
}

/// Bootstrap estimate and standard error of `statistic` over `samples`.
pub fn bootstrap_ci<F: Fn(&Tally) -> f64>(
    samples: &[f64],
    statistic: F,
    n_resamples: usize,
    stream: &RandomStream,
) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(invalid("bootstrap needs at least one sample"));
    }
    Ok(bootstrap_tally(
        &Tally::from_samples(samples),
        statistic,
        n_resamples,
        stream,
    ))
}

/// Index-resampling bootstrap for statistics over several aligned columns.
/// `statistic` receives per-index multiplicities summing to `n` and writes
/// `n_stats` values. Returns the standard deviation of each statistic over
/// the replicates.
pub fn bootstrap_weights<F: FnMut(&[u32], &mut [f64])>(
    n: usize,
    n_resamples: usize,
    n_stats: usize,
    stream: &RandomStream,
    mut statistic: F,
) -> Vec<f64> {
    let mut rng = stream.clone();
    let mut weights = vec![0u32; n];
    let mut out = vec![0.0; n_stats];
    let mut reps: Vec<Vec<f64>> = vec![Vec::with_capacity(n_resamples); n_stats];
    for _ in 0..n_resamples {
        weights.iter_mut().for_each(|w| *w = 0);
        for _ in 0..n {
            weights[rng.below(n as u64) as usize] += 1;
        }
        statistic(&weights, &mut out);
        for (r, v) in reps.iter_mut().zip(&out) {
            r.push(*v);
        }
    }
    reps.iter().map(|r| std_dev(r)).collect()
}

/// `‖z − E z‖_p` (centered) or `‖z‖_p` of the empirical law of `samples`,
/// with bootstrap standard error.
pub fn empirical_moment(
    samples: &[f64],
    p: f64,
    centered: bool,
    n_resamples: usize,
    stream: &RandomStream,
) -> Result<Estimate> {
    if !(p >= 1.0) {
        return Err(invalid("moment order must be >= 1"));
    }
    if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow {
            what: "sample",
            index,
        });
    }
    let est = bootstrap_ci(samples, |t| t.moment(p, centered), n_resamples, stream)?;
    if !est.value.is_finite() {
        return Err(Error::Overflow {
            what: "p-th power mean",
            index: 0,
        });
    }
    Ok(est)
}

/// Moments for a whole p-grid from one tally, sharing bootstrap resamples.
pub fn empirical_moments(
    tally: &Tally,
    p_grid: &[f64],
    centered: bool,
    n_resamples: usize,
    stream: &RandomStream,
) -> Vec<Estimate> {
    let stat = |t: &Tally, out: &mut [f64]| t.moments_into(p_grid, centered, out);
    bootstrap_tally_many(tally, p_grid.len(), stat, n_resamples, stream)
}

/// A finite law: ascending duplicate-free support with probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl ExactDistribution {
    /// Builds from `(value, probability)` pairs, merging values that agree to
    /// 1e-12 relative precision.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let mut items: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        if items.iter().any(|&(v, p)| !v.is_finite() || !(p >= 0.0)) {
            return Err(invalid(
                "support values must be finite, probabilities nonnegative",
            ));
        }
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (v, p) in items {
            match support.last() {
                Some(&last) if (v - last).abs() <= 1e-12 * last.abs().max(1.0) => {
                    *probs.last_mut().unwrap() += p
                }
                _ => {
                    support.push(v);
                    probs.push(p);
                }
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("probabilities must sum to 1 within 1e-12"));
        }
        Ok(Self { support, probs })
    }

    pub fn point_mass(value: f64) -> Self {
        Self {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + Clone + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v * p).sum()
    }

    /// `P(Z > z)`.
    pub fn prob_above(&self, z: f64) -> f64 {
        let start = self.support.partition_point(|&v| v <= z);
        self.probs[start..].iter().sum()
    }

    /// `P(Z >= z)`.
    pub fn prob_at_least(&self, z: f64) -> f64 {
        let start = self.support.partition_point(|&v| v < z);
        self.probs[start..].iter().sum()
    }

    /// `E f(Z)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(v, p)| p * f(v)).sum()
    }
}

/// Exact `‖Z − EZ‖_p` (centered) or `‖Z‖_p`.
pub fn exact_moment(dist: &ExactDistribution, p: f64, centered: bool) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("moment order must be >= 1"));
    }
    let c = if centered { dist.mean() } else { 0.0 };
    Ok(power_mean(dist.iter().map(|(v, w)| ((v - c).abs(), w)), p))
}

/// Constants of a tail bound `P(|ξ − Eξ| ≥ t) ≤ c·exp(−t^α / k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub c: f64,
    pub k: f64,
    pub alpha: f64,
}

impl TailConstants {
    pub fn bound(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0f64.min(self.c);
        }
        if self.k == 0.0 {
            return 0.0;
        }
        (self.c * (-t.powf(self.alpha) / self.k).exp()).min(1.0)
    }
}

/// Tail constants from the moment growth `‖ξ − Eξ‖_p ≤ k2·p^{1/α}`.
///
/// Markov at order `p = (t / (e·k2))^α` gives `exp(−(t/(e·k2))^α)` for
/// `t ≥ e·k2`; below that the same expression times `e` exceeds one, so
/// `c = e` and `k = (e·k2)^α` cover all `t ≥ 0`.
pub fn moment_to_tail(k2: f64, alpha: f64) -> Result<TailConstants> {
    if !(alpha > 0.0) || !(k2 >= 0.0) {
        return Err(invalid("need alpha > 0 and a nonnegative moment constant"));
    }
    let e = core::f64::consts::E;
    Ok(TailConstants {
        c: e,
        k: (e * k2).powf(alpha),
        alpha,
    })
}

/// Moment constant from a tail bound, by integrating the tail:
/// `E|ξ−Eξ|^p ≤ c·Γ(p/α + 1)·k^{p/α}`, so
/// `k2 = k^{1/α} · sup_{p ≥ 1} (c·Γ(p/α+1))^{1/p} / p^{1/α}`.
///
/// The supremum is taken over a log-spaced grid on `[1, 10^4]`; the
/// function is eventually decreasing in `p`.
pub fn tail_to_moment(tail: &TailConstants) -> Result<f64> {
    let TailConstants { c, k, alpha } = *tail;
    if !(alpha > 0.0) || !(c > 0.0) || !(k >= 0.0) {
        return Err(invalid("need alpha > 0, c > 0, k >= 0"));
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    let steps = 4000;
    let sup = (0..=steps)
        .map(|j| {
            let p = 10f64.powf(4.0 * j as f64 / steps as f64);
            ((c.ln() + ln_gamma(p / alpha + 1.0)) / p - p.ln() / alpha).exp()
        })
        .fold(0.0f64, f64::max);
    Ok(k.powf(1.0 / alpha) * sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_groups_values() {
        let t = Tally::from_samples(&[2.0, -1.0, 2.0, 0.0, 2.0]);
        assert_eq!(t.values(), &[-1.0, 0.0, 2.0]);
        assert_eq!(t.counts(), &[1, 1, 3]);
        assert!((t.mean() - 1.0).abs() < 1e-15);
        assert_eq!(t.fraction_at_least(2.0), 0.6);
        assert_eq!(t.fraction_above(2.0), 0.0);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let s = RandomStream::new(0);
        let est = bootstrap_ci(&[3.5; 100], |t| t.mean(), 500, &s).unwrap();
        assert_eq!(
            est,
            Estimate {
                value: 3.5,
                std_error: 0.0
            }
        );
        let m = empirical_moment(&[3.5; 10], 2.0, true, 500, &s).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn fair_sign_mean_error_is_binomial() {
        let mut rng = RandomStream::new(11);
        let samples: Vec<f64> = (0..1_000_000).map(|_| rng.sign()).collect();
        let est = bootstrap_ci(&samples, |t| t.mean(), 500, &RandomStream::new(3)).unwrap();
        assert!(est.value.abs() < 4e-3);
        // binomial standard error 1/sqrt(N) = 1e-3
        assert!((est.std_error - 1e-3).abs() < 1.5e-4, "{}", est.std_error);
    }

    #[test]
    fn index_and_multinomial_resampling_agree_in_spread() {
        // continuous data takes the index path; discretised copy the multinomial path
        let mut rng = RandomStream::new(5);
        let cont: Vec<f64> = (0..20_000).map(|_| rng.uniform()).collect();
        let disc: Vec<f64> = cont.iter().map(|x| (x * 10.0).floor()).collect();
        let s = RandomStream::new(1);
        let a = bootstrap_ci(&cont, |t| t.mean(), 400, &s).unwrap();
        let b = bootstrap_ci(&disc, |t| t.mean() / 10.0, 400, &s).unwrap();
        let expected = (1.0f64 / 12.0 / 20_000.0).sqrt();
        assert!((a.std_error / expected - 1.0).abs() < 0.15);
        assert!((b.std_error / expected - 1.0).abs() < 0.15);
    }

    #[test]
    fn exact_moment_examples() {
        let pm = ExactDistribution::point_mass(4.0);
        assert_eq!(exact_moment(&pm, 3.0, true).unwrap(), 0.0);
        let d = ExactDistribution::from_pairs([(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]).unwrap();
        let m4 = exact_moment(&d, 4.0, false).unwrap();
        assert!((m4 - 8f64.powf(0.25)).abs() < 1e-14);
        let signs = ExactDistribution::from_pairs([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!((exact_moment(&signs, 7.0, false).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_distribution_merges_and_validates() {
        let d = ExactDistribution::from_pairs([(1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
        assert!(ExactDistribution::from_pairs([(0.0, 0.5)]).is_err());
        assert_eq!(d.prob_above(0.0), 0.5);
        assert_eq!(d.prob_at_least(0.0), 1.0);
    }

    #[test]
    fn two_point_bootstrap_moment_matches_exact() {
        let mut rng = RandomStream::new(8);
        let samples: Vec<f64> = (0..200_000)
            .map(|_| if rng.uniform() < 0.3 { 3.0 } else { -1.0 })
            .collect();
        let exact = ExactDistribution::from_pairs([(3.0, 0.3), (-1.0, 0.7)]).unwrap();
        let truth = exact_moment(&exact, 2.0, false).unwrap();
        let est = empirical_moment(&samples, 2.0, false, 500, &RandomStream::new(2)).unwrap();
        assert!(est.agrees_with(truth, 3.0), "{est:?} vs {truth}");
    }

    #[test]
    fn gaussian_tail_constants_give_gaussian_moment_growth() {
        // e^{-t^2/2} tail: the integrated constant is sup_p Γ(p/2+1)^{1/p} sqrt(2/p)
        let k2 = tail_to_moment(&TailConstants {
            c: 1.0,
            k: 2.0,
            alpha: 2.0,
        })
        .unwrap();
        // attained at p = 1: Γ(3/2)·sqrt 2 = sqrt(pi/2)
        assert!(
            (k2 - (core::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9,
            "{k2}"
        );
        // sanity witness: standard Gaussian L_p norms grow no faster than k2·sqrt p
        for p in [1.0f64, 2.0, 3.0, 4.0, 8.0, 16.0, 32.0] {
            let log_abs_moment =
                0.5 * p * 2f64.ln() + ln_gamma((p + 1.0) / 2.0) - 0.5 * core::f64::consts::PI.ln();
            let norm = (log_abs_moment / p).exp();
            assert!(norm <= k2 * p.sqrt() + 1e-12, "p={p}: {norm}");
        }
    }

    #[test]
    fn degenerate_moment_constant() {
        let t = moment_to_tail(0.0, 2.0).unwrap();
        assert_eq!(t.bound(0.0), 1.0);
        assert_eq!(t.bound(1e-9), 0.0);
        assert_eq!(tail_to_moment(&t).unwrap(), 0.0);
    }

    #[test]
    fn round_trip_inflation_is_a_fixed_constant() {
        // The inflation factor is scale free; frozen for alpha = 2 and alpha = 1.
        let factor =
            |alpha: f64, k2: f64| tail_to_moment(&moment_to_tail(k2, alpha).unwrap()).unwrap() / k2;
        for alpha in [1.0, 2.0] {
            let a = factor(alpha, 1.0);
            let b = factor(alpha, 3.7);
            assert!((a - b).abs() < 1e-9 * a);
            assert!(a > 1.0 && a < 10.0, "alpha {alpha}: {a}");
        }
        assert!((factor(2.0, 1.0) - ROUND_TRIP_ALPHA2).abs() < 1e-9);
        assert!((factor(1.0, 1.0) - ROUND_TRIP_ALPHA1).abs() < 1e-9);
    }

    const ROUND_TRIP_ALPHA2: f64 = 6.548_380_468_553_26;
    // e^2: the supremum sits at p = 1
    const ROUND_TRIP_ALPHA1: f64 = 7.389_056_098_930_65;
}

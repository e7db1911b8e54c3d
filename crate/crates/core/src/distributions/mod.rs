//! One-dimensional laws: analytic tails, reproducible samplers, and the
//! tail-inequality membership checks built on them.

mod membership;

pub use membership::{
    check_class_m, check_density_criterion, check_equivalence_ii, check_subgaussian, default_grid,
    derive_ii_constants, find_subgaussian_constants, geometric_grid, minimal_sigma_sq,
    ClassMParams, MembershipReport, SecondMomentForm, PASS_TOLERANCE,
};

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::math::{gamma_q, ln_gamma, normal_cdf, normal_pdf, normal_sf};
use crate::rng::RandomStream;

/// Tail functions of a law on the real line.
pub trait Tails {
    /// `μ([x, ∞))`
    fn upper_tail(&self, x: f64) -> f64;
    /// `μ((−∞, x])`
    fn lower_tail(&self, x: f64) -> f64;
    /// Points where the tails jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `P(|X| ≥ t)`.
    fn abs_tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            (self.upper_tail(t) + self.lower_tail(-t)).min(1.0)
        }
    }
}

/// The law of `−X`.
#[derive(Debug, Clone, Copy)]
pub struct Reflected<'a, T: ?Sized>(pub &'a T);

impl<T: Tails + ?Sized> Tails for Reflected<'_, T> {
    fn upper_tail(&self, x: f64) -> f64 {
        self.0.lower_tail(-x)
    }
    fn lower_tail(&self, x: f64) -> f64 {
        self.0.upper_tail(-x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().into_iter().map(|b| -b).collect()
    }
}

/// A one-dimensional law.
///
/// `ExpPower { r, scale }` has density proportional to `exp(−|x/scale|^r / r)`;
/// `r = 2, scale = 1` is the standard Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Gaussian { mean: f64, sd: f64 },
    Rademacher,
    Uniform { a: f64, b: f64 },
    TwoPoint { v1: f64, p1: f64, v2: f64 },
    Discrete { atoms: Vec<f64>, probs: Vec<f64> },
    ExpPower { r: f64, scale: f64 },
}

impl DistributionSpec {
    pub fn standard_gaussian() -> Self {
        Self::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { mean, sd } => {
                if !mean.is_finite() || !(*sd > 0.0) || !sd.is_finite() {
                    return Err(invalid("gaussian needs finite mean and sd > 0"));
                }
            }
            Self::Rademacher => {}
            Self::Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() || !(a < b) {
                    return Err(invalid("uniform needs finite a < b"));
                }
            }
            Self::TwoPoint { v1, p1, v2 } => {
                if !v1.is_finite() || !v2.is_finite() || !(*p1 >= 0.0 && *p1 <= 1.0) {
                    return Err(invalid("two_point needs finite values and p1 in [0, 1]"));
                }
            }
            Self::Discrete { atoms, probs } => {
                if atoms.is_empty() || atoms.len() != probs.len() {
                    return Err(invalid("discrete needs equally many atoms and probs"));
                }
                if atoms.iter().any(|a| !a.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
                    return Err(invalid("discrete atoms must be finite, probs nonnegative"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid("discrete probs must sum to 1 within 1e-12"));
                }
            }
            Self::ExpPower { r, scale } => {
                if !(*r > 0.0) || !(*scale > 0.0) || !r.is_finite() || !scale.is_finite() {
                    return Err(invalid("exp_power needs r > 0 and scale > 0"));
                }
            }
        }
        Ok(())
    }

    /// Atoms sorted ascending with their masses, for purely atomic kinds.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let mut pairs: Vec<(f64, f64)> = match self {
            Self::Rademacher => alloc::vec![(-1.0, 0.5), (1.0, 0.5)],
            Self::TwoPoint { v1, p1, v2 } => alloc::vec![(*v1, *p1), (*v2, 1.0 - *p1)],
            Self::Discrete { atoms, probs } => {
                atoms.iter().copied().zip(probs.iter().copied()).collect()
            }
            _ => return None,
        };
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Some(merged)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Self::Rademacher | Self::TwoPoint { .. } | Self::Discrete { .. }
        )
    }

    /// Lebesgue density, for absolutely continuous kinds.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Gaussian { mean, sd } => Some(normal_pdf((x - mean) / sd) / sd),
            Self::Uniform { a, b } => Some(if x >= a && x <= b { 1.0 / (b - a) } else { 0.0 }),
            Self::ExpPower { r, scale } => {
                let u = (x / scale).abs().powf(r) / r;
                Some((-u - exp_power_log_norm(r, scale)).exp())
            }
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Gaussian { mean, .. } => *mean,
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Rademacher | Self::ExpPower { .. } => 0.0,
            _ => self
                .atoms()
                .map(|a| a.iter().map(|(v, p)| v * p).sum())
                .unwrap_or(0.0),
        }
    }

    /// One draw.
    pub fn sample(&self, rng: &mut RandomStream) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Self::Rademacher => rng.sign(),
            Self::Uniform { a, b } => a + (b - a) * rng.uniform(),
            Self::TwoPoint { v1, p1, v2 } => {
                if rng.uniform() < *p1 {
                    *v1
                } else {
                    *v2
                }
            }
            Self::Discrete { atoms, probs } => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (a, p) in atoms.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *a;
                    }
                }
                // rounding left u beyond the accumulated mass
                atoms[probs
                    .iter()
                    .rposition(|&p| p > 0.0)
                    .unwrap_or(atoms.len() - 1)]
            }
            Self::ExpPower { r, scale } => {
                let g: f64 = Gamma::new(1.0 / r, 1.0)
                    .expect("validated shape")
                    .sample(rng);
                scale * (r * g).powf(1.0 / r) * rng.sign()
            }
        }
    }

    /// Fills `out` with independent draws.
    pub fn sample_into(&self, rng: &mut RandomStream, out: &mut [f64]) {
        for slot in out {
            *slot = self.sample(rng);
        }
    }
}

/// `log` of the normalizing constant `2·scale·r^{1/r−1}·Γ(1/r)`.
fn exp_power_log_norm(r: f64, scale: f64) -> f64 {
    core::f64::consts::LN_2 + scale.ln() + (1.0 / r - 1.0) * r.ln() + ln_gamma(1.0 / r)
}

/// `P(X ≥ x)` for `x ≥ 0` under the exponential-power law.
fn exp_power_right(r: f64, scale: f64, x: f64) -> f64 {
    0.5 * gamma_q(1.0 / r, (x / scale).powf(r) / r)
}

impl Tails for DistributionSpec {
    fn upper_tail(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => normal_sf((x - mean) / sd),
            Self::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Self::ExpPower { r, scale } => {
                if x >= 0.0 {
                    exp_power_right(r, scale, x)
                } else {
                    1.0 - exp_power_right(r, scale, -x)
                }
            }
            _ => self
                .atoms()
                .map(|atoms| atoms.iter().filter(|(v, _)| *v >= x).map(|(_, p)| p).sum())
                .unwrap_or(0.0),
        }
    }

    fn lower_tail(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => normal_cdf((x - mean) / sd),
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::ExpPower { .. } => self.upper_tail(-x),
            _ => self
                .atoms()
                .map(|atoms| atoms.iter().filter(|(v, _)| *v <= x).map(|(_, p)| p).sum())
                .unwrap_or(0.0),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.atoms() {
            Some(atoms) => atoms.into_iter().map(|(v, _)| v).collect(),
            None => match *self {
                Self::Uniform { a, b } => alloc::vec![a, b],
                _ => Vec::new(),
            },
        }
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// `dist`, evaluated on both sides of every distinct sample value so that
/// atomic laws are handled exactly.
pub fn ks_distance<T: Tails + ?Sized>(dist: &T, samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let below = i as f64 / n; // empirical P(X < v)
        let at_or_below = j as f64 / n; // empirical P(X ≤ v)
        let cdf = dist.lower_tail(v);
        let cdf_left = 1.0 - dist.upper_tail(v);
        worst = worst
            .max((at_or_below - cdf).abs())
            .max((below - cdf_left).abs());
        i = j;
    }
    worst
}

/// Asymptotic KS critical value at significance `alpha` for `n` samples.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

//! Φ-entropy (exact and Monte Carlo), tensorization, log-Sobolev ratios and
//! Herbst-type tail checks for convex functions of product vectors.

mod convex;
mod mc;
mod product;

pub use convex::{AffinePiece, ConvexFunctionSpec};
pub use mc::{
    draw_product, herbst_tail_check, lsi_ratio, phi_entropy_mc, LsiPoint, LsiReport,
    DEFAULT_LAMBDA_GRID,
};
pub use product::{
    check_tensorization, phi_entropy_exact, DiscreteProduct, Factor, TensorizationCheck, MAX_ATOMS,
};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiFunction {
    /// `Φ(x) = x²`; the entropy is the variance.
    Square,
    /// `Φ(x) = x log x` with `0 log 0 = 0`.
    XLogX,
}

impl PhiFunction {
    pub const ALL: [PhiFunction; 2] = [PhiFunction::Square, PhiFunction::XLogX];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Square => x * x,
            Self::XLogX => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
        }
    }

    pub fn second_derivative(self, x: f64) -> f64 {
        match self {
            Self::Square => 2.0,
            Self::XLogX => 1.0 / x,
        }
    }

    /// `Φ(v) − Φ(m) − Φ′(m)(v − m)`, clamped at zero.
    pub fn bregman(self, v: f64, m: f64) -> f64 {
        let d = match self {
            Self::Square => (v - m) * (v - m),
            Self::XLogX => {
                if v == 0.0 {
                    m
                } else if m == 0.0 {
                    0.0
                } else {
                    let u = v / m - 1.0;
                    let h = if u.abs() < 0.5 {
                        (1.0 + u) * u.ln_1p() - u
                    } else {
                        let r = 1.0 + u;
                        r * r.ln() - u
                    };
                    m * h
                }
            }
        };
        d.max(0.0)
    }

    /// `Σ w Φ(v) − Φ(Σ w v)` for weights summing to one, computed as a
    /// weighted Bregman divergence from the mean.
    pub fn entropy<I>(self, pairs: I) -> f64
    where
        I: Iterator<Item = (f64, f64)> + Clone,
    {
        let (total, first) = pairs
            .clone()
            .fold((0.0, 0.0), |(t, s), (v, w)| (t + w, s + w * v));
        if total <= 0.0 {
            return 0.0;
        }
        let mean = first / total;
        pairs.map(|(v, w)| w * self.bregman(v, mean)).sum::<f64>() / total
    }

    /// Numerical admissibility on `grid` (ascending, positive): `Φ` convex,
    /// `Φ″ > 0`, and `1/Φ″` concave, via second divided differences.
    pub fn check_admissible(self, grid: &[f64]) -> bool {
        let dd = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, c: f64| {
            ((f(c) - f(b)) / (c - b) - (f(b) - f(a)) / (b - a)) / (c - a)
        };
        let phi = |x: f64| self.eval(x);
        let inv = |x: f64| 1.0 / self.second_derivative(x);
        grid.iter().all(|&x| self.second_derivative(x) > 0.0)
            && grid.windows(3).all(|w| {
                let scale = 1e-9 * (1.0 + w[2].abs());
                dd(&phi, w[0], w[1], w[2]) >= -scale && dd(&inv, w[0], w[1], w[2]) <= scale
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: EntropyMethod,
}

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A log-concave tail exponent `N` (`P(|X| ≥ t) = e^{−N(t)}`), normalized so
/// that `inf{t : N(t) ≥ 1} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawTailFunction")]
pub enum TailFunctionN {
    /// `N = 0` on `[0, 1]`, `+∞` beyond.
    Rademacher,
    /// `N(t) = t`.
    Exponential,
    /// `N(t) = t²`.
    GaussianLike,
    /// Piecewise linear through `(t, N(t))` knots, extended linearly past
    /// the last knot.
    Tabulated { knots: Vec<(f64, f64)> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawTailFunction {
    Rademacher,
    Exponential,
    GaussianLike,
    Tabulated { knots: Vec<(f64, f64)> },
}

impl TryFrom<RawTailFunction> for TailFunctionN {
    type Error = Error;
    fn try_from(r: RawTailFunction) -> Result<Self> {
        match r {
            RawTailFunction::Rademacher => Ok(Self::Rademacher),
            RawTailFunction::Exponential => Ok(Self::Exponential),
            RawTailFunction::GaussianLike => Ok(Self::GaussianLike),
            RawTailFunction::Tabulated { knots } => Self::tabulated(knots),
        }
    }
}

/// One piece of the convex cost `Ñ` restricted to `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Segment {
    /// Cost `s²`.
    Quad { start: f64, end: f64 },
    /// Cost `base + slope·(s − start)`.
    Lin {
        start: f64,
        end: f64,
        base: f64,
        slope: f64,
    },
}

impl Segment {
    pub(crate) fn start(&self) -> f64 {
        match *self {
            Self::Quad { start, .. } | Self::Lin { start, .. } => start,
        }
    }

    pub(crate) fn end(&self) -> f64 {
        match *self {
            Self::Quad { end, .. } | Self::Lin { end, .. } => end,
        }
    }

    pub(crate) fn cost(&self, s: f64) -> f64 {
        match *self {
            Self::Quad { .. } => s * s,
            Self::Lin {
                start, base, slope, ..
            } => base + slope * (s - start),
        }
    }

    /// Right derivative at `s`.
    pub(crate) fn derivative(&self, s: f64) -> f64 {
        match *self {
            Self::Quad { .. } => 2.0 * s,
            Self::Lin { slope, .. } => slope,
        }
    }

    /// Largest `s` in the segment with `cost(s) ≤ c`.
    pub(crate) fn inverse(&self, c: f64) -> f64 {
        let s = match *self {
            Self::Quad { .. } => c.max(0.0).sqrt(),
            Self::Lin {
                start, base, slope, ..
            } => {
                if slope == 0.0 {
                    f64::INFINITY
                } else {
                    start + (c - base) / slope
                }
            }
        };
        s.clamp(self.start(), self.end())
    }
}

impl TailFunctionN {
    /// Validated tabulated function: knots ascending in `t`, starting at or
    /// below 1, convex, nondecreasing, with `inf{t : N(t) ≥ 1} = 1`.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(invalid("tabulated N needs at least two knots"));
        }
        if knots
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite() || *t < 0.0)
        {
            return Err(invalid("tabulated N knots must be finite with t >= 0"));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invalid("tabulated N knots must be strictly ascending in t"));
        }
        if knots[0].0 > 1.0 {
            return Err(invalid("tabulated N must be defined at t = 1"));
        }
        let slopes: Vec<f64> = knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        if slopes.iter().any(|&s| s < 0.0) || knots[0].1 < 0.0 {
            return Err(invalid("tabulated N must be nonnegative and nondecreasing"));
        }
        if slopes
            .windows(2)
            .any(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0))
        {
            return Err(invalid("tabulated N must be convex"));
        }
        let f = Self::Tabulated { knots };
        let level = f.level_one();
        if (level - 1.0).abs() > 1e-9 {
            return Err(invalid(format!(
                "tabulated N is not normalized: inf{{t : N(t) >= 1}} = {level}"
            )));
        }
        Ok(f)
    }

    /// `N(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            Self::Rademacher => {
                if t <= 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Exponential => t,
            Self::GaussianLike => t * t,
            Self::Tabulated { knots } => {
                let k = knots.partition_point(|(x, _)| *x <= t);
                let (a, b) = match k {
                    0 => (knots[0], knots[1]),
                    k if k >= knots.len() => (knots[knots.len() - 2], knots[knots.len() - 1]),
                    k => (knots[k - 1], knots[k]),
                };
                let v = a.1 + (b.1 - a.1) / (b.0 - a.0) * (t - a.0);
                v.max(0.0)
            }
        }
    }

    /// `Ñ(t) = t²` for `|t| ≤ 1`, `N(|t|)` beyond.
    pub fn eval_tilde(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 1.0 {
            a * a
        } else {
            self.eval(a)
        }
    }

    /// `inf{t : N(t) ≥ 1}` located by bisection.
    pub fn level_one(&self) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while self.eval(hi) < 1.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e12 {
                return f64::INFINITY;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }

    /// The piece of `Ñ` on `[1, ∞)` as convex segments (empty when `Ñ`
    /// is infinite beyond 1).
    pub(crate) fn outer_segments(&self) -> Vec<Segment> {
        match self {
            Self::Rademacher => Vec::new(),
            Self::Exponential => alloc::vec![Segment::Lin {
                start: 1.0,
                end: f64::INFINITY,
                base: 1.0,
                slope: 1.0,
            }],
            Self::GaussianLike => alloc::vec![Segment::Quad {
                start: 1.0,
                end: f64::INFINITY
            }],
            Self::Tabulated { knots } => {
                let mut breaks: Vec<f64> = knots.iter().map(|k| k.0).filter(|&t| t > 1.0).collect();
                breaks.insert(0, 1.0);
                let mut segs = Vec::with_capacity(breaks.len());
                for (i, &a) in breaks.iter().enumerate() {
                    let b = breaks.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    // past the last knot N continues with its final slope
                    let slope = if b.is_finite() {
                        (self.eval(b) - self.eval(a)) / (b - a)
                    } else {
                        self.eval(a + 1.0) - self.eval(a)
                    };
                    segs.push(Segment::Lin {
                        start: a,
                        end: b,
                        base: self.eval(a),
                        slope,
                    });
                }
                segs
            }
        }
    }

    /// Whether `Ñ` is convex on `[0, ∞)`: the slope of `N` just past 1 is
    /// at least 2, the derivative of `t²` at 1.
    pub fn tilde_is_convex(&self) -> bool {
        match self.outer_segments().first() {
            None => true,
            Some(seg) => seg.derivative(1.0) >= 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn builtin_kinds_are_normalized() {
        for f in [
            TailFunctionN::Rademacher,
            TailFunctionN::Exponential,
            TailFunctionN::GaussianLike,
        ] {
            assert!((f.level_one() - 1.0).abs() < 1e-12, "{f:?}");
            for t in [0.0, 0.3, 1.0, 1.5, 4.0] {
                assert_eq!(f.eval_tilde(t), f.eval_tilde(-t));
            }
        }
        assert_eq!(TailFunctionN::Rademacher.eval_tilde(1.0), 1.0);
        assert_eq!(
            TailFunctionN::Rademacher.eval_tilde(1.0 + 1e-12),
            f64::INFINITY
        );
        assert_eq!(TailFunctionN::Exponential.eval_tilde(3.0), 3.0);
        assert!(!TailFunctionN::Exponential.tilde_is_convex());
        assert!(TailFunctionN::GaussianLike.tilde_is_convex());
    }

    #[test]
    fn tabulated_validation() {
        assert!(TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]).is_ok());
        // not normalized
        assert!(TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 2.0)]).is_err());
        // concave
        assert!(TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 1.5)]).is_err());
        // decreasing
        assert!(TailFunctionN::tabulated(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
        let f = TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert_eq!(f.eval(3.0), 7.0);
        assert!(f.tilde_is_convex());
        let g = TailFunctionN::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.5)]).unwrap();
        assert!(!g.tilde_is_convex());
        let segs = g.outer_segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].cost(3.0), 4.0);
    }

    #[test]
    fn serde_forms() {
        let f: TailFunctionN = serde_json::from_str(r#"{"kind":"gaussian_like"}"#).unwrap();
        assert_eq!(f, TailFunctionN::GaussianLike);
        let bad = r#"{"kind":"tabulated","knots":[[0,0],[1,3]]}"#;
        assert!(serde_json::from_str::<TailFunctionN>(bad).is_err());
    }
}

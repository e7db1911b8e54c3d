use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePiece {
    pub slope: Vec<f64>,
    pub intercept: f64,
}

/// `f(x) = max_j (⟨a_j, x⟩ + b_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AffinePiece>", into = "Vec<AffinePiece>")]
pub struct ConvexFunctionSpec {
    pieces: Vec<AffinePiece>,
}

impl TryFrom<Vec<AffinePiece>> for ConvexFunctionSpec {
    type Error = Error;
    fn try_from(pieces: Vec<AffinePiece>) -> Result<Self> {
        Self::new(pieces)
    }
}

impl From<ConvexFunctionSpec> for Vec<AffinePiece> {
    fn from(f: ConvexFunctionSpec) -> Self {
        f.pieces
    }
}

impl ConvexFunctionSpec {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| invalid("convex function needs at least one piece"))?;
        let dim = first.slope.len();
        if dim == 0 {
            return Err(invalid("slope vectors must be nonempty"));
        }
        for p in &pieces {
            if p.slope.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.slope.len(),
                });
            }
            if !p.intercept.is_finite() || p.slope.iter().any(|a| !a.is_finite()) {
                return Err(invalid("affine pieces must be finite"));
            }
        }
        Ok(Self { pieces })
    }

    /// `x ↦ ⟨a, x⟩`.
    pub fn linear(slope: Vec<f64>) -> Result<Self> {
        Self::new(alloc::vec![AffinePiece {
            slope,
            intercept: 0.0
        }])
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(alloc::vec![AffinePiece {
            slope: alloc::vec![0.0; dim],
            intercept: value
        }])
    }

    /// `x ↦ max_v |⟨v, x⟩|`.
    pub fn seminorm(vectors: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            vectors
                .iter()
                .flat_map(|v| {
                    [
                        AffinePiece {
                            slope: v.clone(),
                            intercept: 0.0,
                        },
                        AffinePiece {
                            slope: v.iter().map(|a| -a).collect(),
                            intercept: 0.0,
                        },
                    ]
                })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].slope.len()
    }

    /// Value and index of the active piece (lowest index among ties).
    pub fn eval_active(&self, x: &[f64]) -> (f64, usize) {
        debug_assert_eq!(x.len(), self.dim());
        let mut best = (f64::NEG_INFINITY, 0);
        for (j, p) in self.pieces.iter().enumerate() {
            let v = p.intercept + p.slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            if v > best.0 {
                best = (v, j);
            }
        }
        best
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_active(x).0
    }

    pub fn subgradient(&self, x: &[f64]) -> &[f64] {
        &self.pieces[self.eval_active(x).1].slope
    }

    pub fn slope_norm_sq(&self, piece: usize) -> f64 {
        self.pieces[piece].slope.iter().map(|a| a * a).sum()
    }

    /// `max_j |a_j|`.
    pub fn lipschitz(&self) -> f64 {
        (0..self.pieces.len())
            .map(|j| self.slope_norm_sq(j))
            .fold(0.0, f64::max)
            .sqrt()
    }
}

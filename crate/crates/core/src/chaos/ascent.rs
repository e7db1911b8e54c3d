use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::ball::{solve_unchecked, BallConstraint};
use super::spec::{contract, full_contract};
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;

pub const DEFAULT_RESTARTS: usize = 20;
const MAX_SWEEPS: usize = 500;
const SWEEP_TOL: f64 = 1e-10;
/// Relative spread of restart values above which restarts "disagree".
pub const RESTART_SPREAD_TOL: f64 = 1e-6;

/// `Σ a_{i₁…i_m} α¹_{i₁}⋯α^m_{i_m}` over `m ≥ 1` blocks of equal side.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearForm {
    blocks: usize,
    side: usize,
    coeffs: Vec<f64>,
}

impl MultilinearForm {
    pub fn new(blocks: usize, side: usize, coeffs: Vec<f64>) -> Result<Self> {
        if blocks == 0 || side == 0 {
            return Err(invalid("multilinear form needs at least one block"));
        }
        let len = side.pow(blocks as u32);
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            blocks,
            side,
            coeffs,
        })
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, alphas: &[Vec<f64>]) -> f64 {
        let rows: Vec<&[f64]> = alphas.iter().map(Vec::as_slice).collect();
        full_contract(&self.coeffs, self.side, &rows)
    }

    /// Linear form in block `k` with every other block fixed.
    pub fn partial(&self, alphas: &[Vec<f64>], k: usize) -> Vec<f64> {
        let vectors: Vec<Option<&[f64]>> = (0..self.blocks)
            .map(|b| (b != k).then(|| alphas[b].as_slice()))
            .collect();
        contract(&self.coeffs, self.side, &vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentResult {
    pub value: f64,
    pub argmax: Vec<Vec<f64>>,
    /// Sweeps used by the best start.
    pub sweeps: usize,
    /// No block update lowered the objective (beyond 1e-12 relative).
    pub monotone: bool,
    /// `(max − min) / max` over the final values of all starts.
    pub restart_spread: f64,
    pub restarts_disagree: bool,
}

fn check_constraints(form: &MultilinearForm, constraints: &[BallConstraint]) -> Result<()> {
    if constraints.len() != form.blocks {
        return Err(Error::DimensionMismatch {
            expected: form.blocks,
            got: constraints.len(),
        });
    }
    for c in constraints {
        c.validate()?;
        if let Some(n) = c.dim() {
            if n != form.side {
                return Err(Error::DimensionMismatch {
                    expected: form.side,
                    got: n,
                });
            }
        }
    }
    Ok(())
}

/// `sup ⟨form, α¹ ⊗ ⋯ ⊗ α^m⟩` with `α^k` ranging over `constraints[k]`.
pub fn sup_over_balls(
    form: &MultilinearForm,
    constraints: &[BallConstraint],
    restarts: usize,
    stream: &RandomStream,
) -> Result<AscentResult> {
    sup_over_balls_warm(form, constraints, restarts, stream, &[])
}

/// As [`sup_over_balls`], also ascending from each feasible point in `warm`.
pub fn sup_over_balls_warm(
    form: &MultilinearForm,
    constraints: &[BallConstraint],
    restarts: usize,
    stream: &RandomStream,
    warm: &[Vec<Vec<f64>>],
) -> Result<AscentResult> {
    check_constraints(form, constraints)?;
    Ok(ascend(form, constraints, restarts, stream, warm))
}

pub(crate) fn ascend(
    form: &MultilinearForm,
    constraints: &[BallConstraint],
    restarts: usize,
    stream: &RandomStream,
    warm: &[Vec<Vec<f64>>],
) -> AscentResult {
    if form.blocks == 1 {
        let (a, v) = solve_unchecked(&form.coeffs, &constraints[0]);
        return AscentResult {
            value: v,
            argmax: vec![a],
            sweeps: 0,
            monotone: true,
            restart_spread: 0.0,
            restarts_disagree: false,
        };
    }
    let mut starts: Vec<Vec<Vec<f64>>> = warm.to_vec();
    for r in 0..restarts.max(1) {
        let mut rng = stream.split(r as u64);
        starts.push(
            constraints
                .iter()
                .map(|c| c.random_point(form.side, &mut rng))
                .collect(),
        );
    }
    let mut best: Option<(f64, Vec<Vec<f64>>, usize)> = None;
    let mut monotone = true;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for start in starts {
        let (value, argmax, sweeps, mono) = climb(form, constraints, start);
        monotone &= mono;
        lo = lo.min(value);
        hi = hi.max(value);
        if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
            best = Some((value, argmax, sweeps));
        }
    }
    let (value, argmax, sweeps) = best.unwrap();
    let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    AscentResult {
        value,
        argmax,
        sweeps,
        monotone,
        restart_spread: spread,
        restarts_disagree: spread > RESTART_SPREAD_TOL,
    }
}

/// Ascent from a single feasible start: (value, argmax, monotone).
pub(crate) fn climb_from(
    form: &MultilinearForm,
    constraints: &[BallConstraint],
    start: Vec<Vec<f64>>,
) -> (f64, Vec<Vec<f64>>, bool) {
    if form.blocks == 1 {
        let (a, v) = solve_unchecked(&form.coeffs, &constraints[0]);
        return (v, vec![a], true);
    }
    let (v, a, _, mono) = climb(form, constraints, start);
    (v, a, mono)
}

/// Cyclic exact block updates from `alphas` until a sweep gains less than
/// `SWEEP_TOL` relative.
fn climb(
    form: &MultilinearForm,
    constraints: &[BallConstraint],
    mut alphas: Vec<Vec<f64>>,
) -> (f64, Vec<Vec<f64>>, usize, bool) {
    let mut value = form.eval(&alphas);
    let mut monotone = true;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let before = value;
        for k in 0..form.blocks {
            let c = form.partial(&alphas, k);
            let (a, v) = solve_unchecked(&c, &constraints[k]);
            if v < value - 1e-12 * value.abs() {
                monotone = false;
            }
            if v >= value {
                alphas[k] = a;
                value = v;
            }
        }
        debug_assert!(monotone, "block ascent decreased the objective");
        if value - before <= SWEEP_TOL * value.abs() {
            break;
        }
    }
    (value, alphas, sweeps, monotone)
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::tensor::{CoefficientTensor, MAX_ORDER};
use crate::distributions::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::rng::RandomStream;

/// `Z = sup_{t ∈ T} |Σ t_{i₁…i_d} X^{(1)}_{i₁} ⋯ X^{(d)}_{i_d}|` over a
/// finite family `T`.
///
/// Decoupled chaoses draw an independent row `X^{(k)}` per mode; undecoupled
/// ones have a single generator row used in every mode and require
/// symmetric, zero-diagonal coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChaos", into = "RawChaos")]
pub struct ChaosSpec {
    order: usize,
    side: usize,
    family: Vec<CoefficientTensor>,
    generators: Vec<Vec<DistributionSpec>>,
    decoupled: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChaos {
    order: usize,
    side: usize,
    family: Vec<CoefficientTensor>,
    generators: Vec<Vec<DistributionSpec>>,
    decoupled: bool,
}

impl TryFrom<RawChaos> for ChaosSpec {
    type Error = Error;
    fn try_from(r: RawChaos) -> Result<Self> {
        Self::new(r.order, r.side, r.family, r.generators, r.decoupled)
    }
}

impl From<ChaosSpec> for RawChaos {
    fn from(s: ChaosSpec) -> Self {
        Self {
            order: s.order,
            side: s.side,
            family: s.family,
            generators: s.generators,
            decoupled: s.decoupled,
        }
    }
}

impl ChaosSpec {
    pub fn new(
        order: usize,
        side: usize,
        family: Vec<CoefficientTensor>,
        generators: Vec<Vec<DistributionSpec>>,
        decoupled: bool,
    ) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) || side == 0 {
            return Err(invalid(format!(
                "chaos needs order in 1..={MAX_ORDER} and side > 0"
            )));
        }
        for t in &family {
            if t.order() != order || t.side() != side {
                return Err(invalid(format!(
                    "tensor of shape ({}, {}) in a family of shape ({order}, {side})",
                    t.order(),
                    t.side()
                )));
            }
            if !decoupled && !(t.symmetric() && t.zero_diagonal()) {
                return Err(invalid(
                    "undecoupled chaos needs symmetric zero-diagonal tensors",
                ));
            }
        }
        let rows = if decoupled { order } else { 1 };
        if generators.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: generators.len(),
            });
        }
        for row in &generators {
            if row.len() != side {
                return Err(Error::DimensionMismatch {
                    expected: side,
                    got: row.len(),
                });
            }
            row.iter().try_for_each(DistributionSpec::validate)?;
        }
        Ok(Self {
            order,
            side,
            family,
            generators,
            decoupled,
        })
    }

    /// Same generator law at every position.
    pub fn with_generator(
        order: usize,
        side: usize,
        family: Vec<CoefficientTensor>,
        generator: DistributionSpec,
        decoupled: bool,
    ) -> Result<Self> {
        let rows = if decoupled { order } else { 1 };
        Self::new(
            order,
            side,
            family,
            vec![vec![generator; side]; rows],
            decoupled,
        )
    }

    pub fn rademacher(
        order: usize,
        side: usize,
        family: Vec<CoefficientTensor>,
        decoupled: bool,
    ) -> Result<Self> {
        Self::with_generator(order, side, family, DistributionSpec::Rademacher, decoupled)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn family(&self) -> &[CoefficientTensor] {
        &self.family
    }

    pub fn generators(&self) -> &[Vec<DistributionSpec>] {
        &self.generators
    }

    pub fn decoupled(&self) -> bool {
        self.decoupled
    }

    /// Rows of a sample matrix: `order` when decoupled, else 1.
    pub fn rows(&self) -> usize {
        self.generators.len()
    }

    pub fn all_rademacher(&self) -> bool {
        self.generators
            .iter()
            .flatten()
            .all(|g| *g == DistributionSpec::Rademacher)
    }

    /// Every tensor multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            family: self.family.iter().map(|t| t.scaled(c)).collect(),
            ..self.clone()
        }
    }

    /// Sample row feeding mode `k`.
    pub fn row<'a>(&self, x: &'a [f64], k: usize) -> &'a [f64] {
        let r = if self.decoupled { k } else { 0 };
        &x[r * self.side..(r + 1) * self.side]
    }

    /// Fills `x` (length `rows() · side`) with one draw of the generators.
    pub fn draw(&self, rng: &mut RandomStream, x: &mut [f64]) {
        for (slot, g) in x.iter_mut().zip(self.generators.iter().flatten()) {
            *slot = g.sample(rng);
        }
    }

    /// Draw `j` of the shared outer sample set rooted at `stream`.
    pub fn draw_indexed(&self, stream: &RandomStream, j: u64, x: &mut [f64]) {
        let mut rng = stream.split(0).split(j);
        self.draw(&mut rng, x);
    }
}

/// `Σ t_{i₁…i_d} v₁[i₁]⋯v_d[i_d]` with the last index summed innermost.
pub fn full_contract(entries: &[f64], side: usize, rows: &[&[f64]]) -> f64 {
    match rows.len() {
        0 => entries[0],
        1 => entries.iter().zip(rows[0]).map(|(a, b)| a * b).sum(),
        _ => {
            let stride = entries.len() / side;
            let mut acc = 0.0;
            for (i, &xi) in rows[0].iter().enumerate() {
                let inner = full_contract(&entries[i * stride..(i + 1) * stride], side, &rows[1..]);
                acc += inner * xi;
            }
            acc
        }
    }
}

/// Contracts every mode whose vector is `Some`, starting from the last mode;
/// the result is row-major over the remaining modes in their original order.
pub fn contract(entries: &[f64], side: usize, vectors: &[Option<&[f64]>]) -> Vec<f64> {
    let order = vectors.len();
    let mut data = entries.to_vec();
    let mut free_after = 0u32;
    for mode in (0..order).rev() {
        match vectors[mode] {
            None => free_after += 1,
            Some(v) => {
                let pre = side.pow(mode as u32);
                let post = side.pow(free_after);
                let mut out = vec![0.0; pre * post];
                for a in 0..pre {
                    for b in 0..post {
                        let mut acc = 0.0;
                        for (j, &vj) in v.iter().enumerate() {
                            acc += data[(a * side + j) * post + b] * vj;
                        }
                        out[a * post + b] = acc;
                    }
                }
                data = out;
            }
        }
    }
    data
}

/// `Z` at the sample matrix `x`.
pub fn evaluate_chaos(spec: &ChaosSpec, x: &[f64]) -> Result<f64> {
    let expected = spec.rows() * spec.side;
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(evaluate_unchecked(spec, x))
}

pub(crate) fn evaluate_unchecked(spec: &ChaosSpec, x: &[f64]) -> f64 {
    let mut rows: [&[f64]; MAX_ORDER] = [&[]; MAX_ORDER];
    for (k, r) in rows.iter_mut().enumerate().take(spec.order) {
        *r = spec.row(x, k);
    }
    spec.family
        .iter()
        .map(|t| full_contract(t.entries(), spec.side, &rows[..spec.order]).abs())
        .fold(0.0, f64::max)
}

/// `n` independent draws of `Z`; draw `j` uses `stream.split(0).split(j)`.
pub fn sample_chaos(spec: &ChaosSpec, n: usize, stream: &RandomStream) -> Vec<f64> {
    let mut x = vec![0.0; spec.rows() * spec.side];
    let base = stream.split(0);
    (0..n)
        .map(|j| {
            let mut rng = base.split(j as u64);
            spec.draw(&mut rng, &mut x);
            evaluate_unchecked(spec, &x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id2() -> ChaosSpec {
        ChaosSpec::rademacher(2, 2, vec![CoefficientTensor::identity(2).unwrap()], true).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(evaluate_chaos(&id2(), &[1.0, 0.0, 1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(evaluate_chaos(&id2(), &[1.0, 1.0, 1.0, -1.0]).unwrap(), 0.0);
        let zero = ChaosSpec::rademacher(2, 2, vec![CoefficientTensor::zeros(2, 2).unwrap()], true)
            .unwrap();
        assert_eq!(evaluate_chaos(&zero, &[0.3, -2.0, 1.0, 5.0]).unwrap(), 0.0);
        let empty = ChaosSpec::rademacher(2, 2, vec![], true).unwrap();
        assert_eq!(evaluate_chaos(&empty, &[1.0; 4]).unwrap(), 0.0);
        assert!(matches!(
            evaluate_chaos(&id2(), &[1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn undecoupled_needs_flags_and_one_row() {
        let id = CoefficientTensor::identity(2).unwrap();
        assert!(ChaosSpec::rademacher(2, 2, vec![id], false).is_err());
        let off = CoefficientTensor::matrix(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = ChaosSpec::rademacher(2, 2, vec![off], false).unwrap();
        assert_eq!(s.rows(), 1);
        assert_eq!(evaluate_chaos(&s, &[1.0, -1.0]).unwrap(), 2.0);
    }

    #[test]
    fn partial_contraction_agrees_with_full() {
        let mut rng = RandomStream::new(1);
        let (n, d) = (3, 3);
        let e: Vec<f64> = (0..27).map(|_| rng.uniform() - 0.5).collect();
        let v: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..n).map(|_| rng.uniform()).collect())
            .collect();
        let full = full_contract(&e, n, &[&v[0], &v[1], &v[2]]);
        let all = contract(&e, n, &[Some(&v[0]), Some(&v[1]), Some(&v[2])]);
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].to_bits(), full.to_bits());
        // leave the middle mode free, then finish by hand
        let mid = contract(&e, n, &[Some(&v[0]), None, Some(&v[2])]);
        let finish: f64 = mid.iter().zip(&v[1]).map(|(a, b)| a * b).sum();
        assert!((finish - full).abs() < 1e-14);
    }

    #[test]
    fn sampling_is_reproducible_and_prefix_stable() {
        let a = sample_chaos(&id2(), 50, &RandomStream::new(3));
        let b = sample_chaos(&id2(), 20, &RandomStream::new(3));
        assert_eq!(&a[..20], &b[..]);
        assert!(a.iter().all(|z| *z == 0.0 || *z == 2.0));
    }

    #[test]
    fn homogeneity() {
        let mut rng = RandomStream::new(4);
        let e: Vec<f64> = (0..9).map(|_| rng.uniform() - 0.5).collect();
        let t = CoefficientTensor::matrix(3, e).unwrap();
        let s = ChaosSpec::rademacher(2, 3, vec![t], true).unwrap();
        let x = [1.0, -1.0, 1.0, 1.0, 1.0, -1.0];
        let c = 2.5;
        let z = evaluate_chaos(&s, &x).unwrap();
        assert!((evaluate_chaos(&s.scaled(c), &x).unwrap() - c * z).abs() < 1e-14);
    }
}

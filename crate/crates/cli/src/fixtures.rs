//! Seeded instance generators shared by the experiments and test suites.

use std::collections::BTreeMap;

use anyhow::Result;
use concentra_core::chaos::{ChaosSpec, CoefficientTensor};
use concentra_core::distributions::DistributionSpec;
use concentra_core::entropy::{AffinePiece, ConvexFunctionSpec, DiscreteProduct, Factor};
use concentra_core::RandomStream;

fn random_tensor<F: FnMut(&mut RandomStream) -> f64>(
    order: usize,
    side: usize,
    seed: u64,
    symmetric: bool,
    mut draw: F,
) -> Result<CoefficientTensor> {
    let mut rng = RandomStream::new(seed);
    let total = side.pow(order as u32);
    if !symmetric {
        let e = (0..total).map(|_| draw(&mut rng)).collect();
        return Ok(CoefficientTensor::new(order, side, e, false, false)?);
    }
    // one draw per set of distinct indices; repeated indices stay zero
    let mut by_set: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut e = vec![0.0; total];
    for (flat, slot) in e.iter_mut().enumerate() {
        let mut idx = vec![0; order];
        let mut rest = flat;
        for i in idx.iter_mut().rev() {
            *i = rest % side;
            rest /= side;
        }
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        *slot = *by_set.entry(idx).or_insert_with(|| draw(&mut rng));
    }
    Ok(CoefficientTensor::new(order, side, e, true, true)?)
}

/// Independent ±1 entries; with `symmetric`, ±1 on distinct index sets and
/// zero wherever an index repeats.
pub fn random_sign_tensor(
    order: usize,
    side: usize,
    seed: u64,
    symmetric: bool,
) -> Result<CoefficientTensor> {
    random_tensor(order, side, seed, symmetric, |r| r.sign())
}

pub fn random_gaussian_tensor(
    order: usize,
    side: usize,
    seed: u64,
    symmetric: bool,
) -> Result<CoefficientTensor> {
    let g = DistributionSpec::standard_gaussian();
    random_tensor(order, side, seed, symmetric, |r| g.sample(r))
}

/// Maximum of `count` affine pieces with uniformly random unit slopes and
/// intercepts in `[0, 1)`.
pub fn random_unit_pieces(dim: usize, count: usize, seed: u64) -> Result<ConvexFunctionSpec> {
    let g = DistributionSpec::standard_gaussian();
    let mut rng = RandomStream::new(seed);
    let pieces = (0..count)
        .map(|_| {
            let mut slope: Vec<f64> = (0..dim).map(|_| g.sample(&mut rng)).collect();
            let norm = slope.iter().map(|v| v * v).sum::<f64>().sqrt();
            slope.iter_mut().for_each(|v| *v /= norm);
            AffinePiece {
                slope,
                intercept: rng.uniform(),
            }
        })
        .collect();
    Ok(ConvexFunctionSpec::new(pieces)?)
}

/// A random finite product measure on atoms `0, 1, …` per factor, with a
/// random nonnegative function tabulated over its atoms.
#[derive(Debug, Clone)]
pub struct TensorizationInstance {
    pub measure: DiscreteProduct,
    /// Row-major over the factor atoms.
    pub table: Vec<f64>,
}

impl TensorizationInstance {
    pub fn random(rng: &mut RandomStream, max_factors: usize, max_atoms: usize) -> Result<Self> {
        let k = 1 + rng.below(max_factors as u64) as usize;
        let factors: Vec<Factor> = (0..k)
            .map(|_| {
                let a = 1 + rng.below(max_atoms as u64) as usize;
                let w: Vec<f64> = (0..a).map(|_| 0.05 + rng.uniform()).collect();
                let s: f64 = w.iter().sum();
                Factor::new(
                    (0..a).map(|i| i as f64).collect(),
                    w.iter().map(|v| v / s).collect(),
                )
            })
            .collect::<concentra_core::Result<_>>()?;
        let measure = DiscreteProduct::new(factors)?;
        let table = (0..measure.atom_count())
            .map(|_| {
                if rng.uniform() < 0.2 {
                    0.0
                } else {
                    3.0 * rng.uniform()
                }
            })
            .collect();
        Ok(Self { measure, table })
    }

    pub fn xi(&self, x: &[f64]) -> f64 {
        let shape = self.measure.shape();
        let flat = x
            .iter()
            .zip(&shape)
            .fold(0usize, |acc, (v, s)| acc * s + *v as usize);
        self.table[flat]
    }
}

/// Rademacher chaoses with `n·d ≤ 12` covering orders 1 to 3.
pub fn enumeration_fixtures() -> Result<Vec<(String, ChaosSpec)>> {
    let mut out = Vec::new();
    let mut push = |name: String,
                    order: usize,
                    family: Vec<CoefficientTensor>,
                    decoupled: bool|
     -> Result<()> {
        let side = family[0].side();
        out.push((name, ChaosSpec::rademacher(order, side, family, decoupled)?));
        Ok(())
    };
    for n in [1usize, 4, 7, 12] {
        push(
            format!("linear-ones-n{n}"),
            1,
            vec![CoefficientTensor::vector(vec![1.0; n])?],
            true,
        )?;
    }
    push(
        "linear-mixed-n6".into(),
        1,
        vec![CoefficientTensor::vector(vec![
            3.0, -1.0, 0.5, 2.0, 0.0, -0.25,
        ])?],
        true,
    )?;
    for (n, seed) in [(5usize, 1u64), (10, 2)] {
        push(
            format!("linear-sign-n{n}"),
            1,
            vec![random_sign_tensor(1, n, seed, false)?],
            true,
        )?;
    }
    for n in [2usize, 3, 6] {
        push(
            format!("identity-n{n}"),
            2,
            vec![CoefficientTensor::identity(n)?],
            true,
        )?;
    }
    for (n, seed) in [(3usize, 3u64), (4, 4), (5, 5), (6, 6)] {
        push(
            format!("sign2-n{n}"),
            2,
            vec![random_sign_tensor(2, n, seed, false)?],
            true,
        )?;
    }
    push(
        "gauss2-n4".into(),
        2,
        vec![random_gaussian_tensor(2, 4, 7, false)?],
        true,
    )?;
    push(
        "family2-n3".into(),
        2,
        vec![
            random_sign_tensor(2, 3, 8, false)?,
            CoefficientTensor::identity(3)?,
        ],
        true,
    )?;
    for n in [3usize, 5] {
        push(
            format!("undecoupled-n{n}"),
            2,
            vec![random_sign_tensor(2, n, 10 + n as u64, true)?],
            false,
        )?;
    }
    for (n, seed) in [(2usize, 20u64), (3, 21), (4, 22)] {
        push(
            format!("sign3-n{n}"),
            3,
            vec![random_sign_tensor(3, n, seed, false)?],
            true,
        )?;
    }
    push(
        "gauss3-n3".into(),
        3,
        vec![random_gaussian_tensor(3, 3, 23, false)?],
        true,
    )?;
    push(
        "undecoupled3-n4".into(),
        3,
        vec![random_sign_tensor(3, 4, 24, true)?],
        false,
    )?;
    Ok(out)
}

/// The order-2, side-8 random ±1 fixture.
pub fn sandwich_tensor() -> Result<CoefficientTensor> {
    random_sign_tensor(2, 8, 2024, false)
}

pub fn sandwich_fixture(generator: DistributionSpec) -> Result<ChaosSpec> {
    Ok(ChaosSpec::with_generator(
        2,
        8,
        vec![sandwich_tensor()?],
        generator,
        true,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sign_tensor_flags() {
        let t = random_sign_tensor(3, 4, 1, true).unwrap();
        assert!(t.symmetric() && t.zero_diagonal());
        assert_eq!(t.get(&[0, 1, 2]), t.get(&[2, 0, 1]));
        assert_eq!(t.get(&[1, 1, 2]), 0.0);
        assert_eq!(t.get(&[0, 1, 2]).abs(), 1.0);
    }

    #[test]
    fn enumeration_fixture_coverage() {
        let f = enumeration_fixtures().unwrap();
        assert!(f.len() >= 20);
        for order in 1..=3 {
            assert!(f.iter().any(|(_, s)| s.order() == order));
        }
        for (name, s) in &f {
            assert!(s.side() * s.order() <= 12, "{name}");
        }
    }

    #[test]
    fn unit_pieces_are_unit() {
        let f = random_unit_pieces(10, 5, 3).unwrap();
        assert!((f.lipschitz() - 1.0).abs() < 1e-12);
        assert_eq!(f.pieces().len(), 5);
    }
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{EntropyEstimate, EntropyMethod, PhiFunction};
use crate::error::{invalid, Error, Result};

/// Largest number of product atoms enumerated exactly.
pub const MAX_ATOMS: u64 = 10_000_000;

/// One coordinate of a discrete product measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Factor {
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let f = Self { atoms, probs };
        f.validate()?;
        Ok(f)
    }

    pub fn fair_coin(low: f64, high: f64) -> Self {
        Self {
            atoms: vec![low, high],
            probs: vec![0.5, 0.5],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() || self.atoms.len() != self.probs.len() {
            return Err(invalid("factor needs equally many atoms and probs"));
        }
        if self.atoms.iter().any(|a| !a.is_finite()) || self.probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("factor atoms must be finite and probs nonnegative"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("factor probs sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// A product of finitely supported laws, enumerated in row-major order
/// (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct DiscreteProduct {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for DiscreteProduct {
    type Error = Error;
    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<DiscreteProduct> for Vec<Factor> {
    fn from(p: DiscreteProduct) -> Self {
        p.factors
    }
}

impl DiscreteProduct {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("product measure needs at least one factor"));
        }
        let mut total: u64 = 1;
        for f in &factors {
            f.validate()?;
            total = total.saturating_mul(f.atoms.len() as u64);
        }
        if total > MAX_ATOMS {
            return Err(Error::SizeCap {
                what: "product atom count",
                limit: MAX_ATOMS,
            });
        }
        Ok(Self { factors })
    }

    /// Accepts a joint probability table (row-major over `atoms`) and
    /// rejects it unless it equals the product of its marginals to 1e-12.
    pub fn from_joint(atoms: Vec<Vec<f64>>, joint: &[f64]) -> Result<Self> {
        let shape: Vec<usize> = atoms.iter().map(Vec::len).collect();
        let size: usize = shape.iter().product();
        if joint.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: joint.len(),
            });
        }
        let strides = strides(&shape);
        let mut marginals: Vec<Vec<f64>> = shape.iter().map(|&k| vec![0.0; k]).collect();
        for (flat, &p) in joint.iter().enumerate() {
            for (i, m) in marginals.iter_mut().enumerate() {
                m[(flat / strides[i]) % shape[i]] += p;
            }
        }
        for (flat, &p) in joint.iter().enumerate() {
            let prod: f64 = marginals
                .iter()
                .enumerate()
                .map(|(i, m)| m[(flat / strides[i]) % shape[i]])
                .product();
            if (prod - p).abs() > 1e-12 {
                return Err(Error::NotProduct);
            }
        }
        Self::new(
            atoms
                .into_iter()
                .zip(marginals)
                .map(|(atoms, probs)| Factor { atoms, probs })
                .collect(),
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.atoms.len()).collect()
    }

    pub fn atom_count(&self) -> usize {
        self.shape().iter().product()
    }

    /// Calls `visit(point, probability)` for every atom in row-major order.
    pub fn for_each_atom<F: FnMut(&[f64], f64)>(&self, mut visit: F) {
        let shape = self.shape();
        let d = shape.len();
        let mut idx = vec![0usize; d];
        let mut point: Vec<f64> = self.factors.iter().map(|f| f.atoms[0]).collect();
        loop {
            let prob = self
                .factors
                .iter()
                .zip(&idx)
                .fold(1.0, |acc, (f, &k)| acc * f.probs[k]);
            visit(&point, prob);
            let mut axis = d;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    point[axis] = self.factors[axis].atoms[idx[axis]];
                    break;
                }
                idx[axis] = 0;
                point[axis] = self.factors[axis].atoms[0];
            }
        }
    }

    /// `ξ` and the probability at every atom, rejecting negative or
    /// non-finite values of `ξ`.
    pub fn tabulate<F: Fn(&[f64]) -> f64>(&self, xi: F) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.atom_count();
        let mut values = Vec::with_capacity(n);
        let mut probs = Vec::with_capacity(n);
        let mut failure = None;
        self.for_each_atom(|x, p| {
            let v = xi(x);
            if failure.is_none() {
                if v.is_nan() || v < 0.0 {
                    failure = Some(Error::NegativeValue {
                        index: values.len(),
                        value: v,
                    });
                } else if !v.is_finite() {
                    failure = Some(Error::Overflow {
                        what: "xi",
                        index: values.len(),
                    });
                }
            }
            values.push(v);
            probs.push(p);
        });
        match failure {
            Some(e) => Err(e),
            None => Ok((values, probs)),
        }
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

fn entropy_checked(phi: PhiFunction, values: &[f64], probs: &[f64]) -> Result<f64> {
    if let Some(index) = values.iter().position(|&v| !phi.eval(v).is_finite()) {
        return Err(Error::Overflow {
            what: "phi(xi)",
            index,
        });
    }
    let ent = phi.entropy(values.iter().copied().zip(probs.iter().copied()));
    debug_assert!(ent >= 0.0);
    Ok(ent)
}

/// `E Φ(ξ) − Φ(E ξ)` by full enumeration.
pub fn phi_entropy_exact<F: Fn(&[f64]) -> f64>(
    measure: &DiscreteProduct,
    xi: F,
    phi: PhiFunction,
) -> Result<EntropyEstimate> {
    let (values, probs) = measure.tabulate(xi)?;
    Ok(EntropyEstimate {
        value: entropy_checked(phi, &values, &probs)?,
        std_error: 0.0,
        n_samples: values.len() as u64,
        method: EntropyMethod::Exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorizationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the product entropy with the sum over coordinates of the
/// expected conditional entropies.
pub fn check_tensorization<F: Fn(&[f64]) -> f64>(
    measure: &DiscreteProduct,
    xi: F,
    phi: PhiFunction,
) -> Result<TensorizationCheck> {
    let (values, probs) = measure.tabulate(xi)?;
    let lhs = entropy_checked(phi, &values, &probs)?;
    let shape = measure.shape();
    let strides = strides(&shape);
    let mut rhs = 0.0;
    let mut fiber_v = Vec::new();
    let mut fiber_p = Vec::new();
    for (i, factor) in measure.factors().iter().enumerate() {
        for base in 0..values.len() {
            if !(base / strides[i]).is_multiple_of(shape[i]) {
                continue;
            }
            let weight: f64 = measure
                .factors()
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .fold(1.0, |acc, (l, f)| {
                    acc * f.probs[(base / strides[l]) % shape[l]]
                });
            fiber_v.clear();
            fiber_p.clear();
            for (k, &p) in factor.probs.iter().enumerate() {
                fiber_v.push(values[base + k * strides[i]]);
                fiber_p.push(p);
            }
            rhs += weight * entropy_checked(phi, &fiber_v, &fiber_p)?;
        }
    }
    Ok(TensorizationCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    fn coin() -> DiscreteProduct {
        DiscreteProduct::new(vec![Factor::fair_coin(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn exact_examples() {
        let e = phi_entropy_exact(&coin(), |x| 2.0 * x[0], PhiFunction::Square).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.method, EntropyMethod::Exact);
        let e = core::f64::consts::E;
        let got = phi_entropy_exact(&coin(), |x| 1.0 + (e - 1.0) * x[0], PhiFunction::XLogX)
            .unwrap()
            .value;
        let want = e / 2.0 - (1.0 + e) / 2.0 * ((1.0 + e) / 2.0).ln();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        for phi in PhiFunction::ALL {
            let m = DiscreteProduct::new(vec![
                Factor::new(vec![0.0, 1.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap(),
                Factor::fair_coin(-1.0, 1.0),
            ])
            .unwrap();
            assert_eq!(phi_entropy_exact(&m, |_| 3.7, phi).unwrap().value, 0.0);
        }
    }

    #[test]
    fn zero_atoms_under_x_log_x() {
        let got = phi_entropy_exact(&coin(), |x| x[0], PhiFunction::XLogX)
            .unwrap()
            .value;
        // E[ξ log ξ] = 0, E ξ = 1/2
        assert!((got - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn negative_xi_is_rejected() {
        let err = phi_entropy_exact(&coin(), |x| x[0] - 0.5, PhiFunction::Square).unwrap_err();
        assert_eq!(
            err,
            Error::NegativeValue {
                index: 0,
                value: -0.5
            }
        );
    }

    #[test]
    fn tensorization_examples() {
        let two = DiscreteProduct::new(vec![Factor::fair_coin(0.0, 1.0); 2]).unwrap();
        let xi = |x: &[f64]| if x[0] == 1.0 && x[1] == 1.0 { 2.0 } else { 1.0 };
        for phi in PhiFunction::ALL {
            let t = check_tensorization(&two, xi, phi).unwrap();
            assert!(t.holds);
        }
        // oracle for the square case: Var = 3/16, conditional variances 1/8 + 1/8
        let t = check_tensorization(&two, xi, PhiFunction::Square).unwrap();
        assert!((t.lhs - 3.0 / 16.0).abs() < 1e-15);
        assert!((t.rhs - 0.25).abs() < 1e-15);

        let one = DiscreteProduct::new(vec![
            Factor::new(vec![0.0, 2.0, 3.0], vec![0.1, 0.6, 0.3]).unwrap()
        ])
        .unwrap();
        for phi in PhiFunction::ALL {
            let t = check_tensorization(&one, |x| x[0] * x[0] + 0.5, phi).unwrap();
            assert_eq!(t.lhs, t.rhs);
            let t = check_tensorization(&two, |_| 4.0, phi).unwrap();
            assert_eq!((t.lhs, t.rhs), (0.0, 0.0));
        }
    }

    #[test]
    fn joint_tables() {
        let atoms = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        let p = DiscreteProduct::from_joint(atoms.clone(), &[0.08, 0.12, 0.32, 0.48]).unwrap();
        assert!((p.factors()[0].probs[0] - 0.2).abs() < 1e-15);
        assert_eq!(
            DiscreteProduct::from_joint(atoms.clone(), &[0.5, 0.0, 0.0, 0.5]),
            Err(Error::NotProduct)
        );
        assert!(matches!(
            DiscreteProduct::from_joint(atoms, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn size_cap() {
        let f = Factor::new(vec![0.0; 10], vec![0.1; 10]).unwrap();
        assert!(matches!(
            DiscreteProduct::new(vec![f; 8]),
            Err(Error::SizeCap { .. })
        ));
    }

    /// Random product with at most 4 factors of at most 5 atoms, and a
    /// random nonnegative table for ξ.
    fn random_instance(rng: &mut RandomStream) -> (DiscreteProduct, Vec<f64>) {
        let d = 1 + rng.below(4) as usize;
        let factors: Vec<Factor> = (0..d)
            .map(|i| {
                let k = 1 + rng.below(5) as usize;
                let raw: Vec<f64> = (0..k).map(|_| rng.uniform_open()).collect();
                let s: f64 = raw.iter().sum();
                let mut probs: Vec<f64> = raw.iter().map(|r| r / s).collect();
                let last: f64 = probs[..k - 1].iter().sum();
                probs[k - 1] = 1.0 - last;
                Factor {
                    atoms: (0..k).map(|a| (i * 10 + a) as f64).collect(),
                    probs,
                }
            })
            .collect();
        let m = DiscreteProduct::new(factors).unwrap();
        let table = (0..m.atom_count())
            .map(|_| {
                if rng.below(5) == 0 {
                    0.0
                } else {
                    rng.uniform() * 10.0
                }
            })
            .collect();
        (m, table)
    }

    fn lookup<'a>(m: &'a DiscreteProduct, table: &'a [f64]) -> impl Fn(&[f64]) -> f64 + 'a {
        let shape = m.shape();
        move |x: &[f64]| {
            let mut flat = 0;
            for (i, &v) in x.iter().enumerate() {
                flat = flat * shape[i] + (v as usize % 10);
            }
            table[flat]
        }
    }

    #[test]
    fn tensorization_on_random_instances() {
        let mut rng = RandomStream::new(7);
        for _ in 0..300 {
            let (m, table) = random_instance(&mut rng);
            for phi in PhiFunction::ALL {
                let t = check_tensorization(&m, lookup(&m, &table), phi).unwrap();
                assert!(t.holds, "{t:?}");
                assert!(t.lhs >= 0.0);
            }
        }
    }

    #[test]
    fn scaling_laws() {
        let mut rng = RandomStream::new(11);
        for _ in 0..100 {
            let (m, table) = random_instance(&mut rng);
            let c = 0.1 + 5.0 * rng.uniform();
            let f = lookup(&m, &table);
            let sq = phi_entropy_exact(&m, &f, PhiFunction::Square)
                .unwrap()
                .value;
            let sq_c = phi_entropy_exact(&m, |x| c * f(x), PhiFunction::Square)
                .unwrap()
                .value;
            assert!((sq_c - c * c * sq).abs() <= 1e-12 * (1.0 + sq_c));
            let xl = phi_entropy_exact(&m, &f, PhiFunction::XLogX).unwrap().value;
            let xl_c = phi_entropy_exact(&m, |x| c * f(x), PhiFunction::XLogX)
                .unwrap()
                .value;
            assert!((xl_c - c * xl).abs() <= 1e-12 * (1.0 + xl_c));
        }
    }
}

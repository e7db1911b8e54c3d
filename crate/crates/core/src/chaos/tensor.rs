use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MAX_ORDER: usize = 4;

/// Dense coefficient array `t_{i₁…i_d}` stored row-major (last index
/// fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct CoefficientTensor {
    order: usize,
    side: usize,
    entries: Vec<f64>,
    symmetric: bool,
    zero_diagonal: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTensor {
    order: usize,
    side: usize,
    entries: Vec<f64>,
    #[serde(default)]
    symmetric: bool,
    #[serde(default)]
    zero_diagonal: bool,
}

impl TryFrom<RawTensor> for CoefficientTensor {
    type Error = Error;
    fn try_from(r: RawTensor) -> Result<Self> {
        Self::new(r.order, r.side, r.entries, r.symmetric, r.zero_diagonal)
    }
}

impl From<CoefficientTensor> for RawTensor {
    fn from(t: CoefficientTensor) -> Self {
        Self {
            order: t.order,
            side: t.side,
            entries: t.entries,
            symmetric: t.symmetric,
            zero_diagonal: t.zero_diagonal,
        }
    }
}

/// Calls `visit(flat, index)` for every multi-index of `order` coordinates
/// in `0..side`, in row-major order.
pub(crate) fn for_each_index<F: FnMut(usize, &[usize])>(order: usize, side: usize, mut visit: F) {
    let mut idx = vec![0usize; order];
    let total = side.pow(order as u32);
    for flat in 0..total {
        visit(flat, &idx);
        for axis in (0..order).rev() {
            idx[axis] += 1;
            if idx[axis] < side {
                break;
            }
            idx[axis] = 0;
        }
    }
}

fn flat_index(idx: &[usize], side: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * side + i)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl CoefficientTensor {
    pub fn new(
        order: usize,
        side: usize,
        entries: Vec<f64>,
        symmetric: bool,
        zero_diagonal: bool,
    ) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(invalid(format!(
                "tensor order must be 1..={MAX_ORDER}, got {order}"
            )));
        }
        if side == 0 {
            return Err(invalid("tensor side must be positive"));
        }
        let len = side
            .checked_pow(order as u32)
            .ok_or_else(|| invalid("tensor too large"))?;
        if entries.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tensor entries must be finite"));
        }
        let t = Self {
            order,
            side,
            entries,
            symmetric,
            zero_diagonal,
        };
        if symmetric {
            t.verify_symmetric()?;
        }
        if zero_diagonal {
            t.verify_zero_diagonal()?;
        }
        Ok(t)
    }

    fn verify_symmetric(&self) -> Result<()> {
        let scale = self.max_abs();
        let mut bad = None;
        for_each_index(self.order, self.side, |flat, idx| {
            if bad.is_some() {
                return;
            }
            let mut perm = idx.to_vec();
            perm.sort_unstable();
            loop {
                let other = self.entries[flat_index(&perm, self.side)];
                if (other - self.entries[flat]).abs() > 1e-12 * scale {
                    bad = Some(idx.to_vec());
                    return;
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        });
        match bad {
            Some(idx) => Err(invalid(format!(
                "tensor flagged symmetric is not symmetric at index {idx:?}"
            ))),
            None => Ok(()),
        }
    }

    fn verify_zero_diagonal(&self) -> Result<()> {
        let mut bad = None;
        for_each_index(self.order, self.side, |flat, idx| {
            let repeated = (0..idx.len()).any(|a| (a + 1..idx.len()).any(|b| idx[a] == idx[b]));
            if repeated && self.entries[flat] != 0.0 && bad.is_none() {
                bad = Some(idx.to_vec());
            }
        });
        match bad {
            Some(idx) => Err(invalid(format!(
                "tensor flagged zero_diagonal has a nonzero entry at {idx:?}"
            ))),
            None => Ok(()),
        }
    }

    pub fn zeros(order: usize, side: usize) -> Result<Self> {
        Self::new(order, side, vec![0.0; side.pow(order as u32)], true, true)
    }

    /// The `side × side` identity matrix as an order-2 tensor.
    pub fn identity(side: usize) -> Result<Self> {
        let mut e = vec![0.0; side * side];
        for i in 0..side {
            e[i * side + i] = 1.0;
        }
        Self::new(2, side, e, true, false)
    }

    /// Order-1 tensor from a coefficient vector.
    pub fn vector(c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        Self::new(1, n, c, true, true)
    }

    /// Order-2 tensor from a row-major matrix; flags are detected.
    pub fn matrix(side: usize, entries: Vec<f64>) -> Result<Self> {
        Self::new(2, side, entries, false, false).map(Self::with_detected_flags)
    }

    /// Sets the symmetric and zero-diagonal flags when they hold exactly.
    pub fn with_detected_flags(mut self) -> Self {
        self.symmetric = self.verify_symmetric().is_ok();
        self.zero_diagonal = self.verify_zero_diagonal().is_ok();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[flat_index(idx, self.side)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `c · t`; flags are preserved.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_are_verified() {
        assert!(CoefficientTensor::new(2, 2, vec![0.0, 1.0, 2.0, 0.0], true, false).is_err());
        assert!(CoefficientTensor::new(2, 2, vec![1.0, 1.0, 1.0, 0.0], true, true).is_err());
        let t = CoefficientTensor::new(2, 2, vec![0.0, 1.0, 1.0, 0.0], true, true).unwrap();
        assert!(t.symmetric() && t.zero_diagonal());
        assert!(CoefficientTensor::new(5, 2, vec![0.0; 32], false, false).is_err());
        assert!(CoefficientTensor::new(2, 2, vec![0.0; 3], false, false).is_err());
    }

    #[test]
    fn order_three_symmetry() {
        let n = 3;
        let mut e = vec![0.0; 27];
        for_each_index(3, n, |flat, idx| {
            let distinct = idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2];
            if distinct {
                e[flat] = 1.0 + (idx[0] + idx[1] + idx[2]) as f64;
            }
        });
        let t = CoefficientTensor::new(3, n, e.clone(), true, true).unwrap();
        assert_eq!(t.get(&[0, 1, 2]), t.get(&[2, 0, 1]));
        e[flat_index(&[0, 1, 2], n)] = 9.0;
        assert!(CoefficientTensor::new(3, n, e, true, true).is_err());
    }

    #[test]
    fn permutations_enumerate_all() {
        let mut v = vec![0, 1, 1, 2];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 12);
    }

    #[test]
    fn serde_validates() {
        let t = CoefficientTensor::identity(2).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<CoefficientTensor>(&s).unwrap(), t);
        let bad = r#"{"order":2,"side":2,"entries":[0,1,2,0],"symmetric":true}"#;
        assert!(serde_json::from_str::<CoefficientTensor>(bad).is_err());
    }
}

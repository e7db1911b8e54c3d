//! Counter-based splittable random streams.
//!
//! Every stream is a Philox4x32-10 key plus a block counter. Splitting
//! derives a child key by encrypting the child index under the parent key,
//! so any node of the split tree can be reconstructed from the root seed and
//! its path alone. Draws are therefore reproducible regardless of how work is
//! partitioned across workers.

use alloc::vec::Vec;
use rand_core::RngCore;

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;
const SPLIT_TAG: u32 = 0x5EED_5B17;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with 10 rounds.
pub fn philox4x32_10(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for round in 0..10 {
        if round > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// A reproducible random stream identified by `(seed, path)`.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    key: [u32; 2],
    block: u64,
    buf: [u32; 4],
    used: usize,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_key(seed, Vec::new(), [seed as u32, (seed >> 32) as u32])
    }

    fn with_key(seed: u64, path: Vec<u64>, key: [u32; 2]) -> Self {
        Self {
            seed,
            path,
            key,
            block: 0,
            buf: [0; 4],
            used: 4,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Split history from the root stream.
    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child stream number `index`. Independent of how many values have been
    /// drawn from `self`.
    pub fn split(&self, index: u64) -> RandomStream {
        let depth = self.path.len() as u32;
        let out = philox4x32_10(
            [index as u32, (index >> 32) as u32, SPLIT_TAG, depth],
            self.key,
        );
        let mut path = self.path.clone();
        path.push(index);
        Self::with_key(self.seed, path, [out[0], out[1]])
    }

    #[inline]
    fn refill(&mut self) {
        let b = self.block;
        self.buf = philox4x32_10([b as u32, (b >> 32) as u32, 0, 0], self.key);
        self.block = b.wrapping_add(1);
        self.used = 0;
    }

    #[inline]
    pub fn next_word(&mut self) -> u32 {
        if self.used == 4 {
            self.refill();
        }
        let w = self.buf[self.used];
        self.used += 1;
        w
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1)`; never returns 0.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (Lemire's multiply-shift with rejection).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (n as u128);
            let lo = m as u64;
            if lo < n && lo < n.wrapping_neg() % n {
                continue;
            }
            return (m >> 64) as u64;
        }
    }

    /// Random sign, `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_word() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.next_word()
    }

    fn next_u64(&mut self) -> u64 {
        let lo = self.next_word() as u64;
        let hi = self.next_word() as u64;
        lo | (hi << 32)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(4) {
            let w = self.next_word().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32_10([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32_10([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32_10(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn same_seed_and_path_reproduce() {
        let a = RandomStream::new(7).split(3).split(11);
        let b = RandomStream::new(7).split(3).split(11);
        let (mut a, mut b) = (a, b);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.path(), &[3, 11]);
    }

    #[test]
    fn split_does_not_depend_on_parent_position() {
        let mut parent = RandomStream::new(1);
        let before = parent.split(5).next_u64();
        for _ in 0..37 {
            parent.next_u64();
        }
        assert_eq!(parent.split(5).next_u64(), before);
    }

    #[test]
    fn sibling_streams_look_independent() {
        // correlation of uniforms between siblings should be O(1/sqrt(n))
        let root = RandomStream::new(42);
        let n = 200_000;
        let (mut a, mut b) = (root.split(0), root.split(1));
        let mut sab = 0.0;
        for _ in 0..n {
            sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
        }
        let corr = sab / n as f64 * 12.0;
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn below_is_in_range_and_roughly_uniform() {
        let mut s = RandomStream::new(9);
        let mut hist = [0u32; 7];
        for _ in 0..70_000 {
            hist[s.below(7) as usize] += 1;
        }
        for h in hist {
            assert!((h as i64 - 10_000).abs() < 500, "{hist:?}");
        }
    }
}

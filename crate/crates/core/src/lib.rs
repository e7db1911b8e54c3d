#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod chaos;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod math;
pub mod oracles;
pub mod quad;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RandomStream;

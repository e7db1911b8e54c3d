//! Experiment harness: configs, tensor files, runners, report output, and
//! the oracle and self-test suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod fixtures;
pub mod oracle_suite;
pub mod output;
pub mod selftest;
pub mod tensor_io;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use output::{Report, ResultEntry};

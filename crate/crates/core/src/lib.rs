//! Testing a mean vector with the split-sample two-equation empirical
//! likelihood, valid whether the dimension is fixed or grows with the
//! sample size, plus the classical baselines, asymptotic power formulas and
//! the simulation models used to study them.
//!
//! The crate is `no_std` and needs only `alloc`.
//!
//! ```
//! use splitel_core::{datagen, meantest};
//!
//! let spec = datagen::ModelSpec::model2(30, 200, 0.0);
//! let data = datagen::sample(&spec, 200, &mut datagen::RngStream::new(1, 0)).unwrap();
//! let out = meantest::nelm_test(&data, &vec![0.0; 30], 0.05, &vec![1.0; 30]).unwrap();
//! assert!(out.p_value >= 0.0 && out.p_value <= 1.0);
//! ```

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod datagen;
pub mod dist;
pub mod el;
pub mod error;
pub mod meantest;
pub mod power;

pub use data::{cov_summary, sample_covariance, split_pairs, CovSummary, DataMatrix, PairedScores};
pub use el::{owen_log_el, solve_el, ElSolution, ElStatus};
pub use error::{Error, Result};
pub use meantest::{Method, OelmCalibration, TestOutcome};
pub use power::PowerSpec;

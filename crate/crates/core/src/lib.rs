//! Fuzzy c-means clustering with a linguistic, per-entry fuzzifier exponent.
//!
//! The [`hedge_algebra`] module models the linguistic terms and their
//! semantics; [`clustering`] holds the classical engine and the adaptive one;
//! [`evaluation`] and [`imaging`] are the benchmark and segmentation
//! front-ends used by the `hamfcm` binary.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod hedge_algebra;
pub mod imaging;

pub use clustering::{run_fcm, run_hamfcm, ClusterConfig, ClusterResult, Dataset};
pub use error::{Error, Result};
pub use hedge_algebra::{HedgeAlgebra, HedgeParams, LinguisticTerm};

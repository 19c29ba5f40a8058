//! Linear concept subspaces: estimation and evaluation.
//!
//! A *concept subspace* is a linear subspace of a representation space that
//! is meant to hold the linearly decodable information about one discrete
//! concept. This crate estimates such subspaces with six estimators
//! ([`estimators`]) and scores them with probing classifiers ([`probing`])
//! under a three-way split protocol ([`evaluation`]):
//!
//! | metric       | measured as                          | best case          | worst case         |
//! |--------------|--------------------------------------|--------------------|--------------------|
//! | retention    | concept accuracy on the subspace     | ambient accuracy   | majority accuracy  |
//! | leakage      | concept accuracy on the complement   | majority accuracy  | ambient accuracy   |
//! | purity       | other-concept error on the subspace  | majority error     | ambient error      |
//! | interference | other-concept error on the complement| ambient error      | majority error     |
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod linalg;
pub mod probing;
pub mod rng;

pub use dataset::{LabeledDataset, SplitSpec};
pub use error::{Error, Result};
pub use estimators::{ConceptSubspace, EstimatorKind};
pub use evaluation::MetricReport;
pub use linalg::{Matrix, Projector};
pub use probing::{Probe, TrainConfig};

//! Multi-label feature selection by implicit regularization.
//!
//! The estimator ([`estimator`]) factors the feature-coefficient matrix as a Hadamard
//! product `G ⊙ H` and couples it to a nonnegative, graph-regularized embedding of the
//! label matrix. Plain projected gradient descent from a tiny random start yields
//! row-sparse coefficients whose row norms rank the features.
//!
//! Around it sit the pieces needed to benchmark a ranking: a MULAN ARFF loader
//! ([`dataset`]), the kNN heat-kernel graph ([`graph`]), the ML-kNN classifier
//! ([`mlknn`]), multi-label metrics ([`metrics`]), Friedman/Nemenyi comparison
//! ([`stats`]) and a cross-validated experiment harness ([`experiment`]).

pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod mlknn;
pub mod stats;
pub mod synthetic;

pub use dataset::{load_dataset, save_dataset, summarize, DatasetSummary, MultiLabelDataset};
pub use error::{Error, Result};
pub use estimator::{fit, FeatureRanking, InitMode, MfsirConfig, MfsirModel};

//! Numerical core: standardization, PCA, PLS1 regression, nested
//! cross-validation, and Spearman correlation with the no-correlation test.

mod cv;
mod pca;
mod pls;
mod spearman;
mod special;
mod standardize;

pub use cv::{
    lopo_cv, select_components, FoldRecord, LopoConfig, PredictionResult, PredictionRow,
    SessionRow, DEFAULT_INNER_FOLDS, DEFAULT_K_MAX_CAP,
};
pub use pca::pca_first_component;
pub use pls::{pls_fit, pls_predict, pls_predict_at_k, PlsModel};
pub use spearman::{average_ranks, spearman, CorrelationReport, DEFAULT_ALPHA};
pub use special::{incomplete_beta, ln_gamma, t_two_sided_p};
pub use standardize::{mean_sd, StandardizationParams};

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    LengthMismatch {
        left: usize,
        right: usize,
    },
    InsufficientSample {
        n: usize,
        required: usize,
    },
    /// An input vector was constant; rank correlation is undefined.
    ConstantInput,
    /// The regression target was constant in training data.
    ConstantTarget,
    /// Every feature column was constant (or undefined) in training data.
    AllColumnsConstant,
    EmptyMatrix,
    SchemaMismatch {
        expected: usize,
        got: usize,
    },
    /// Requested component count exceeds min(n_train - 1, retained columns).
    ComponentBound {
        k: usize,
        max: usize,
    },
    PowerIterationDiverged {
        iterations: usize,
    },
    MissingTarget {
        participant_id: String,
    },
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            StatsError::InsufficientSample { n, required } => {
                write!(f, "insufficient sample: {n} < {required}")
            }
            StatsError::ConstantInput => f.write_str("constant input vector"),
            StatsError::ConstantTarget => f.write_str("constant training target"),
            StatsError::AllColumnsConstant => f.write_str("all feature columns constant"),
            StatsError::EmptyMatrix => f.write_str("empty matrix"),
            StatsError::SchemaMismatch { expected, got } => {
                write!(
                    f,
                    "feature schema mismatch: expected {expected} columns, got {got}"
                )
            }
            StatsError::ComponentBound { k, max } => {
                write!(f, "component count {k} exceeds bound {max}")
            }
            StatsError::PowerIterationDiverged { iterations } => {
                write!(
                    f,
                    "power iteration did not converge in {iterations} iterations"
                )
            }
            StatsError::MissingTarget { participant_id } => {
                write!(f, "participant '{participant_id}' has no target label")
            }
        }
    }
}

impl core::error::Error for StatsError {}

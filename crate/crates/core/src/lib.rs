//! Gaussian network numerics: symplectic algebra, Gaussian states, genuine
//! Gaussian quantum correlation and its behaviour under two-mode networking
//! operations.

// `!(x >= y)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covariance;
pub mod classify;
pub mod error;
pub mod measure;
pub mod network;
pub mod search;
pub mod state;
pub mod symplectic;

pub use covariance::{validate_cm, CmViolation, CovarianceMatrix};
pub use error::{Error, Result};
pub use measure::{
    closed_form, enumerate_bipartitions, ggqc, ggqc_with, m_value, principal_det, Bipartition,
    BipartitionEntry, ClosedForm, GgqcOptions, GgqcReport,
};
pub use state::{GaussianState, StateKind};
pub use symplectic::{omega, GaussianUnitary, SymplecticMatrix};
pub use classify::{
    canonical_matrix, classify, classify_with, special_svd_2x2, verify_classification,
    CanonicalForm, ClassificationResult, ClassifyOptions,
};
pub use network::{
    apply_protocol, build_initial_state, chain_example, check_attainment, design_optimal,
    standardize_boundary, star_example, two_mode_squeezer, verify_network, DesignInput,
    DesignType, NetworkSpec, OpUnitary, Operation, NetworkReport, ThresholdRule,
};
pub use search::{random_search_max_ggqc, sweep_lambda, SearchConfig, SearchResult, SweepRow};

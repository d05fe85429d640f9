//! Box theta-norms and their spectral extensions.
//!
//! The crate evaluates the box theta-norm family (including the k-support
//! norm), its dual, and the proximity operator of its square in `O(d log d)`;
//! lifts them to orthogonally invariant matrix norms (spectral k-support,
//! spectral box and cluster norms); and drives an accelerated proximal
//! gradient solver for matrix completion and multitask learning.

pub mod error;
pub mod experiments;
pub mod norms;
pub mod oracle;
pub mod prox;
pub mod solver;
pub mod spectral;

pub use nalgebra::{DMatrix, DVector};

pub use error::{Error, ErrorKind, Result};
pub use norms::{
    dual_norm, ksupport_norm, norm, optimal_theta, s_alpha, solve_alpha, sort_abs, theta_dual_norm,
    theta_norm, BoxParams, KSupportParams, NormParams, SortedAbs, ThetaAssignment,
};
pub use oracle::{dual_norm_oracle, infconv_oracle};
pub use prox::{prox_sq, prox_sq_ksupport, prox_sq_ksupport_baseline, prox_sq_theta, ProxRequest};
pub use solver::{
    fista, loss_masked_sq, solve_centered, CompletionProblem, Regularizer, SolverConfig,
    SolverState,
};
pub use spectral::{
    centered_cluster_norm, centering, cluster_norm, numerical_rank, prox_spectral_elastic_net,
    prox_trace, spectral_ksupport_norm, spectral_norm, spectral_prox, spectral_theta_norm,
    ClusterParams, SpectralOperand,
};

//! Validity analytics for proxy scores.

mod correlation;
mod drift;
mod factor;
mod kappa;
pub mod linalg;
mod poolsim;

pub use correlation::{
    bonferroni, correlation_matrix, kendall_tau_b, kendall_tau_b_exact_p, spearman_rho,
    CorrelationMatrix, CorrelationMethod, CorrelationResult, PValueMethod,
};
pub use drift::{drift_analysis, DriftConfig, DriftSeries, DriftWindow};
pub use factor::{
    correlation_of, extract_and_rotate, extract_and_rotate_with, kaiser_count, parallel_analysis,
    random_eigenvalue_means, varimax, DataMatrix, FactorModel, Rotation, VarimaxConfig,
};
pub use kappa::{grouped_weighted_kappa, standard_deviation, weighted_kappa, KappaWeights};
pub use poolsim::{question_pool_simulation, PoolCurve, PoolData, PoolPoint};

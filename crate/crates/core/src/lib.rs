//! Augmented GARCH(p, q) simulation, condition checks, the sample quantile
//! and absolute centred moment estimators, their joint limit covariance and
//! Monte Carlo verification of the (functional) CLT.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod conditions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod innovations;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod rng;

pub use asymptotics::{
    assemble_gamma, estimate_density_at_quantile, estimate_tricov, iid_gamma, long_run_cov, GammaMatrix, TriCov,
};
pub use conditions::{
    check_exponential, check_moment, check_polynomial, check_positivity, Condition, ConditionReport, Method, Verdict,
};
pub use error::{Error, Result};
pub use estimators::{
    bahadur_residual, centred_abs_moment, moment_repr_residual, sample_quantile, signed_power_coeff, EstimatorResult,
};
pub use harness::{
    ned_decay, run_clt, run_fclt, ExperimentConfig, ExperimentReport, FcltTarget, Scaling, Tolerance, Tolerances,
};
pub use innovations::{innovation_moment, sample_innovations, InnovationDist, InnovationKind, Moment};
pub use model::{delta_dependent_path, simulate_path, Family, LambdaKind, ModelSpec, Path};
pub use oracle::{OracleConfig, Targets};

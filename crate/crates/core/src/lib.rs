//! Offline detection of changes in the drift of a Cox-Ingersoll-Ross
//! process `dX = (a − bX) dt + σ√X dW` observed (densely) on `[0, T]`.
//!
//! Pipeline: [`sampler`] draws exact paths, [`pathfun`] turns a path into
//! running integrals, [`estimator`] solves `Q_s θ = d_s`, [`testprocess`]
//! builds the normalized score trajectory, [`decision`] compares it with
//! Brownian-bridge boundary-crossing laws and [`changepoint`] locates the
//! change. [`harness`] wraps all of it in seeded Monte Carlo experiments.

pub mod changepoint;
pub mod decision;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod pathfun;
pub mod rng;
pub mod sampler;
pub mod testprocess;

pub use changepoint::{
    analyze, drift_phi, drift_psi, estimate_change_point, theta_tilde, ChangePointEstimate,
    Direction, ScenarioAnalytics,
};
pub use decision::{
    critical_value, one_sided_tail, run_test, two_sided_tail, Decision, Parameter, Side, TestSpec,
};
pub use error::{CsvError, Error, Result};
pub use estimator::{lse_at, lse_discrete, lse_full, ThetaHat};
pub use linalg::Sym2;
pub use model::{
    conditional_mean, conditional_second_moment, stationary_design, stationary_moment, CirParams,
    DesignMatrix, StationaryLaw,
};
pub use pathfun::{compute_functionals, estimate_sigma_sq, ito_integral, PathFunctionals, SigmaSq};
pub use rng::RandomSource;
pub use sampler::{
    euler_step, sample_transition, simulate_change_path, simulate_path, ChangePath, ChangeScenario,
    SamplePath, Start,
};
pub use testprocess::{raw_score, test_trajectory, Component, RawScore, TestTrajectory};

//! Learning by minimal-norm interpolation in the Banach space of functions
//! induced by a fixed-architecture ReLU network.
//!
//! A fixed architecture turns every parameter vector theta into a kernel
//! section k(., theta) = f_theta(.) xi(theta), where the decay weight xi
//! makes sections vanish as the parameter norm grows. Learning a function
//! from a finite dataset becomes: find anchors theta_1..theta_m whose Gram
//! matrix against the data is diagonal, solve for coefficients, certify
//! minimality through admissible sign vectors, and optionally trade exact
//! interpolation against the norm with a per-orthant regularization sweep.
//!
//! Modules follow that pipeline: [`network`] (forward pass and parameter
//! norm), [`kernel`] (the induced kernel and its bounds), [`supnorm`]
//! (sup-norm brackets over parameters), [`signs`] (admissible sign vectors),
//! [`solver`] (anchors, coefficients, norm brackets), [`regularizer`] (the
//! orthant sweep and selection), with [`config`], [`report`], [`pipeline`]
//! and [`mod@reference`] wiring them into a reproducible tool.

pub mod config;
pub mod error;
pub mod kernel;
pub mod network;
pub mod pipeline;
pub mod reference;
pub mod regularizer;
pub mod report;
pub mod signs;
pub mod solver;
pub mod supnorm;

pub use error::{ConfigError, RegError, ShapeError, SignsError, SolverError, SupNormError};
pub use kernel::{DecayWeight, KernelContext};
pub use network::{Activation, Architecture, ParamVector};
pub use signs::{AdmissibilityVerdict, SignOptions, SignVector};
pub use solver::{Dataset, KernelExpansion, MniSolution, SolutionStatus};
pub use supnorm::{Combination, EstimateStatus, SearchConfig, SupNormEstimate};

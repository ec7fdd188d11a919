//! Projected-diffusion recovery for linear inverse problems.
//!
//! Solves `y = A x̂` for `x̂` in a low-dimensional model set by iterating
//!
//! ```text
//! x_{n+1} = D_{σ_n}(x_n) − μ Aᵀ(A D_{σ_n}(x_n) − y)
//! ```
//!
//! where `D_σ` is the MMSE denoiser of a prior concentrated on the model set.
//! The crate provides exact denoisers for low-rank Gaussian mixtures and for
//! uniform priors on boxes, the sensing-side constants that control
//! convergence, noise schedules, the recovery engine and diagnostics.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! cover the common double-precision case.

pub mod convex;
pub mod denoise;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lrgmm;
pub mod model_sets;
pub mod recovery;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod sensing;
pub mod trace;

pub use convex::{box_denoiser, convex_gap_curve, mc_denoiser, mc_denoiser_parallel, truncated_normal_mean, McEstimate};
pub use denoise::{Denoiser, OracleProjection};
pub use diagnostics::{
    detect_burn_in, fit_convex_rate, fit_linear_rate, projection_gap, CheckRecord, LinearFit, ProjectionGap, RateFit,
};
pub use error::{Error, Result};
pub use io::{parse_model, read_model, write_model, ModelFile};
pub use linalg::Matrix;
pub use lrgmm::{DenoiserEval, LrGmmPrior};
pub use model_sets::{hard_threshold, project_box, project_subspace, project_union, BoxSet, Subspace, UnionOfSubspaces, UnionProjection};
pub use recovery::{gpgd_step, kadkhodaie_step, run_recovery, RecoveryOptions};
pub use rng::SeededRng;
pub use scalar::Real;
pub use schedule::{NoiseSchedule, ScheduleKind};
pub use sensing::{default_step_size, gaussian_operator, restricted_lipschitz_estimate, ric_union, spectral_norm, SensingProblem};
pub use trace::{RecoveryTrace, TraceHeader, TraceRow};

pub type Matrix64 = Matrix<f64>;
pub type Subspace64 = Subspace<f64>;
pub type Union64 = UnionOfSubspaces<f64>;
pub type Box64 = BoxSet<f64>;
pub type Prior64 = LrGmmPrior<f64>;
pub type Problem64 = SensingProblem<f64>;
pub type Schedule64 = NoiseSchedule<f64>;
pub type Trace64 = RecoveryTrace<f64>;

pub type Matrix32 = Matrix<f32>;
pub type Subspace32 = Subspace<f32>;
pub type Union32 = UnionOfSubspaces<f32>;
pub type Box32 = BoxSet<f32>;
pub type Prior32 = LrGmmPrior<f32>;
pub type Problem32 = SensingProblem<f32>;
pub type Schedule32 = NoiseSchedule<f32>;
pub type Trace32 = RecoveryTrace<f32>;

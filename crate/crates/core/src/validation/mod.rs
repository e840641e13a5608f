//! Independent numerical checks: direct ODE integration, measured jumps and
//! late-term fits.

mod fit;
mod jump;
mod ode;

pub use fit::{late_term_fit, CandidateResult, FitConfig, LateTermFit, LateTermModel};
pub use jump::{measure_jump, measure_jump_rays, Crossing, JumpConfig, JumpMeasurement};
pub use ode::{integrate_ode, truncated_series_data, ODESolutionSample, OdeConfig};

use crate::algebra::AlgebraError;
use crate::borel::BorelError;
use crate::perturbative::PerturbativeError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("step size underflow near {0}")]
    StepUnderflow(String),
    #[error("path touches a coefficient singularity at {0}")]
    OnSingularity(String),
    #[error("expected {expected} initial values, got {got}")]
    InitialData { expected: usize, got: usize },
    #[error("measured jump {measured:e} is below the noise floor {noise:e}")]
    NoiseFloor { measured: f64, noise: f64 },
    #[error("need at least {needed} coefficients, got {got}")]
    TooFewTerms { needed: usize, got: usize },
    #[error("coefficient {0} vanishes")]
    ZeroCoefficient(usize),
    #[error("no candidate model fits (best residual {best:e})")]
    NoModel { best: f64 },
    #[error(transparent)]
    Borel(#[from] BorelError),
    #[error(transparent)]
    Perturbative(#[from] PerturbativeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

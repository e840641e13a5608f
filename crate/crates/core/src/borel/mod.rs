//! Numerical continuation in the Borel plane.

mod detect;
mod laplace;
mod pade;

pub use detect::{
    detect_singularities, estimate_order, pole_rows, stable_singularities, BorelSingularity, PoleRow,
    SingularityKind, StabilityConfig,
};
pub use laplace::{coefficients_via_hankel, hankel_quadrature, laplace_sum, LaplaceConfig, RaySum};
pub use pade::{pade, pade_about_singularity, pade_robust, PadeApproximant, PadePole, POLE_CLUSTER_RADIUS};

use crate::algebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BorelError {
    #[error("Padé [{l}/{m}] system is singular (numerical rank {rank}); try a smaller M")]
    SingularPade { l: usize, m: usize, rank: usize },
    #[error("need {needed} germ coefficients, have {available}")]
    TooFewCoefficients { needed: usize, available: usize },
    #[error("integration ray hits a Borel singularity at {0}")]
    RayHitsSingularity(String),
    #[error("Laplace integral does not converge along this ray")]
    NonConvergentTail,
    #[error("no singularities given")]
    NoSingularities,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

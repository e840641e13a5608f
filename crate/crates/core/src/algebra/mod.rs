//! Exact and arbitrary-precision algebra underlying every other module.

mod bigcomplex;
mod gaussian;
mod poly;
mod ratfunc;

pub mod gamma;
pub mod linalg;
pub mod parse;
pub mod quad;
pub mod roots;
pub mod series;

pub use bigcomplex::{pow2_neg, real, BigComplex, DEFAULT_PRECISION};
pub use gaussian::GaussianRational;
pub use poly::Poly;
pub use ratfunc::{shift_coeffs, RatFunc};
pub use roots::poly_roots;
pub use series::{star_convolve, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("division by zero rational function")]
    DivisionByZero,
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("evaluation at a pole")]
    Pole,
    #[error("root iteration did not converge; raise the precision")]
    NoConvergence,
    #[error("series have different base points")]
    BaseMismatch,
    #[error("quadrature did not converge (last difference {0:e})")]
    QuadratureFailed(f64),
    #[error("singular linear system (rank {rank} of {size})")]
    Singular { rank: usize, size: usize },
}

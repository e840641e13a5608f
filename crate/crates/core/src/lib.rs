//! Borel-plane exponential asymptotics for singularly perturbed linear ODEs.

pub mod algebra;
pub mod borel;
pub mod perturbative;
pub mod singulant;
pub mod transseries;
pub mod validation;

/// Schema tag carried by every JSON artifact.
pub const SCHEMA: &str = "resurgo-v1";

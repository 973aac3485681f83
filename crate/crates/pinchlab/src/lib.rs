//! Discrete spectral geometry of closed surfaces immersed in R^3.
//!
//! The crate measures how sharply a closed surface saturates the Reilly
//! bound `lambda_1 <= n * ||H||_{2p}^2` (unit volume) and how close a nearly
//! saturating surface is to the round sphere of radius `sqrt(n/lambda_1)`:
//! eigenvalue defect, L^2 position-vector diagnostics, Hausdorff/annulus/
//! coverage distances, and the distortion of the radial sphere map.
//!
//! Pipeline: generate or load a mesh ([`mesh::Mesh`]), normalize it to unit
//! area with mass-weighted barycenter at the origin, assemble the cotangent
//! stiffness and lumped mass operators ([`operators`]), solve for the first
//! nonzero eigenvalue ([`spectral`]), then evaluate the pinching diagnostics
//! ([`pinching`]) and the sphere map ([`sphere_map`]).

pub mod distance;
pub mod fields;
pub mod generate;
pub mod io;
pub mod mesh;
pub mod operators;
pub mod pinching;
pub mod spectral;
pub mod sphere_map;

pub use fields::{ScalarField, VectorField};
pub use generate::GeneratorSpec;
pub use mesh::{Mesh, NormalizationRecord, ValidationResult};
pub use operators::SparseSymmetricOperator;
pub use pinching::{AnalyticConstants, PinchingConfig};
pub use spectral::SpectralPair;

/// Errors produced by mesh construction, IO, and the numeric pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate surface: {0}")]
    DegenerateSurface(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("surface not connected")]
    NotConnected,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

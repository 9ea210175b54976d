//! Phase-space simulation of continuous-variable Clifford circuits.
//!
//! States are Gaussian, stored as a mean vector and covariance matrix over the
//! interleaved quadratures `(q₁, p₁, q₂, p₂, …)` with `ħ = 1`. Gates are affine
//! symplectic maps, measurements are (possibly lossy) homodyne detections, and
//! circuits may feed measurement outcomes forward into later gate parameters.
//!
//! Every numeric type is generic over [`Real`]; the `*64` aliases below fix
//! the scalar to `f64`.

pub mod circuit;
pub mod dsl;
pub mod error;
pub mod gates;
pub mod measurement;
pub mod phase_space;
pub mod scalar;
pub mod tableau;

pub use circuit::{Circuit, GateKind, Instruction, Param};
pub use error::{Error, Result};
pub use gates::Gate;
pub use measurement::Quadrature;
pub use phase_space::{GaussianState, LocalOp, SymplecticAffine};
pub use scalar::Real;
pub use tableau::{GeneratorTableau, NullifierTableau};

pub type SymplecticAffine64 = SymplecticAffine<f64>;
pub type LocalOp64 = LocalOp<f64>;
pub type GaussianState64 = GaussianState<f64>;
pub type GeneratorTableau64 = GeneratorTableau<f64>;
pub type NullifierTableau64 = NullifierTableau<f64>;
pub type QuadraticHamiltonian64 = gates::QuadraticHamiltonian<f64>;
pub type MeasurementOutcome64 = measurement::MeasurementOutcome<f64>;
pub type RunResult64 = circuit::RunResult<f64>;
pub type AnalyticMoments64 = circuit::AnalyticMoments<f64>;

//! Nonequilibrium steady states of the dissipative quantum Rabi model family.

pub mod analysis;
pub mod bath;
pub mod engine;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod markov;
pub mod model;
pub mod observables;
pub mod redfield;
pub mod scalar;
pub mod signal;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Real scalar used by the dense operator algebra.
pub type Real = f64;
/// Complex scalar used by the dense operator algebra.
pub type Complex = faer::c64;
/// Dense square operator on the truncated spin⊗boson space.
pub type Operator = faer::Mat<Complex>;

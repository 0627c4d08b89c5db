//! Fractional non-homogeneous counting processes.
//!
//! The counting process N(t) with fractality parameters (μ, β) and rate λ has
//! probabilities built from a Kilbas–Saigo function evaluated at -λt^(μ+β).
//! The crate provides
//!
//! * [`specialfn`]: the Gamma-product coefficients K_n, the Kilbas–Saigo
//!   function with its derivatives and the Mittag-Leffler functions;
//! * [`counting`]: the probability mass function, generating functions,
//!   moments, interarrival law and compound process;
//! * [`combinatorics`]: Stirling numbers and their fractional generalisation;
//! * [`montecarlo`]: samplers and statistical cross-checks;
//! * [`verify`]: the self-verification suite behind `fracount verify`.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod combinatorics;
pub mod counting;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Fractality parameters in double precision.
pub type Params = specialfn::FractalityParams<f64>;
/// Series configuration in double precision.
pub type Config = specialfn::SeriesConfig<f64>;
/// Process specification in double precision.
pub type Spec = counting::ProcessSpec<f64>;

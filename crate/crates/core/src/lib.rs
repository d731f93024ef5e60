//! Scattering data, transfer matrices, critical energies and Lyapunov
//! exponents for one-dimensional continuum Bernoulli-Anderson models
//! `H = -d²/dx² + Σ q_n f(x − n)` with `q_n ∈ {0, 1}` i.i.d.

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criticality;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod furstenberg;
pub mod lyapunov;
pub mod matrix;
pub mod potential;
pub mod scattering;

pub use error::{Error, Result};
pub use exec::Exec;
pub use matrix::TransferMatrix;
pub use num_complex::Complex64;
pub use potential::{RawPotential, SingleSitePotential};
pub use scattering::{ScatteringData, SpectralPoint};

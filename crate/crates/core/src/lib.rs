//! Resonances, scattering determinants, spectral shift functions and wave
//! trace pairings for 3D Dirac operators `D0 + V` with smooth, compactly
//! supported Hermitian matrix potentials.
//!
//! The pipeline discretises the Birman–Schwinger operator `K = V R0(lambda) chi`
//! by a corrected Nyström rule, locates zeros of `det(I + K)` on both sheets
//! of `kappa = sqrt(lambda^2 - 1)`, builds the scattering matrix from the
//! far-field operator and cross-checks everything against a partial-wave
//! solver for radial potentials.

pub mod cache;
pub mod dirac;
pub mod error;
pub mod hash;
pub mod linalg;
pub mod nystrom;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod radial;
pub mod resolvent;
pub mod scattering;
pub mod search;
pub mod singular;
pub mod spectral;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

//! Half-line Schrödinger scattering: direct solver, Marchenko-type kernels,
//! Stieltjes/Volterra transforms, positive-definiteness checks and
//! phase-shift reconstructions.

pub mod bochner;
pub mod error;
pub mod grid;
pub mod io;
pub mod marchenko;
pub mod ode;
pub mod phase_shift;
pub mod potential;
pub mod quadrature;
pub mod schrodinger;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};

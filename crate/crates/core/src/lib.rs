//! Microscopic random-walk models reconstructed from macroscopic heat PDEs.
//!
//! The pipeline is: pick a discretization ([`stencil`], [`models`], or a
//! `.scheme` file via [`dsl`]), assemble it into a [`stencil::Stencil`] with
//! exact [`laurent::LaurentPoly`] coefficients, and [`reduction::reduce`] it
//! to a random-walk form by solving for the step sizes. The emitted walk can
//! then be iterated and checked with [`simulate`]; [`oscillator`] covers the
//! analogous reduction of the wave equation to a mass-spring chain.

// Errors carry exact polynomials for diagnostics; they are cold paths.
#![allow(clippy::result_large_err)]

pub mod cli;
pub mod dsl;
pub mod golden;
pub mod laurent;
pub mod models;
pub mod oscillator;
pub mod rational;
pub mod reduction;
pub mod simulate;
pub mod stencil;

pub use laurent::{LaurentPoly, SymbolId};
pub use models::{ModelId, ModelParams};
pub use reduction::{reduce, RandomWalkForm, ReductionReport};
pub use stencil::{assemble, Stencil};

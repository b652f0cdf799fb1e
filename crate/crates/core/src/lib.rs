//! Numerical tools for holomorphic automorphisms of ℂⁿ built from shears and overshears.

pub mod calculus;
pub mod carleman;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod flows;
pub mod jet;
mod linalg;
pub mod ode;
pub mod pipeline;
pub mod polyalg;
pub mod shears;

pub use error::{Error, Result};

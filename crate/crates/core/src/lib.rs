//! Pseudospectral laboratory for the Darcy-law electroconvection
//! equation ∂t ρ + u·∇ρ + Λ^α ρ = 0 with u = −P(ρRρ) on the 2D torus.
//!
//! The crate provides the spectral kernels, the constitutive chain
//! (potential → field → force → velocity → pressure), Littlewood-Paley
//! block machinery with Besov norms, a dealiased time stepper, the
//! Picard/Duhamel mild-solution iteration, and a diagnostics suite that
//! measures decay laws, maximum principles and contraction behavior.

pub mod app;
pub mod config;
pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod io;
pub mod littlewood_paley;
pub mod mild;
pub mod operators;
pub mod report;
pub mod selftest;
pub mod trajectory;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use field::{forward_transform, inverse_transform, PhysicalField, SpectralField, VectorField};
pub use grid::Grid;
pub use trajectory::Trajectory;

//! Periodic homogenization of planar linear elasticity.
//!
//! The crate computes effective stiffness/compliance tensors of perforated
//! (and multi-phase) periodicity cells by solving finite element cell
//! problems, extracts the purely geometric modulus matrix `D` that is
//! independent of the local isotropic moduli, and provides numerical checks
//! of the underlying invariance properties (moduli-independence of `D`,
//! stress invariance under compliance shifts, average-stress line
//! identities).

pub mod config;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod homog;
pub mod mesh;
pub mod output;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};

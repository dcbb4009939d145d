//! Numerical models of b^m-symplectic collar and circle-glued manifolds with
//! Hamiltonian torus actions: singular moment maps and their Laurent data,
//! smooth desingularization profiles, sampled moment images with convex-hull
//! product/fold verification, and a two-dimensional normal-form flow.
//!
//! The `bm-moment` binary drives everything through JSON scenarios; see the
//! [`scenario`] module for the schema and the bundled scenario corpus.

pub mod collar;
pub mod desing;
pub mod error;
pub mod hamiltonian;
pub mod moment_image;
pub mod moser;
pub mod numerics;
pub mod scenario;

pub use error::{Error, Result};

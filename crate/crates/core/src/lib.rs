//! Globally divergence-free, entropy-stable nodal discontinuous Galerkin solver
//! for the two-dimensional ideal MHD equations on uniform Cartesian meshes.
//!
//! The magnetic field is carried twice: as nodal values inside each cell and as
//! Legendre modes of the normal component on every cell edge. The edge modes are
//! evolved with a multidimensional HLL electric field at vertices, and the cell
//! interior field is rebuilt each stage by a constrained least-squares
//! reconstruction that is exactly divergence-free.

#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod dg_core;
pub mod error;
pub mod flux;
pub mod grid;
pub mod induction;
pub mod integrate;
pub mod io;
pub mod limiter;
pub mod operators;
pub mod problems;
pub mod reconstruct;
pub mod reference;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use state::{ConsState, Primitive};

//! Numerical weak KAM toolkit for convex Hamiltonians on the flat torus.
//!
//! Action kernels `h^t` are dense min-plus matrices built from a sampled
//! Lagrangian; the Lax–Oleinik semigroup, critical values, Peierls
//! barriers, Aubry sets and commutation residuals are all computed from
//! them.

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutation;
pub mod config;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod io;
pub mod lax_oleinik;
pub mod legendre;
pub mod minplus;
pub mod pipeline;
pub mod weak_kam;

pub use error::{Error, Result};
pub use grid::{Point, ScalarField, TorusGrid};
pub use hamiltonian::HamiltonianSpec;
pub use minplus::{ActionKernel, MinPlusMatrix};
pub use pipeline::{Pipeline, Resolution};

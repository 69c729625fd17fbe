//! Galerkin P1 finite elements for the degenerate parabolic equation
//! `rho_t - div(K(|grad rho|) grad rho) = f` arising from generalized
//! Forchheimer flow of slightly compressible fluids.
//!
//! The crate is organized bottom-up:
//!
//! * [`forchheimer`]: the scalar kernel `g`, `K`, `K'`, `H` and derived exponents.
//! * [`mesh`]: structured triangulations of the unit square.
//! * [`sparse`]: compressed-sparse-row storage shared by assembly and solvers.
//! * [`fem`]: mass, stiffness, Jacobian and load assembly, L2 projection,
//!   Dirichlet elimination and the fully discrete residual.
//! * [`solver`]: conjugate gradients and the backward Euler time loop.
//! * [`problems`]: manufactured solutions and config-driven problems.
//! * [`analysis`]: error norms, convergence tables and energy diagnostics.
//! * [`config`]: the flat `key = value` run configuration format.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
mod error;
pub mod fem;
pub mod forchheimer;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};

pub use analysis::{ConvergenceRow, ErrorSet};
pub use fem::ScalarField;
pub use forchheimer::{Exponents, GPolynomial};
pub use mesh::{ElementGeometry, Mesh};
pub use problems::Problem;
pub use solver::{Scheme, TimeSteppingConfig, Trajectory};
pub use sparse::SparseMatrix;

/// A point of the unit square.
pub type Point = [f64; 2];

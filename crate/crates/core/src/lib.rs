//! Lattice reaction-diffusion toolkit.
//!
//! Solvers for a pollutant/calcite system on the half-line lattice with a
//! stochastic Dirichlet boundary, plus the discrete heat kernel, Besov-norm
//! diagnostics and a Feynman-Kac Monte Carlo oracle used to cross-check them.

pub mod besov;
pub mod boundary;
pub mod config;
pub mod convergence;
pub mod error;
pub mod feynman_kac;
pub mod heat_kernel;
pub mod interp;
pub mod lattice;
pub mod output;
pub mod seed;
pub mod solver;

pub use error::{Error, Result};
pub use lattice::{Lattice, LatticeField, LineField, TruncationPolicy};

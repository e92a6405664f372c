//! Numerical toolkit for planar complex structures.
//!
//! The crate converts between metrics, almost complex structures and
//! Beltrami coefficients, solves the Beltrami equation `f_zbar = mu f_z`
//! with a Neumann iteration built on discrete Cauchy-Green and Beurling
//! transforms, approximates parameter families of fiber-wise holomorphic
//! functions, and builds directed holomorphic curves (null curves and
//! conformal minimal immersions) with period control.
//!
//! Everything lives on a uniform square lattice; see [`grid::ComplexGrid`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beltrami;
pub mod directed;
pub mod error;
pub mod families;
pub mod grid;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod structures;
pub mod topology;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{ComplexGrid, Grid, HolderParams, Lattice, RealGrid};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = num_complex::Complex64;

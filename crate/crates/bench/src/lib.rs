//! Shared inputs for the benchmarks.

use confam::structures::BeltramiField;
use confam::{Complex64, ComplexGrid, Lattice};

/// Square lattice of `n` nodes per side on `[-2, 2]^2`.
pub fn lattice(n: usize) -> Lattice {
    Lattice::centered_square(2.0, n).expect("valid lattice")
}

/// Smooth compactly decaying density.
pub fn bump(lat: Lattice) -> ComplexGrid {
    ComplexGrid::from_fn(lat, |z| Complex64::new(1.0, 0.5) * (-6.0 * z.norm_sqr()).exp())
}

/// Gaussian Beltrami coefficient with amplitude `a`.
pub fn gaussian_mu(lat: Lattice, a: f64) -> BeltramiField {
    BeltramiField::new(ComplexGrid::from_fn(lat, |z| Complex64::new(a, 0.0) * (-8.0 * z.norm_sqr()).exp()))
        .expect("|mu| < 1")
}

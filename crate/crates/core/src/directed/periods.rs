//! Closed lattice polylines and trapezoid-rule period integrals.

use nalgebra::DMatrix;

use crate::grid::{ComplexGrid, Lattice};
use crate::topology::{bounded_complement_components, square_loop_around};
use crate::{Error, Result, C64};

/// Closed polyline of 4-adjacent lattice nodes; its orientation is the node order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyCycle {
    nodes: Vec<usize>,
}

impl HomologyCycle {
    pub fn new(lat: &Lattice, mask: &[bool], nodes: Vec<usize>) -> Result<Self> {
        if nodes.len() < 3 || nodes.first() != nodes.last() {
            return Err(Error::Topology("cycle must have at least two edges and end where it starts".into()));
        }
        for w in nodes.windows(2) {
            if w[0] >= lat.len() || w[1] >= lat.len() {
                return Err(Error::Topology(format!("cycle node outside the lattice ({} nodes)", lat.len())));
            }
            let (a, b) = (lat.row_col(w[0]), lat.row_col(w[1]));
            if a.0.abs_diff(b.0) + a.1.abs_diff(b.1) != 1 {
                return Err(Error::Topology(format!("cycle nodes {} and {} are not adjacent", w[0], w[1])));
            }
        }
        if let Some(&k) = nodes.iter().find(|&&k| !mask[k]) {
            return Err(Error::Topology(format!("cycle touches masked-out node {k}")));
        }
        Ok(HomologyCycle { nodes })
    }

    /// Counter-clockwise boundary of the square of `half` cells around the
    /// node nearest `center` (`8 half` edges).
    pub fn square(lat: &Lattice, mask: &[bool], center: C64, half: usize) -> Result<Self> {
        let (r, c) = lat.nearest(center).ok_or_else(|| Error::Topology(format!("{center} lies outside the lattice")))?;
        if half == 0 || r < half || c < half || r + half >= lat.ny || c + half >= lat.nx {
            return Err(Error::Topology("square cycle does not fit in the lattice".into()));
        }
        let (a, b, l, rt) = (r - half, r + half, c - half, c + half);
        let mut nodes = Vec::with_capacity(8 * half + 1);
        nodes.extend((l..rt).map(|col| lat.index(a, col)));
        nodes.extend((a..b).map(|row| lat.index(row, rt)));
        nodes.extend((l + 1..=rt).rev().map(|col| lat.index(b, col)));
        nodes.extend((a + 1..=b).rev().map(|row| lat.index(row, l)));
        nodes.push(nodes[0]);
        HomologyCycle::new(lat, mask, nodes)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn reversed(&self) -> Self {
        HomologyCycle { nodes: self.nodes.iter().rev().copied().collect() }
    }

    /// `self` followed by `other`; both must start at the same node.
    pub fn concat(&self, other: &HomologyCycle) -> Result<Self> {
        if self.nodes[0] != other.nodes[0] {
            return Err(Error::Topology("cycles must share their first node to be concatenated".into()));
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        Ok(HomologyCycle { nodes })
    }
}

/// One counter-clockwise square cycle around each bounded component of the
/// complement of `mask`.
pub fn auto_cycles(lat: &Lattice, mask: &[bool]) -> Result<Vec<HomologyCycle>> {
    bounded_complement_components(lat, mask)
        .iter()
        .map(|hole| {
            let nodes = square_loop_around(lat, mask, hole)
                .ok_or_else(|| Error::Topology("no square loop around a hole fits in the mask".into()))?;
            HomologyCycle::new(lat, mask, nodes)
        })
        .collect()
}

/// Trapezoid rule for `∮ g dz` with `g` given at the cycle nodes.
fn trapezoid(lat: &Lattice, nodes: &[usize], g: impl Fn(usize) -> C64) -> C64 {
    nodes
        .windows(2)
        .map(|w| (lat.node_at(w[1]) - lat.node_at(w[0])) * 0.5 * (g(w[0]) + g(w[1])))
        .sum()
}

/// Periods `∮_{C_j} f_i θ dz` as an `m x n` matrix (row per cycle).
pub fn period_map(f: &[ComplexGrid], theta: &ComplexGrid, cycles: &[HomologyCycle]) -> Result<DMatrix<C64>> {
    if f.is_empty() {
        return Err(Error::Dimension("period map needs at least one component".into()));
    }
    let lat = *f[0].lattice();
    for g in f {
        lat.check_compatible(g.lattice())?;
    }
    lat.check_compatible(theta.lattice())?;
    let mut out = DMatrix::zeros(cycles.len(), f.len());
    for (j, cycle) in cycles.iter().enumerate() {
        if let Some(&k) = cycle.nodes().iter().find(|&&k| k >= lat.len() || !f[0].mask()[k]) {
            return Err(Error::Topology(format!("cycle {j} touches masked-out node {k}")));
        }
        for (i, g) in f.iter().enumerate() {
            let (gs, ts) = (g.samples(), theta.samples());
            out[(j, i)] = trapezoid(&lat, cycle.nodes(), |k| gs[k] * ts[k]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_has_zero_period_and_inverse_has_residue() {
        let lat = Lattice::centered_square(2.0, 129).unwrap();
        let mask = vec![true; lat.len()];
        let cycle = HomologyCycle::square(&lat, &mask, C64::new(0.0, 0.0), 32).unwrap();
        let one = ComplexGrid::coordinate(lat).map(|_| C64::new(1.0, 0.0));
        let c = ComplexGrid::filled(lat, C64::new(2.0, -3.0));
        let p = period_map(&[c], &one, std::slice::from_ref(&cycle)).unwrap();
        assert!(p[(0, 0)].norm() < 1e-13);
        let inv = ComplexGrid::coordinate(lat).map(|z| if z.norm() > 0.0 { 1.0 / z } else { C64::new(0.0, 0.0) });
        let p = period_map(&[inv], &one, &[cycle.clone(), cycle.reversed()]).unwrap();
        assert!((p[(0, 0)] - C64::new(0.0, 2.0 * PI)).norm() < 1e-3);
        assert!((p[(0, 0)] + p[(1, 0)]).norm() < 1e-13);
    }

    #[test]
    fn rejects_broken_cycles() {
        let lat = Lattice::centered_square(1.0, 9).unwrap();
        let mut mask = vec![true; lat.len()];
        assert!(HomologyCycle::new(&lat, &mask, vec![0, 1, 2]).is_err());
        assert!(HomologyCycle::new(&lat, &mask, vec![0, 2, 0]).is_err());
        mask[1] = false;
        assert!(matches!(HomologyCycle::new(&lat, &mask, vec![0, 1, 0]), Err(Error::Topology(_))));
    }
}

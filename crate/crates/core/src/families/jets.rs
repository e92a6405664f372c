//! Jets at finitely many points and Hermite interpolation corrections.

use nalgebra::{DMatrix, DVector};

use super::poly::Polynomial;
use crate::beltrami::FixedPointSet;
use crate::grid::ComplexGrid;
use crate::interp::Bicubic;
use crate::linalg::{min_norm_solve, singular_values};
use crate::{Error, Result, C64};

/// Half-width (in cells) of the node stencil used to estimate jets.
pub const DEFAULT_JET_STENCIL: usize = 2;

/// Largest condition number accepted for a Hermite system.
pub const HERMITE_CONDITION_LIMIT: f64 = 1e12;

/// Points at which a difference must vanish to order `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetSpec {
    pub points: FixedPointSet,
    pub order: usize,
}

impl JetSpec {
    pub fn new(points: FixedPointSet, order: usize) -> Self {
        JetSpec { points, order }
    }

    /// `m (r + 1)`, the number of interpolation conditions.
    pub fn dimension(&self) -> usize {
        self.points.len() * (self.order + 1)
    }
}

fn falling(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}

/// Derivatives `d^k f / dw^k`, `k = 0..=order`, at each jet point, where
/// `w` is `coordinate` (the lattice coordinate `z` when `None`) and `f` is
/// holomorphic in `w` near the points.
///
/// Each jet comes from a least-squares polynomial in `w` over the
/// `(2s+1)^2` mask nodes around the node nearest the point,
/// `s = DEFAULT_JET_STENCIL`.
pub fn jets_at(f: &ComplexGrid, jets: &JetSpec, coordinate: Option<&ComplexGrid>) -> Result<Vec<Vec<C64>>> {
    let lat = *f.lattice();
    let identity;
    let w = match coordinate {
        Some(c) => {
            lat.check_compatible(c.lattice())?;
            c
        }
        None => {
            identity = ComplexGrid::coordinate(lat);
            &identity
        }
    };
    let s = DEFAULT_JET_STENCIL as isize;
    let fit_degree = (jets.order + 4).min(((2 * s + 1) * (2 * s + 1)) as usize / 2);
    let interp = Bicubic::new(w);
    let mut out = Vec::with_capacity(jets.points.len());
    for a in jets.points.points() {
        let (r, c) = lat
            .nearest(*a)
            .ok_or_else(|| Error::Domain(format!("jet point {a} lies outside the lattice")))?;
        let mut rows = Vec::new();
        for dr in -s..=s {
            for dc in -s..=s {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                let inside = rr >= 0 && cc >= 0 && (rr as usize) < lat.ny && (cc as usize) < lat.nx;
                let k = if inside { Some(lat.index(rr as usize, cc as usize)) } else { None };
                match k {
                    Some(k) if f.mask()[k] => rows.push(k),
                    _ => return Err(Error::Domain(format!("jet point {a} is not {s} cells inside the mask"))),
                }
            }
        }
        let wa = interp
            .eval(*a)
            .ok_or_else(|| Error::Domain(format!("jet point {a} lies outside the lattice")))?;
        let scale = rows.iter().map(|&k| (w.samples()[k] - wa).norm()).fold(0.0, f64::max);
        let mut m = DMatrix::<C64>::zeros(rows.len(), fit_degree + 1);
        for (i, &k) in rows.iter().enumerate() {
            let u = (w.samples()[k] - wa) / scale;
            let mut p = C64::new(1.0, 0.0);
            for j in 0..=fit_degree {
                m[(i, j)] = p;
                p *= u;
            }
        }
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|&k| f.samples()[k]));
        let ls = min_norm_solve(m, &b, 1e-14);
        let poly = Polynomial { center: wa, scale, coeffs: ls.x.iter().copied().collect() };
        // Derivatives at the centre: k! c_k / scale^k.
        out.push(
            (0..=jets.order)
                .map(|k| poly.coeffs.get(k).copied().unwrap_or_default() * falling(k, k) / scale.powi(k as i32))
                .collect(),
        );
    }
    Ok(out)
}

/// The polynomial of degree `< m (r + 1)` whose derivatives up to order `r`
/// at `nodes[j]` equal `jets[j]`.
///
/// Fails with [`Error::Conditioning`] when the confluent Vandermonde system,
/// in the variable `(w - center) / max(1, spread)`, has condition number
/// above [`HERMITE_CONDITION_LIMIT`].
pub fn hermite_polynomial(nodes: &[C64], jets: &[Vec<C64>]) -> Result<Polynomial> {
    let r1 = jets.first().map_or(0, |j| j.len());
    let n = nodes.len() * r1;
    if n == 0 {
        return Ok(Polynomial::zero());
    }
    let center = nodes.iter().sum::<C64>() / nodes.len() as f64;
    // Unit floor on the scale: clustered points stay ill-conditioned.
    let scale = nodes.iter().map(|z| (z - center).norm()).fold(1.0, f64::max);
    let mut a = DMatrix::<C64>::zeros(n, n);
    let mut b = DVector::<C64>::zeros(n);
    for (j, (z, jet)) in nodes.iter().zip(jets).enumerate() {
        let u = (z - center) / scale;
        for k in 0..r1 {
            let row = j * r1 + k;
            b[row] = jet[k] * scale.powi(k as i32);
            for i in k..n {
                a[(row, i)] = u.powu((i - k) as u32) * falling(i, k);
            }
        }
    }
    let sv = singular_values(a.clone());
    let cond = sv[0] / sv[n - 1];
    if !(cond <= HERMITE_CONDITION_LIMIT) {
        return Err(Error::Conditioning(format!("Hermite system condition number {cond:e}")));
    }
    let ls = min_norm_solve(a, &b, 0.0);
    Ok(Polynomial { center, scale, coeffs: ls.x.iter().copied().collect() })
}

/// `F - q(w)`, where `q` is the Hermite polynomial matching the jets of
/// `F - f` in the coordinate `w` (`z` when `coordinate` is `None`).
/// The result differs from `f` by a function vanishing to order `r` at every
/// jet point.
pub fn jet_interpolation_correction(
    big_f: &ComplexGrid,
    f: &ComplexGrid,
    jets: &JetSpec,
    coordinate: Option<&ComplexGrid>,
) -> Result<ComplexGrid> {
    Ok(jet_correction_polynomial(big_f, f, jets, coordinate)?.1)
}

pub(crate) fn jet_correction_polynomial(
    big_f: &ComplexGrid,
    f: &ComplexGrid,
    jets: &JetSpec,
    coordinate: Option<&ComplexGrid>,
) -> Result<(Polynomial, ComplexGrid)> {
    big_f.lattice().check_compatible(f.lattice())?;
    if jets.points.is_empty() {
        return Ok((Polynomial::zero(), big_f.clone()));
    }
    let lat = *f.lattice();
    let diff = big_f.zip_map(f, |a, b| a - b)?;
    let values = jets_at(&diff, jets, coordinate)?;
    let nodes: Vec<C64> = match coordinate {
        Some(w) => {
            let interp = Bicubic::new(w);
            jets.points.points().iter().map(|a| interp.eval(*a).unwrap_or(*a)).collect()
        }
        None => jets.points.points().to_vec(),
    };
    let q = hermite_polynomial(&nodes, &values)?;
    let out = (0..lat.len())
        .map(|k| {
            let w = coordinate.map_or(lat.node_at(k), |c| c.samples()[k]);
            big_f.samples()[k] - q.eval(w)
        })
        .collect();
    Ok((q, big_f.with_samples(out)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    fn spec(points: Vec<C64>, order: usize) -> JetSpec {
        JetSpec::new(FixedPointSet::new(points).unwrap(), order)
    }

    #[test]
    fn constant_correction_and_zero_jets() {
        let lat = Lattice::centered_square(1.0, 41).unwrap();
        let f = ComplexGrid::from_fn(lat, |z| z * z);
        let big = f.map(|v| v + C64::new(0.01, 0.0));
        let jets = spec(vec![C64::new(0.0, 0.0)], 0);
        let out = jet_interpolation_correction(&big, &f, &jets, None).unwrap();
        for k in 0..lat.len() {
            assert!((out.samples()[k] - f.samples()[k]).norm() < 1e-14);
        }
        let same = jet_interpolation_correction(&f, &f, &jets, None).unwrap();
        assert_eq!(same.samples(), f.samples());
    }

    #[test]
    fn hermite_matches_jets() {
        let nodes = [C64::new(-0.5, 0.1), C64::new(0.4, 0.2)];
        let jets = vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)], vec![C64::new(-1.0, 1.0), C64::new(3.0, 0.0)]];
        let q = hermite_polynomial(&nodes, &jets).unwrap();
        let dq = q.derivative();
        for (z, jet) in nodes.iter().zip(&jets) {
            assert!((q.eval(*z) - jet[0]).norm() < 1e-13);
            assert!((dq.eval(*z) - jet[1]).norm() < 1e-13);
        }
        let close = [C64::new(0.0, 0.0), C64::new(1e-9, 0.0)];
        assert!(matches!(hermite_polynomial(&close, &jets), Err(Error::Conditioning(_))));
    }

    #[test]
    fn jets_of_polynomial_are_exact() {
        let lat = Lattice::centered_square(1.0, 41).unwrap();
        let f = ComplexGrid::from_fn(lat, |z| z * z * z - z);
        let a = C64::new(0.3, -0.2);
        let j = jets_at(&f, &spec(vec![a], 2), None).unwrap();
        assert!((j[0][0] - (a * a * a - a)).norm() < 1e-12);
        assert!((j[0][1] - (3.0 * a * a - 1.0)).norm() < 1e-10);
        assert!((j[0][2] - 6.0 * a).norm() < 1e-8);
    }
}

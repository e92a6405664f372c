//! Least-squares polynomial approximation on lattice compacts.

use nalgebra::{DMatrix, DVector};

use crate::grid::ComplexGrid;
use crate::linalg::min_norm_solve;
use crate::topology::{dilate, is_runge};
use crate::{Error, Result, C64};

/// Relative singular-value floor below which a fit degree is reduced.
pub const FIT_RCOND: f64 = 1e-13;

/// Lattice cells by which `K` is grown before fitting.
pub const DEFAULT_FIT_DILATION: f64 = 2.0;

/// `sum_k coeffs[k] * ((z - center) / scale)^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub center: C64,
    pub scale: f64,
    pub coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { center: C64::new(0.0, 0.0), scale: 1.0, coeffs: vec![C64::new(0.0, 0.0)] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let u = (z - self.center) / self.scale;
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * u + c)
    }

    /// `d/dz` of the polynomial.
    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial { coeffs: vec![C64::new(0.0, 0.0)], ..self.clone() };
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c * ((k + 1) as f64 / self.scale))
            .collect();
        Polynomial { center: self.center, scale: self.scale, coeffs }
    }

    /// Coefficients `a_k` with `p(z) = sum_k a_k z^k`.
    pub fn monomial_coefficients(&self) -> Vec<C64> {
        let n = self.coeffs.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        // ((z - c)/s)^k expanded by the binomial theorem.
        for (k, ck) in self.coeffs.iter().enumerate() {
            let lead = ck / self.scale.powi(k as i32);
            let mut binom = 1.0;
            for i in 0..=k {
                out[i] += lead * binom * (-self.center).powu((k - i) as u32);
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
        }
        out
    }
}

/// A fitted polynomial and its sup error on the target set.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFit {
    pub poly: Polynomial,
    /// Degree of the returned polynomial.
    pub degree_used: usize,
    /// True if some degree had to be dropped because its least-squares
    /// system was rank deficient.
    pub reduced: bool,
    pub sup_error: f64,
}

fn fit_degree(points: &[C64], values: &[C64], center: C64, scale: f64, degree: usize) -> Option<Polynomial> {
    let n = degree + 1;
    let mut a = DMatrix::<C64>::zeros(points.len(), n);
    for (r, z) in points.iter().enumerate() {
        let u = (z - center) / scale;
        let mut p = C64::new(1.0, 0.0);
        for c in 0..n {
            a[(r, c)] = p;
            p *= u;
        }
    }
    let b = DVector::from_column_slice(values);
    let ls = min_norm_solve(a, &b, FIT_RCOND);
    if ls.rank < n {
        return None;
    }
    Some(Polynomial { center, scale, coeffs: ls.x.iter().copied().collect() })
}

/// Fits polynomials of every degree `0..=degree` to `values` at `points` and
/// returns the one with the smallest sup error over the `check` entries,
/// where the error at entry `i` is `|p(check_points[i]) - check_values[i]|`.
///
/// A higher degree replaces a lower one only if it improves the error by
/// more than round-off. Degrees whose system is rank deficient are skipped
/// and flagged; the returned error is nonincreasing in `degree`.
pub fn fit_polynomial(
    points: &[C64],
    values: &[C64],
    check_points: &[C64],
    check_values: &[C64],
    degree: usize,
) -> Result<PolyFit> {
    if points.is_empty() || points.len() != values.len() || check_points.len() != check_values.len() {
        return Err(Error::Dimension("fit needs matching, nonempty point and value lists".into()));
    }
    let center = points.iter().sum::<C64>() / points.len() as f64;
    let scale = points.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let noise = 1e-14 * values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut best: Option<PolyFit> = None;
    let mut reduced = false;
    for d in 0..=degree.min(points.len() - 1) {
        let Some(poly) = fit_degree(points, values, center, scale, d) else {
            reduced = true;
            continue;
        };
        let err = check_points
            .iter()
            .zip(check_values)
            .map(|(z, v)| (poly.eval(*z) - v).norm())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| err < b.sup_error - noise) {
            best = Some(PolyFit { poly, degree_used: d, reduced: false, sup_error: err });
        }
    }
    if degree >= points.len() {
        reduced = true;
    }
    let mut fit = best.ok_or_else(|| Error::Conditioning("no polynomial degree gives a full-rank fit".into()))?;
    fit.reduced = reduced;
    Ok(fit)
}

/// Polynomial approximation of `f` on the mask `k`.
///
/// `k` must pass the flood-fill Runge test. The fit uses the nodes of `k`
/// grown by [`DEFAULT_FIT_DILATION`] cells (within the mask of `f`), and the
/// error is measured on the nodes of `k`.
pub fn local_runge_approximate(f: &ComplexGrid, k: &[bool], degree: usize) -> Result<PolyFit> {
    let lat = *f.lattice();
    if k.len() != lat.len() {
        return Err(Error::Dimension(format!("K mask has {} entries, lattice {}", k.len(), lat.len())));
    }
    if !k.iter().any(|&x| x) {
        return Err(Error::Domain("K is empty".into()));
    }
    if !is_runge(&lat, k) {
        return Err(Error::Topology("complement of K has a bounded component".into()));
    }
    let grown = dilate(&lat, k, DEFAULT_FIT_DILATION);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for i in 0..lat.len() {
        if grown[i] && (f.mask()[i] || k[i]) {
            let v = f.samples()[i];
            if !(v.re.is_finite() && v.im.is_finite()) {
                let (row, col) = lat.row_col(i);
                return Err(Error::NonFinite { row, col, z: lat.node_at(i) });
            }
            points.push(lat.node_at(i));
            values.push(v);
        }
    }
    let (kp, kv): (Vec<C64>, Vec<C64>) = (0..lat.len())
        .filter(|&i| k[i])
        .map(|i| (lat.node_at(i), f.samples()[i]))
        .unzip();
    fit_polynomial(&points, &values, &kp, &kv, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    fn disc(lat: &Lattice, r: f64) -> Vec<bool> {
        (0..lat.len()).map(|i| lat.node_at(i).norm() <= r).collect()
    }

    #[test]
    fn reproduces_cube_and_constant() {
        let lat = Lattice::centered_square(1.5, 41).unwrap();
        let k = disc(&lat, 1.0);
        let fit = local_runge_approximate(&ComplexGrid::from_fn(lat, |z| z * z * z), &k, 5).unwrap();
        assert!(fit.sup_error <= 1e-12);
        let m = fit.poly.monomial_coefficients();
        for (i, c) in m.iter().enumerate() {
            let want = if i == 3 { 1.0 } else { 0.0 };
            assert!((c - C64::new(want, 0.0)).norm() < 1e-12, "{i} {c}");
        }
        let c = C64::new(0.3, -2.0);
        let fit = local_runge_approximate(&ComplexGrid::filled(lat, c), &k, 4).unwrap();
        assert_eq!(fit.degree_used, 0);
        assert!(fit.sup_error < 1e-14);
    }

    #[test]
    fn annulus_is_rejected() {
        let lat = Lattice::centered_square(1.5, 41).unwrap();
        let k: Vec<bool> = (0..lat.len()).map(|i| (0.3..=1.0).contains(&lat.node_at(i).norm())).collect();
        let f = ComplexGrid::coordinate(lat);
        assert!(matches!(local_runge_approximate(&f, &k, 3), Err(Error::Topology(_))));
    }

    #[test]
    fn derivative_and_shifted_expansion() {
        let p = Polynomial { center: C64::new(1.0, 1.0), scale: 2.0, coeffs: vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(3.0, 0.0)] };
        let z = C64::new(0.2, -0.7);
        let m = p.monomial_coefficients();
        let direct = m[0] + m[1] * z + m[2] * z * z;
        assert!((direct - p.eval(z)).norm() < 1e-13);
        let d = p.derivative().eval(z);
        assert!((d - (m[1] + 2.0 * m[2] * z)).norm() < 1e-13);
    }
}

//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Solution and singular values of a least-squares problem.
#[derive(Clone, Debug)]
pub struct LeastSquares<T: ComplexField<RealField = f64>> {
    pub x: DVector<T>,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Number of singular values kept.
    pub rank: usize,
}

impl<T: ComplexField<RealField = f64>> LeastSquares<T> {
    /// `sigma_max / sigma_min` over all singular values (infinite if one is 0).
    pub fn condition(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

/// Minimum-norm least-squares solution of `a x = b` via SVD; singular values
/// below `rcond * sigma_max` are treated as zero.
pub fn min_norm_solve<T: ComplexField<RealField = f64>>(
    a: DMatrix<T>,
    b: &DVector<T>,
    rcond: f64,
) -> LeastSquares<T> {
    let svd = a.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let cut = rcond * sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let x = svd.solve(b, cut).expect("U and V were requested");
    LeastSquares { x, singular_values: sv, rank }
}

/// Singular values of `a` in decreasing order.
pub fn singular_values<T: ComplexField<RealField = f64>>(a: DMatrix<T>) -> Vec<f64> {
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn overdetermined_and_underdetermined() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let ls = min_norm_solve(a, &b, 1e-14);
        assert!((ls.x[0] - 1.0).abs() < 1e-14 && (ls.x[1] - 2.0).abs() < 1e-14);
        assert_eq!(ls.rank, 2);

        let a = DMatrix::from_row_slice(1, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let b = DVector::from_vec(vec![C64::new(2.0, 0.0)]);
        let ls = min_norm_solve(a, &b, 1e-14);
        assert!((ls.x[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((ls.x[1] - C64::new(0.0, -1.0)).norm() < 1e-14);
    }
}

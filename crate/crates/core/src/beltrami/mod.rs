//! Solving `f_zbar = mu f_z` by Neumann iteration, point normalisation and
//! families of charts.
//!
//! With `f = z + P(φ)` the equation becomes `φ = mu S(φ) + mu`, which is
//! iterated from `φ_0 = mu`. `P` and `S` are the plan's lattice-consistent
//! pair, so the discrete residual measured with central differences is at
//! round-off level once the iteration has converged.

mod family;
mod normalize;

pub use family::{family_charts, family_lipschitz, image_topology};
pub use normalize::{flow, normalize_fixing_points, normalize_with_times, FixedPointSet};

use crate::grid::{wirtinger_derivatives, ComplexGrid};
use crate::io::ChartSidecar;
use crate::structures::BeltramiField;
use crate::transforms::{Operator, TransformPlan};
use crate::{Error, Result, C64};

/// A solved chart together with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalChart {
    /// Chart values on every lattice node.
    pub f: ComplexGrid,
    /// Density with `f = z + P(φ)` for the solve that produced the chart
    /// (point normalisation post-composes `f` and leaves `φ` unchanged).
    pub phi: ComplexGrid,
    pub mu: BeltramiField,
    /// `max |f_zbar - mu f_z|` over interior mask nodes.
    pub residual: f64,
    pub iterations: usize,
    /// Largest ratio of successive `l^2` Neumann increments.
    pub contraction: f64,
    /// `min (|f_z|^2 - |f_zbar|^2)` over interior mask nodes.
    pub jacobian_min: f64,
}

impl ConformalChart {
    /// The identity chart for the standard structure.
    pub fn identity(mu: BeltramiField) -> Result<Self> {
        let lat = *mu.lattice();
        let f = ComplexGrid::coordinate(lat).with_mask(mu.mu().mask().to_vec())?;
        let phi = ComplexGrid::zeros(lat).with_mask(mu.mu().mask().to_vec())?;
        let (residual, jacobian_min) = chart_diagnostics(&f, &mu)?;
        Ok(ConformalChart { f, phi, mu, residual, iterations: 1, contraction: 0.0, jacobian_min })
    }

    /// Orientation preserving on the interior of the mask, with a finite residual.
    pub fn is_valid(&self) -> bool {
        self.jacobian_min > 0.0 && self.residual.is_finite()
    }

    pub fn sidecar(&self) -> ChartSidecar {
        ChartSidecar {
            residual: self.residual,
            iterations: self.iterations,
            contraction: self.contraction,
            jacobian_min: self.jacobian_min,
        }
    }

    /// Replaces the chart values and recomputes residual and Jacobian.
    pub fn with_values(&self, f: ComplexGrid) -> Result<Self> {
        let (residual, jacobian_min) = chart_diagnostics(&f, &self.mu)?;
        Ok(ConformalChart { f, residual, jacobian_min, ..self.clone() })
    }
}

/// `(max |f_zbar - mu f_z|, min (|f_z|^2 - |f_zbar|^2))` over interior mask
/// nodes of `f`, from central differences.
pub fn chart_diagnostics(f: &ComplexGrid, mu: &BeltramiField) -> Result<(f64, f64)> {
    f.lattice().check_compatible(mu.lattice())?;
    let (fz, fzb) = wirtinger_derivatives(f)?;
    let m = mu.mu().samples();
    let mut residual: f64 = 0.0;
    let mut jac = f64::INFINITY;
    for k in f.interior_indices() {
        let (a, b) = (fz.samples()[k], fzb.samples()[k]);
        residual = residual.max((b - m[k] * a).norm());
        jac = jac.min(a.norm_sqr() - b.norm_sqr());
    }
    Ok((residual, jac))
}

/// Pointwise Beltrami coefficient `f_zbar / f_z` of a chart on interior mask
/// nodes (zero elsewhere).
pub fn beltrami_coefficient_of(f: &ComplexGrid) -> Result<ComplexGrid> {
    let (fz, fzb) = wirtinger_derivatives(f)?;
    let mut out = vec![C64::new(0.0, 0.0); f.lattice().len()];
    for k in f.interior_indices() {
        out[k] = fzb.samples()[k] / fz.samples()[k];
    }
    f.with_samples(out)
}

fn sup_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn l2_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Solves the Beltrami equation for a compactly supported coefficient.
///
/// Fails with [`Error::NoConvergence`] when `sup |mu|` times the probed norm
/// of the plan's lattice Beurling operator is not below 1, and with
/// [`Error::IterationBudget`] (carrying the partial chart) when the sup-norm
/// increment is still `>= tol` after `max_iter` updates.
pub fn solve_beltrami(
    mu: &BeltramiField,
    plan: &TransformPlan,
    tol: f64,
    max_iter: usize,
) -> Result<ConformalChart> {
    plan.lattice().check_compatible(mu.lattice())?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if mu.is_zero() {
        return ConformalChart::identity(mu.clone());
    }
    plan.check_support(mu.mu())?;
    let sup = mu.sup_all();
    if !(sup < 1.0) {
        return Err(Error::NoConvergence { ratio: sup });
    }
    let bound = sup * plan.solver_operator_norm();
    if !(bound < 1.0) {
        return Err(Error::NoConvergence { ratio: bound });
    }

    let m = mu.mu().samples();
    let mut phi: Vec<C64> = m.to_vec();
    let scale = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let floor = 1e3 * f64::EPSILON * scale;
    let mut contraction: f64 = 0.0;
    let mut prev_l2: Option<f64> = None;
    let mut increment = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let s = plan.apply_raw(Operator::LatticeBeurling, &phi);
        let next: Vec<C64> = m.iter().zip(&s).map(|(mu, s)| mu * s + mu).collect();
        increment = sup_diff(&next, &phi);
        let inc_l2 = l2_diff(&next, &phi);
        if let Some(p) = prev_l2 {
            if p > floor && inc_l2 > floor {
                contraction = contraction.max(inc_l2 / p);
            }
        }
        prev_l2 = Some(inc_l2);
        phi = next;
        iterations += 1;
        if increment < tol {
            break;
        }
    }

    let lat = *mu.lattice();
    let mask = mu.mu().mask().to_vec();
    let p = plan.apply_raw(Operator::LatticeCauchy, &phi);
    let f: Vec<C64> = (0..lat.len()).map(|k| lat.node_at(k) + p[k]).collect();
    let f = ComplexGrid::new(lat, f, mask.clone())?;
    let phi = ComplexGrid::new(lat, phi, mask)?;
    let (residual, jacobian_min) = chart_diagnostics(&f, mu)?;
    let chart = ConformalChart {
        f,
        phi,
        mu: mu.clone(),
        residual,
        iterations,
        contraction,
        jacobian_min,
    };
    if !(increment < tol) {
        return Err(Error::IterationBudget { iterations, increment, partial: Box::new(chart) });
    }
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    #[test]
    fn zero_coefficient_gives_identity_bit_exactly() {
        let lat = Lattice::centered_square(2.0, 33).unwrap();
        let plan = TransformPlan::new(lat, 2).unwrap();
        let chart = solve_beltrami(&BeltramiField::zero(lat), &plan, 1e-12, 50).unwrap();
        assert_eq!(chart.iterations, 1);
        assert_eq!(chart.residual, 0.0);
        for k in 0..lat.len() {
            assert_eq!(chart.f.samples()[k], lat.node_at(k));
            assert_eq!(chart.phi.samples()[k], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn gaussian_coefficient_small_grid() {
        let lat = Lattice::centered_square(2.0, 65).unwrap();
        let plan = TransformPlan::new(lat, 2).unwrap();
        let mu = BeltramiField::new(ComplexGrid::from_fn(lat, |z| {
            C64::new(0.4 * (-8.0 * z.norm_sqr()).exp(), 0.0)
        }))
        .unwrap();
        let chart = solve_beltrami(&mu, &plan, 1e-12, 200).unwrap();
        assert!(chart.residual < 1e-10, "{}", chart.residual);
        assert!(chart.jacobian_min > 0.0);
        assert!(chart.contraction < 0.4 * plan.solver_operator_norm() + 1e-6);
        let (r, _) = chart_diagnostics(&chart.f, &mu).unwrap();
        assert_eq!(r, chart.residual);
    }

    #[test]
    fn budget_error_carries_partial_chart() {
        let lat = Lattice::centered_square(2.0, 33).unwrap();
        let plan = TransformPlan::new(lat, 2).unwrap();
        let mu = BeltramiField::new(ComplexGrid::from_fn(lat, |z| {
            C64::new(0.0, 0.5 * (-6.0 * z.norm_sqr()).exp())
        }))
        .unwrap();
        match solve_beltrami(&mu, &plan, 1e-14, 2) {
            Err(Error::IterationBudget { iterations, partial, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(partial.iterations, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn support_and_contraction_preconditions() {
        let lat = Lattice::centered_square(1.0, 17).unwrap();
        let plan = TransformPlan::new(lat, 2).unwrap();
        let wide = BeltramiField::new(crate::grid::Grid::filled(lat, C64::new(0.2, 0.0))).unwrap();
        assert!(matches!(solve_beltrami(&wide, &plan, 1e-12, 10), Err(Error::Support { .. })));
    }
}

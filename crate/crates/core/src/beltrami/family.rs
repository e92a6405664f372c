//! Parameter families of charts normalised at a base fiber.

use rayon::prelude::*;

use super::{normalize_fixing_points, solve_beltrami, ConformalChart, FixedPointSet};
use crate::families::FamilyField;
use crate::grid::ComplexGrid;
use crate::interp::Bicubic;
use crate::structures::BeltramiField;
use crate::topology::{bounded_complement_components, mask_component_count, rasterize_image};
use crate::transforms::TransformPlan;
use crate::{Error, Result, C64};

/// Solves every fiber and returns `Φ_b = g_{b0}^{-1} ∘ g_b`, where `g_b` is
/// the (optionally point-normalised) standard chart of `mu_b`.
///
/// `Φ_{b0}` is the identity exactly. When `mu_{b0}` vanishes, `Φ_b = g_b`;
/// otherwise the inverse of `g_{b0}` is evaluated by Newton's method on its
/// bicubic interpolant, and the returned charts carry the diagnostics of
/// `g_b`. Fibers are solved in parallel; the first failing fiber (by index)
/// is reported.
pub fn family_charts(
    mus: &FamilyField<BeltramiField>,
    base_index: usize,
    plan: &TransformPlan,
    tol: f64,
    max_iter: usize,
    fixed: Option<&FixedPointSet>,
) -> Result<FamilyField<ConformalChart>> {
    if base_index >= mus.len() {
        return Err(Error::Dimension(format!(
            "base index {base_index} outside {} fibers",
            mus.len()
        )));
    }
    let solved: Vec<Result<ConformalChart>> = mus
        .fibers
        .par_iter()
        .enumerate()
        .map(|(i, mu)| {
            let chart = solve_beltrami(mu, plan, tol, max_iter).map_err(|e| e.in_fiber(i))?;
            match fixed {
                Some(points) if !points.is_empty() => {
                    normalize_fixing_points(&chart, points, tol.max(1e-13)).map_err(|e| e.in_fiber(i))
                }
                _ => Ok(chart),
            }
        })
        .collect();
    let mut charts = solved.into_iter().collect::<Result<Vec<_>>>()?;

    let lat = *plan.lattice();
    let base_mu = &mus.fibers[base_index];
    if !base_mu.is_zero() {
        let base = charts[base_index].f.clone();
        let interp = Bicubic::extrapolating(&base, 4.0);
        let scale = base.sup_norm().max(1.0);
        let relative: Vec<Result<ComplexGrid>> = charts
            .par_iter()
            .enumerate()
            .map(|(i, chart)| {
                let mut out = Vec::with_capacity(lat.len());
                for (k, w) in chart.f.samples().iter().enumerate() {
                    let z = lat.node_at(k);
                    let v = interp.invert(*w, z, 1e-13 * scale, 40).unwrap_or(C64::new(f64::NAN, f64::NAN));
                    if chart.f.mask()[k] && !v.re.is_finite() {
                        return Err(Error::Domain(format!(
                            "chart value {w} at node {k} is outside the base chart image"
                        ))
                        .in_fiber(i));
                    }
                    out.push(v);
                }
                chart.f.with_samples(out)
            })
            .collect();
        for (chart, f) in charts.iter_mut().zip(relative) {
            chart.f = f?;
        }
    }
    let base = &mut charts[base_index];
    base.f = ComplexGrid::coordinate(lat).with_mask(base.f.mask().to_vec())?;
    FamilyField::new(mus.params.clone(), charts)
}

/// Largest `sup |Φ_{i+1} - Φ_i| / (b_{i+1} - b_i)` over mask nodes.
pub fn family_lipschitz(charts: &FamilyField<ConformalChart>) -> f64 {
    let b = charts.params.values();
    let mut l: f64 = 0.0;
    for i in 1..charts.len() {
        let (a, c) = (&charts.fibers[i - 1].f, &charts.fibers[i].f);
        let d = a
            .masked_indices()
            .map(|k| (a.samples()[k] - c.samples()[k]).norm())
            .fold(0.0, f64::max);
        l = l.max(d / (b[i] - b[i - 1]));
    }
    l
}

/// `(image components, bounded complement components)` of the image of the
/// chart's mask, rasterised onto the chart's own lattice.
pub fn image_topology(f: &ComplexGrid) -> (usize, usize) {
    let lat = *f.lattice();
    let img = rasterize_image(f, &lat);
    (
        mask_component_count(&lat, &img),
        bounded_complement_components(&lat, &img).len(),
    )
}

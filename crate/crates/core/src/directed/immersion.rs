//! Immersion families with nowhere-vanishing derivative, and
//! plurisubharmonic exhaustions built from them.

use rayon::prelude::*;

use super::integrate::integrate_primitive;
use crate::families::{
    family_runge_with_charts, standard_charts, FamilyField, FamilyRungeOptions, FamilyRungeReport,
};
use crate::grid::{wirtinger_derivatives, ComplexGrid, RealGrid};
use crate::interp::Bicubic;
use crate::structures::BeltramiField;
use crate::transforms::TransformPlan;
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
pub struct ImmersionFamily {
    /// `h_b = ∫ exp(G_b) dw_b` from the basepoint.
    pub h: FamilyField<ComplexGrid>,
    /// Fiber-wise holomorphic exponents `G_b`.
    pub exponent: FamilyField<ComplexGrid>,
    /// `min |exp(G_b)|` over the mask, per fiber.
    pub min_derivative: Vec<f64>,
    pub loop_defect: Vec<f64>,
    pub runge: FamilyRungeReport,
}

/// Immersions `h_b` with derivative `exp(G_b)` in the chart coordinate
/// `w_b` of the standard chart of `mu_b`, where `G_b` approximates the
/// transported seed `g0 ∘ w_b` on `k`.
///
/// The mask of `g0` is the integration domain.
pub fn immersion_family(
    mus: &FamilyField<BeltramiField>,
    g0: &ComplexGrid,
    k: &[bool],
    plan: &TransformPlan,
    opts: &FamilyRungeOptions,
    basepoint: usize,
) -> Result<ImmersionFamily> {
    let lat = *plan.lattice();
    lat.check_compatible(g0.lattice())?;
    let charts = standard_charts(mus, plan, opts)?;
    let interp = Bicubic::extrapolating(g0, 4.0);
    let seeds: Vec<ComplexGrid> = charts
        .fibers
        .par_iter()
        .map(|chart| {
            let mut mask = g0.mask().to_vec();
            let vals = chart
                .f
                .samples()
                .iter()
                .enumerate()
                .map(|(i, w)| match interp.eval(*w) {
                    Some(v) => v,
                    None => {
                        mask[i] = false;
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            ComplexGrid::new(lat, vals, mask)
        })
        .collect::<Result<_>>()?;
    let seeds = FamilyField::new(mus.params.clone(), seeds)?;
    let runge = family_runge_with_charts(&seeds, mus, charts, k, opts)?;

    let theta = ComplexGrid::filled(lat, C64::new(1.0, 0.0));
    let mask = g0.mask().to_vec();
    let fibers: Vec<Result<(ComplexGrid, ComplexGrid, f64, f64)>> = (0..mus.len())
        .into_par_iter()
        .map(|b| {
            let g = runge.approximation.fibers[b].clone().with_mask(mask.clone())?;
            let d = g.map(|v| v.exp());
            let min = d.masked_indices().map(|i| d.samples()[i].norm()).fold(f64::INFINITY, f64::min);
            if !(min > 0.0) {
                return Err(Error::DegenerateImmersion { index: b, margin: min });
            }
            let prim = integrate_primitive(
                std::slice::from_ref(&d),
                &theta,
                basepoint,
                &[C64::new(0.0, 0.0)],
                Some(&runge.charts.fibers[b].f),
            )
            .map_err(|e| e.in_fiber(b))?;
            let h = prim.h.into_iter().next().expect("one component");
            Ok((h, g, min, prim.loop_defect))
        })
        .collect();
    let mut hs = Vec::new();
    let mut gs = Vec::new();
    let mut min_derivative = Vec::new();
    let mut loop_defect = Vec::new();
    for r in fibers {
        let (h, g, m, l) = r?;
        hs.push(h);
        gs.push(g);
        min_derivative.push(m);
        loop_defect.push(l);
    }
    Ok(ImmersionFamily {
        h: FamilyField::new(mus.params.clone(), hs)?,
        exponent: FamilyField::new(mus.params.clone(), gs)?,
        min_derivative,
        loop_defect,
        runge,
    })
}

/// `ρ_b = Σ_i |h_{b,i}|^2` with its discrete Laplacian.
#[derive(Clone, Debug, PartialEq)]
pub struct Exhaustion {
    pub rho: RealGrid,
    /// 5-point Laplacian on interior mask nodes (0 elsewhere).
    pub laplacian: RealGrid,
    /// Smallest Laplacian over interior nodes where some `|∂_z h_i|`
    /// exceeds the threshold (`+inf` if there are none).
    pub min_laplacian: f64,
    /// `min_laplacian >= -1e-8`.
    pub subharmonic: bool,
}

/// Exhaustion `Σ |h_i|^2` of every fiber with its subharmonicity diagnostic.
pub fn subharmonic_exhaustion(h: &FamilyField<Vec<ComplexGrid>>, threshold: f64) -> Result<Vec<Exhaustion>> {
    h.fibers
        .par_iter()
        .enumerate()
        .map(|(b, comps)| {
            if comps.is_empty() {
                return Err(Error::Dimension("fiber without components".into()).in_fiber(b));
            }
            let lat = *comps[0].lattice();
            for c in comps {
                lat.check_compatible(c.lattice())?;
            }
            let rho: Vec<f64> = (0..lat.len()).map(|k| comps.iter().map(|c| c.samples()[k].norm_sqr()).sum()).collect();
            let rho = comps[0].with_samples(rho)?;
            let derivs: Vec<ComplexGrid> = comps.iter().map(|c| wirtinger_derivatives(c).map(|d| d.0)).collect::<Result<_>>()?;
            let mut lap = vec![0.0; lat.len()];
            let mut min_laplacian = f64::INFINITY;
            let h2 = lat.spacing * lat.spacing;
            let s = rho.samples();
            for k in comps[0].interior_indices() {
                let l = (s[k - 1] + s[k + 1] + s[k - lat.nx] + s[k + lat.nx] - 4.0 * s[k]) / h2;
                lap[k] = l;
                if derivs.iter().any(|d| d.samples()[k].norm() > threshold) {
                    min_laplacian = min_laplacian.min(l);
                }
            }
            Ok(Exhaustion {
                laplacian: rho.with_samples(lap)?,
                rho,
                min_laplacian,
                subharmonic: min_laplacian >= -1e-8,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::ParameterGrid;
    use crate::grid::Lattice;

    #[test]
    fn exhaustion_of_coordinate_and_constant() {
        let lat = Lattice::centered_square(1.0, 33).unwrap();
        let params = ParameterGrid::new(vec![0.0, 1.0]).unwrap();
        let fam = FamilyField::new(
            params,
            vec![vec![ComplexGrid::coordinate(lat)], vec![ComplexGrid::filled(lat, C64::new(2.0, 1.0))]],
        )
        .unwrap();
        let ex = subharmonic_exhaustion(&fam, 1e-6).unwrap();
        for k in ex[0].rho.interior_indices() {
            assert!((ex[0].laplacian.samples()[k] - 4.0).abs() < 1e-9);
            assert!(ex[1].laplacian.samples()[k].abs() < 1e-9);
        }
        assert!(ex[0].subharmonic);
        assert_eq!(ex[1].min_laplacian, f64::INFINITY);
    }

    #[test]
    fn zero_structure_zero_seed_is_coordinate() {
        let lat = Lattice::centered_square(1.5, 49).unwrap();
        let plan = TransformPlan::new(lat, 2).unwrap();
        let params = ParameterGrid::new(vec![0.0, 1.0]).unwrap();
        let mus = FamilyField::new(params, vec![BeltramiField::zero(lat); 2]).unwrap();
        let k: Vec<bool> = (0..lat.len()).map(|i| lat.node_at(i).norm() <= 1.0).collect();
        let opts = FamilyRungeOptions { anchors: vec![0, 1], degree: 4, ..Default::default() };
        let out = immersion_family(&mus, &ComplexGrid::zeros(lat), &k, &plan, &opts, lat.index(24, 24)).unwrap();
        for h in &out.h.fibers {
            for i in 0..lat.len() {
                assert!((h.samples()[i] - lat.node_at(i)).norm() < 1e-12);
            }
        }
        assert!(out.min_derivative.iter().all(|&m| (m - 1.0).abs() < 1e-12));
    }
}

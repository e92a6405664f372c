//! Conformal minimal immersions from null-curve derivative data.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::cone::{check_cone_membership, check_components, ConeSpec};
use super::integrate::integrate_primitive;
use super::periods::{period_map, HomologyCycle};
use crate::beltrami::ConformalChart;
use crate::families::{FamilyField, ParameterGrid};
use crate::grid::{partials, wirtinger_derivatives, ComplexGrid, RealGrid};
use crate::io::save_obj;
use crate::linalg::singular_values;
use crate::{Error, Result, C64};

/// Defining-polynomial residual accepted for bundle fields.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Relative size of the second direction below which a field counts as flat.
pub const FLATNESS_TOL: f64 = 1e-8;

/// Cone-valued derivative fields over a sampled parameter axis.
#[derive(Clone, Debug)]
pub struct NullCurveBundle {
    pub params: ParameterGrid,
    pub cone: ConeSpec,
    /// `fields[b][i]`: component `i` of the derivative on fiber `b`.
    pub fields: Vec<Vec<ComplexGrid>>,
    /// Coefficient of the 1-form `θ = theta dw`.
    pub theta: ComplexGrid,
    pub cycles: Vec<HomologyCycle>,
    /// Per fiber, `m x n` periods.
    pub periods: Vec<DMatrix<C64>>,
}

impl NullCurveBundle {
    /// Checks cone membership of every fiber within [`MEMBERSHIP_TOL`] and
    /// computes the periods.
    pub fn new(
        params: ParameterGrid,
        cone: ConeSpec,
        fields: Vec<Vec<ComplexGrid>>,
        theta: ComplexGrid,
        cycles: Vec<HomologyCycle>,
    ) -> Result<Self> {
        if fields.len() != params.len() {
            return Err(Error::Dimension(format!("{} parameters but {} fibers", params.len(), fields.len())));
        }
        let mut periods = Vec::with_capacity(fields.len());
        for (b, f) in fields.iter().enumerate() {
            let report = check_cone_membership(f, cone, MEMBERSHIP_TOL).map_err(|e| e.in_fiber(b))?;
            if !report.pass {
                return Err(Error::Domain(format!(
                    "field leaves the cone at node {} (residual {:e}, min modulus {:e})",
                    report.worst_node, report.max_residual, report.min_modulus
                ))
                .in_fiber(b));
            }
            periods.push(period_map(f, &theta, &cycles).map_err(|e| e.in_fiber(b))?);
        }
        Ok(NullCurveBundle { params, cone, fields, theta, cycles, periods })
    }
}

#[derive(Clone, Debug)]
pub struct MinimalOptions {
    /// Integration base node; the mask node nearest the mask centroid when `None`.
    pub basepoint: Option<usize>,
    /// Translation `v` (zeros when empty).
    pub offset: Vec<C64>,
    /// Largest real period accepted.
    pub period_tol: f64,
}

impl Default for MinimalOptions {
    fn default() -> Self {
        MinimalOptions { basepoint: None, offset: Vec::new(), period_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalDiagnostics {
    /// `max(| |u_X|^2 - |u_Y|^2 |, |u_X . u_Y|) / max(|u_X|^2, |u_Y|^2)` over
    /// interior nodes, derivatives in the chart coordinate.
    pub conformality: f64,
    /// `max |Δu|` (5-point Laplacian) without a chart; with a chart, the
    /// largest Beltrami residual of `∂u/∂w`.
    pub harmonicity: f64,
    /// `harmonicity` over `max |u|` (or `max |∂u/∂w|` with a chart).
    pub harmonicity_relative: f64,
    /// `min min(|u_X|, |u_Y|)` over interior nodes.
    pub margin: f64,
    pub nonflat: bool,
    /// Second over first singular value of the normalised range of `f`.
    pub flatness: f64,
    pub loop_defect: f64,
    pub real_loop_defect: f64,
    /// `max |Re P|` over the fiber's periods.
    pub real_periods: f64,
    /// Imaginary parts of the periods.
    pub flux: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct MinimalFiber {
    pub h: Vec<ComplexGrid>,
    pub u: Vec<RealGrid>,
    pub diagnostics: MinimalDiagnostics,
}

impl MinimalFiber {
    /// First three coordinates of `u` per node (missing ones are 0).
    pub fn vertices(&self) -> Vec<[f64; 3]> {
        let len = self.u[0].lattice().len();
        (0..len)
            .map(|k| {
                let mut v = [0.0; 3];
                for (slot, u) in v.iter_mut().zip(&self.u) {
                    *slot = u.samples()[k];
                }
                v
            })
            .collect()
    }

    pub fn save_obj(&self, path: &Path, comments: &[String]) -> Result<()> {
        save_obj(path, self.u[0].lattice(), &self.vertices(), self.u[0].mask(), comments)
    }
}

fn default_basepoint(mask: &[bool], g: &ComplexGrid) -> Result<usize> {
    let lat = g.lattice();
    let nodes: Vec<usize> = (0..lat.len()).filter(|&k| mask[k]).collect();
    if nodes.is_empty() {
        return Err(Error::Domain("empty mask".into()));
    }
    let centroid = nodes.iter().map(|&k| lat.node_at(k)).sum::<C64>() / nodes.len() as f64;
    Ok(*nodes
        .iter()
        .min_by(|&&a, &&b| (lat.node_at(a) - centroid).norm().total_cmp(&(lat.node_at(b) - centroid).norm()))
        .unwrap())
}

/// Five-point fourth-order first-derivative weights (times `12 h`) for
/// the windows `offset..offset + 5`, most centred first.
const STENCILS4: [(isize, [f64; 5]); 5] = [
    (-2, [1.0, -8.0, 0.0, 8.0, -1.0]),
    (-1, [-3.0, -10.0, 18.0, -6.0, 1.0]),
    (-3, [-1.0, 6.0, -18.0, 10.0, 3.0]),
    (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
    (-4, [3.0, -16.0, 36.0, -48.0, 25.0]),
];

/// `(u_x, u_y)` with fourth-order five-point stencils (centred where the
/// mask allows, shifted near its edge), falling back to [`partials`] where
/// no five-node window fits.
pub fn partials4(u: &ComplexGrid) -> Result<(Vec<C64>, Vec<C64>)> {
    let (px, py) = partials(u)?;
    let lat = *u.lattice();
    let (mut dx, mut dy) = (px.into_samples(), py.into_samples());
    let s = u.samples();
    let m = u.mask();
    let h = lat.spacing;
    let line = |k: usize, pos: usize, len: usize, stride: usize| -> Option<C64> {
        STENCILS4.iter().find_map(|(off, w)| {
            let start = pos as isize + off;
            if start < 0 || start as usize + 4 >= len {
                return None;
            }
            let idx = |j: usize| (k as isize + (off + j as isize) * stride as isize) as usize;
            if !(0..5).all(|j| m[idx(j)]) {
                return None;
            }
            Some((0..5).map(|j| s[idx(j)] * w[j]).sum::<C64>() / (12.0 * h))
        })
    };
    for k in u.masked_indices() {
        let (r, c) = lat.row_col(k);
        if let Some(v) = line(k, c, lat.nx, 1) {
            dx[k] = v;
        }
        if let Some(v) = line(k, r, lat.ny, lat.nx) {
            dy[k] = v;
        }
    }
    Ok((dx, dy))
}

/// Largest singular-value ratio `σ_2 / σ_1` of `sum v v^*` over the unit
/// vectors `v = f(x) / |f(x)|`, `x` in the mask.
pub fn flatness(f: &[ComplexGrid]) -> f64 {
    let n = f.len();
    let mut gram = DMatrix::<C64>::zeros(n, n);
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in f[0].masked_indices() {
        for (x, g) in v.iter_mut().zip(f) {
            *x = g.samples()[k];
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for a in 0..n {
            for b in 0..n {
                gram[(a, b)] += v[a] * v[b].conj() / (norm * norm);
            }
        }
    }
    let sv = singular_values(gram);
    if n < 2 || sv[0] == 0.0 {
        return 0.0;
    }
    (sv[1] / sv[0]).sqrt()
}

fn fiber(
    bundle: &NullCurveBundle,
    b: usize,
    chart: Option<&ConformalChart>,
    opts: &MinimalOptions,
) -> Result<MinimalFiber> {
    let f = &bundle.fields[b];
    let lat = *f[0].lattice();
    let periods = &bundle.periods[b];
    let real_periods = periods.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    if !(real_periods <= opts.period_tol) {
        return Err(Error::Domain(format!("real periods {real_periods:e} exceed {:e}", opts.period_tol)));
    }
    let mask = f[0].mask().to_vec();
    let base = match opts.basepoint {
        Some(k) => k,
        None => default_basepoint(&mask, &f[0])?,
    };
    let offset = if opts.offset.is_empty() { vec![C64::new(0.0, 0.0); f.len()] } else { opts.offset.clone() };
    let coordinate = chart.map(|c| &c.f);
    let prim = integrate_primitive(f, &bundle.theta, base, &offset, coordinate)?;
    let u: Vec<RealGrid> = prim.h.iter().map(|h| h.real_part()).collect();

    let derivs: Vec<(Vec<C64>, Vec<C64>)> = u.iter().map(|g| partials4(&g.to_complex())).collect::<Result<_>>()?;
    let wz = match chart {
        Some(c) => Some(wirtinger_derivatives(&c.f.clone().with_mask(mask.clone())?)?),
        None => None,
    };
    // u_w per component and node.
    let u_w: Vec<Vec<C64>> = derivs
        .iter()
        .map(|(dx, dy)| {
            (0..lat.len())
                .map(|k| {
                    let uz = 0.5 * (dx[k] - C64::i() * dy[k]);
                    match &wz {
                        None => uz,
                        Some((a, bb)) => {
                            let (p, q) = (a.samples()[k], bb.samples()[k]);
                            (uz * p.conj() - uz.conj() * q.conj()) / (p.norm_sqr() - q.norm_sqr())
                        }
                    }
                })
                .collect()
        })
        .collect();
    let interior = u[0].interior_indices();
    let mut conformality: f64 = 0.0;
    let mut margin = f64::INFINITY;
    let mut worst = base;
    for &k in &interior {
        let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
        for uw in &u_w {
            let (ux, uy) = (2.0 * uw[k].re, -2.0 * uw[k].im);
            xx += ux * ux;
            yy += uy * uy;
            xy += ux * uy;
        }
        let scale = xx.max(yy);
        if scale > 0.0 {
            conformality = conformality.max((xx - yy).abs().max(xy.abs()) / scale);
        }
        let m = xx.sqrt().min(yy.sqrt());
        if m < margin {
            margin = m;
            worst = k;
        }
    }
    if !(margin > 0.0) {
        return Err(Error::DegenerateImmersion { index: worst, margin });
    }

    let (harmonicity, harmonicity_relative) = match chart {
        None => {
            let h2 = lat.spacing * lat.spacing;
            let mut lap: f64 = 0.0;
            let mut size: f64 = 0.0;
            for g in &u {
                let s = g.samples();
                size = g.masked_indices().map(|k| s[k].abs()).fold(size, f64::max);
                for &k in &interior {
                    let l = (s[k - 1] + s[k + 1] + s[k - lat.nx] + s[k + lat.nx] - 4.0 * s[k]) / h2;
                    lap = lap.max(l.abs());
                }
            }
            (lap, if size > 0.0 { lap / size } else { lap })
        }
        Some(c) => {
            let mu = c.mu.mu().samples();
            let mut res: f64 = 0.0;
            let mut size: f64 = 0.0;
            for uw in &u_w {
                let grid = ComplexGrid::new(lat, uw.clone(), mask.clone())?;
                size = grid.masked_indices().map(|k| uw[k].norm()).fold(size, f64::max);
                let (gz, gzb) = wirtinger_derivatives(&grid)?;
                for &k in &interior {
                    res = res.max((gzb.samples()[k] - mu[k] * gz.samples()[k]).norm());
                }
            }
            (res, if size > 0.0 { res / size } else { res })
        }
    };
    let flat = flatness(f);
    Ok(MinimalFiber {
        h: prim.h,
        u,
        diagnostics: MinimalDiagnostics {
            conformality,
            harmonicity,
            harmonicity_relative,
            margin,
            nonflat: flat > FLATNESS_TOL,
            flatness: flat,
            loop_defect: prim.loop_defect,
            real_loop_defect: prim.real_loop_defect,
            real_periods,
            flux: periods.map(|v| v.im),
        },
    })
}

/// `u_b = Re h_b` for every fiber, with `h_b` integrated in the chart
/// coordinate of `charts` (the lattice coordinate when `None`).
pub fn minimal_immersion_family(
    bundle: &NullCurveBundle,
    charts: Option<&FamilyField<ConformalChart>>,
    opts: &MinimalOptions,
) -> Result<Vec<MinimalFiber>> {
    for f in &bundle.fields {
        check_components(f, bundle.cone)?;
    }
    if let Some(c) = charts {
        if c.len() != bundle.fields.len() {
            return Err(Error::Dimension(format!("{} charts for {} fibers", c.len(), bundle.fields.len())));
        }
    }
    let out: Vec<Result<MinimalFiber>> = (0..bundle.fields.len())
        .into_par_iter()
        .map(|b| fiber(bundle, b, charts.map(|c| &c.fibers[b]), opts).map_err(|e| e.in_fiber(b)))
        .collect();
    out.into_iter().collect()
}

/// Writes `<dir>/<stem>_b<index>.obj` for every fiber.
pub fn export_meshes(fibers: &[MinimalFiber], dir: &Path, stem: &str, comments: &[String]) -> Result<Vec<PathBuf>> {
    fibers
        .iter()
        .enumerate()
        .map(|(b, f)| {
            let path = dir.join(format!("{stem}_b{b}.obj"));
            f.save_obj(&path, comments)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    fn enneper(lat: Lattice) -> Vec<ComplexGrid> {
        let mask: Vec<bool> = (0..lat.len()).map(|k| lat.node_at(k).norm() <= 1.0).collect();
        let comps: [fn(C64) -> C64; 3] =
            [|z| 0.5 * (1.0 - z * z), |z| C64::i() * 0.5 * (1.0 + z * z), |z| z];
        comps.iter().map(|c| ComplexGrid::from_fn(lat, *c).with_mask(mask.clone()).unwrap()).collect()
    }

    #[test]
    fn enneper_surface_and_flat_datum() {
        let lat = Lattice::centered_square(1.0, 65).unwrap();
        let f = enneper(lat);
        let params = ParameterGrid::new(vec![0.0]).unwrap();
        let theta = ComplexGrid::filled(lat, C64::new(1.0, 0.0));
        let bundle = NullCurveBundle::new(params.clone(), ConeSpec::NullQuadric(3), vec![f], theta.clone(), vec![]).unwrap();
        let opts = MinimalOptions { basepoint: Some(lat.index(32, 32)), ..Default::default() };
        let out = minimal_immersion_family(&bundle, None, &opts).unwrap();
        let d = &out[0].diagnostics;
        assert!(d.nonflat && d.conformality < 1e-6 && d.harmonicity_relative < 1e-8, "{d:?}");
        for k in out[0].u[0].masked_indices() {
            let z = lat.node_at(k);
            assert!((out[0].u[2].samples()[k] - (0.5 * z * z).re).abs() < 1e-13);
        }

        let v = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
        let flat: Vec<ComplexGrid> = v.iter().map(|c| ComplexGrid::filled(lat, *c)).collect();
        assert!(flatness(&flat) < FLATNESS_TOL);
    }
}

//! Runge approximation of fiber-wise holomorphic families.
//!
//! Every fiber `b` gets its standard chart `g_b` (fixing the jet points when
//! jets are requested). At anchor `b_j` the function `f_{b_j}` is written as
//! `p_j ∘ g_{b_j}` with a polynomial `p_j` fitted on a dilation of `K`; the
//! transported approximant at `b` is `p_j ∘ g_b`, which equals
//! `(p_j ∘ g_{b_j}) ∘ Φ_b` for `Φ_b = g_{b_j}^{-1} ∘ g_b`. The transported
//! approximants are glued with hat weights, so each fiber is `H_b ∘ g_b` for
//! a polynomial combination `H_b`, and the jet correction subtracts a
//! Hermite polynomial in the same coordinate.

use rayon::prelude::*;

use super::jets::{jet_correction_polynomial, jets_at, JetSpec};
use super::partition::hat_partition;
use super::poly::{fit_polynomial, PolyFit, Polynomial};
use super::{FamilyField, PartitionOfUnity};
use crate::beltrami::{normalize_fixing_points, solve_beltrami, ConformalChart};
use crate::grid::{wirtinger_derivatives, ComplexGrid};
use crate::structures::BeltramiField;
use crate::topology::{dilate, is_runge};
use crate::transforms::TransformPlan;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRungeOptions {
    /// Anchor sample indices (must include both ends unless single).
    pub anchors: Vec<usize>,
    pub degree: usize,
    /// Tolerance per parameter sample; a single value is broadcast.
    pub eps: Vec<f64>,
    pub jets: Option<JetSpec>,
    /// Beltrami solver tolerance and iteration budget.
    pub tol: f64,
    pub max_iter: usize,
    /// Lattice cells by which `K` is grown for the anchor fits.
    pub dilation: f64,
}

impl Default for FamilyRungeOptions {
    fn default() -> Self {
        FamilyRungeOptions {
            anchors: vec![0],
            degree: 12,
            eps: vec![1e-4],
            jets: None,
            tol: 1e-12,
            max_iter: 200,
            dilation: 6.0,
        }
    }
}

/// Diagnostics for one output fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberReport {
    /// `max |F_b - f_b|` over `K`.
    pub sup_error: f64,
    /// `max |H_b'(g_b)| |(g_b)_zbar - mu_b (g_b)_z|` over interior nodes of `K`.
    pub residual: f64,
    /// `max |(F_b)_zbar - mu_b (F_b)_z|` over interior nodes of `K`, from
    /// central differences of `F_b` itself (carries the O(h^2) stencil error).
    pub fd_residual: f64,
    /// Largest jet of `F_b - f_b` at the jet points after correction.
    pub jet_defect: f64,
    /// `max |q_b(g_b)|` over `K` for the subtracted Hermite polynomial.
    pub correction_sup: f64,
}

#[derive(Clone, Debug)]
pub struct FamilyRungeReport {
    pub approximation: FamilyField<ComplexGrid>,
    /// Standard charts `g_b` used for transport.
    pub charts: FamilyField<ConformalChart>,
    pub partition: PartitionOfUnity,
    pub anchor_fits: Vec<PolyFit>,
    pub fibers: Vec<FiberReport>,
}

impl FamilyRungeReport {
    pub fn max_sup_error(&self) -> f64 {
        self.fibers.iter().map(|f| f.sup_error).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.fibers.iter().map(|f| f.residual).fold(0.0, f64::max)
    }
}

fn eps_at(eps: &[f64], i: usize) -> f64 {
    if eps.len() == 1 {
        eps[0]
    } else {
        eps[i]
    }
}

fn validate(
    f: &FamilyField<ComplexGrid>,
    mus: &FamilyField<BeltramiField>,
    k: &[bool],
    opts: &FamilyRungeOptions,
    lat: &crate::grid::Lattice,
) -> Result<()> {
    let m = f.len();
    if !(opts.eps.len() == 1 || opts.eps.len() == m) || opts.eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("eps must be one positive value or one per parameter sample".into()));
    }
    for (fi, mu) in f.fibers.iter().zip(&mus.fibers) {
        lat.check_compatible(fi.lattice())?;
        lat.check_compatible(mu.lattice())?;
    }
    if k.len() != lat.len() || !k.iter().any(|&x| x) {
        return Err(Error::Dimension("K must be a nonempty mask on the family lattice".into()));
    }
    if !is_runge(lat, k) {
        return Err(Error::Topology("complement of K has a bounded component".into()));
    }
    if let Some(j) = &opts.jets {
        for a in j.points.points() {
            let inside = lat.nearest(*a).is_some_and(|(r, c)| lat.is_interior(r, c) && k[lat.index(r, c)]);
            if !inside {
                return Err(Error::Domain(format!("jet point {a} is not inside K")));
            }
        }
    }
    Ok(())
}

/// Approximates the family `f` on the Runge mask `k` by fiber-wise
/// `mu_b`-holomorphic functions defined on the whole lattice.
///
/// Fails with [`Error::Anchor`] when an anchor's chart or fit misses its
/// tolerance and with [`Error::Budget`] when a glued fiber does not reach
/// `eps(b)` on `K`.
pub fn family_runge_approximate(
    f: &FamilyField<ComplexGrid>,
    mus: &FamilyField<BeltramiField>,
    k: &[bool],
    plan: &TransformPlan,
    opts: &FamilyRungeOptions,
) -> Result<FamilyRungeReport> {
    if mus.params != f.params {
        return Err(Error::Dimension("function and structure families use different parameters".into()));
    }
    let lat = *plan.lattice();
    validate(f, mus, k, opts, &lat)?;
    let partition = hat_partition(&f.params, &opts.anchors)?;
    let charts = standard_charts(mus, plan, opts).map_err(|e| match e {
        Error::Fiber { index, source } => match partition.anchors().iter().position(|&a| a == index) {
            Some(j) => Error::Anchor { index: j, source: Box::new(Error::Fiber { index, source }) },
            None => Error::Fiber { index, source },
        },
        e => e,
    })?;
    family_runge_with_charts(f, mus, charts, k, opts)
}

/// Standard chart of every fiber, normalised to fix the jet points when
/// `opts` requests jets. Fibers are solved in parallel.
pub fn standard_charts(
    mus: &FamilyField<BeltramiField>,
    plan: &TransformPlan,
    opts: &FamilyRungeOptions,
) -> Result<FamilyField<ConformalChart>> {
    let jets = opts.jets.as_ref().filter(|j| !j.points.is_empty());
    let charts: Vec<Result<ConformalChart>> = mus
        .fibers
        .par_iter()
        .enumerate()
        .map(|(i, mu)| {
            let chart = solve_beltrami(mu, plan, opts.tol, opts.max_iter).map_err(|e| e.in_fiber(i))?;
            match jets {
                Some(j) => normalize_fixing_points(&chart, &j.points, opts.tol.max(1e-13)).map_err(|e| e.in_fiber(i)),
                None => Ok(chart),
            }
        })
        .collect();
    FamilyField::new(mus.params.clone(), charts.into_iter().collect::<Result<Vec<_>>>()?)
}

/// [`family_runge_approximate`] with precomputed standard charts `g_b`
/// (normalised at the jet points when jets are requested).
pub fn family_runge_with_charts(
    f: &FamilyField<ComplexGrid>,
    mus: &FamilyField<BeltramiField>,
    charts: FamilyField<ConformalChart>,
    k: &[bool],
    opts: &FamilyRungeOptions,
) -> Result<FamilyRungeReport> {
    let m = f.len();
    if mus.params != f.params || charts.params != f.params {
        return Err(Error::Dimension("families use different parameters".into()));
    }
    let lat = *charts.fibers[0].f.lattice();
    validate(f, mus, k, opts, &lat)?;
    let partition = hat_partition(&f.params, &opts.anchors)?;
    let jets = opts.jets.as_ref().filter(|j| !j.points.is_empty());
    let charts = charts.fibers;

    let grown = dilate(&lat, k, opts.dilation);
    let k_nodes: Vec<usize> = (0..lat.len()).filter(|&i| k[i]).collect();
    let fits: Vec<Result<PolyFit>> = partition
        .anchors()
        .par_iter()
        .enumerate()
        .map(|(j, &a)| {
            let (g, fa) = (&charts[a].f, &f.fibers[a]);
            let fit_nodes: Vec<usize> = (0..lat.len()).filter(|&i| grown[i] && (fa.mask()[i] || k[i])).collect();
            let pts: Vec<C64> = fit_nodes.iter().map(|&i| g.samples()[i]).collect();
            let vals: Vec<C64> = fit_nodes.iter().map(|&i| fa.samples()[i]).collect();
            let kp: Vec<C64> = k_nodes.iter().map(|&i| g.samples()[i]).collect();
            let kv: Vec<C64> = k_nodes.iter().map(|&i| fa.samples()[i]).collect();
            let fit = fit_polynomial(&pts, &vals, &kp, &kv, opts.degree)
                .map_err(|e| Error::Anchor { index: j, source: Box::new(e) })?;
            let eps = eps_at(&opts.eps, a);
            if !(fit.sup_error < eps) {
                return Err(Error::Anchor {
                    index: j,
                    source: Box::new(Error::Budget { fiber: a, achieved: fit.sup_error, eps }),
                });
            }
            Ok(fit)
        })
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;

    let fibers: Vec<Result<(ComplexGrid, FiberReport)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let g = &charts[i].f;
            let w = partition.weights(i);
            let glued: Vec<(f64, &Polynomial)> =
                w.iter().zip(&fits).filter(|(c, _)| **c != 0.0).map(|(c, fit)| (*c, &fit.poly)).collect();
            let eval = |z: C64| glued.iter().fold(C64::new(0.0, 0.0), |acc, (c, p)| acc + p.eval(z) * *c);
            let values: Vec<C64> = g.samples().iter().map(|&z| eval(z)).collect();
            let mut out = f.fibers[i].with_samples(values)?;
            let mut q = Polynomial::zero();
            if let Some(j) = jets {
                let (poly, corrected) =
                    jet_correction_polynomial(&out, &f.fibers[i], j, Some(g)).map_err(|e| e.in_fiber(i))?;
                q = poly;
                out = corrected;
            }
            let report = fiber_report(&out, &f.fibers[i], &mus.fibers[i], g, k, &glued, &q, jets)
                .map_err(|e| e.in_fiber(i))?;
            let eps = eps_at(&opts.eps, i);
            if !(report.sup_error < eps) {
                return Err(Error::Budget { fiber: i, achieved: report.sup_error, eps });
            }
            Ok((out, report))
        })
        .collect();
    let (grids, reports): (Vec<_>, Vec<_>) = fibers.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(FamilyRungeReport {
        approximation: FamilyField::new(f.params.clone(), grids)?,
        charts: FamilyField::new(f.params.clone(), charts)?,
        partition,
        anchor_fits: fits,
        fibers: reports,
    })
}

#[allow(clippy::too_many_arguments)]
fn fiber_report(
    out: &ComplexGrid,
    f: &ComplexGrid,
    mu: &BeltramiField,
    g: &ComplexGrid,
    k: &[bool],
    glued: &[(f64, &Polynomial)],
    q: &Polynomial,
    jets: Option<&JetSpec>,
) -> Result<FiberReport> {
    let lat = *out.lattice();
    let derivs: Vec<(f64, Polynomial)> = glued.iter().map(|(c, p)| (*c, p.derivative())).collect();
    let dq = q.derivative();
    let h_prime = |z: C64| derivs.iter().fold(C64::new(0.0, 0.0), |acc, (c, p)| acc + p.eval(z) * *c) - dq.eval(z);
    let (gz, gzb) = wirtinger_derivatives(g)?;
    let (fz, fzb) = wirtinger_derivatives(out)?;
    let m = mu.mu().samples();
    let mut sup_error: f64 = 0.0;
    let mut correction_sup: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut fd_residual: f64 = 0.0;
    for i in 0..lat.len() {
        if !k[i] {
            continue;
        }
        sup_error = sup_error.max((out.samples()[i] - f.samples()[i]).norm());
        correction_sup = correction_sup.max(q.eval(g.samples()[i]).norm());
        let (r, c) = lat.row_col(i);
        let inner = lat.is_interior(r, c)
            && [lat.index(r - 1, c), lat.index(r + 1, c), lat.index(r, c - 1), lat.index(r, c + 1)]
                .iter()
                .all(|&n| k[n]);
        if inner {
            let chart = (gzb.samples()[i] - m[i] * gz.samples()[i]).norm();
            residual = residual.max(h_prime(g.samples()[i]).norm() * chart);
            fd_residual = fd_residual.max((fzb.samples()[i] - m[i] * fz.samples()[i]).norm());
        }
    }
    let jet_defect = match jets {
        Some(j) => {
            let diff = out.zip_map(f, |a, b| a - b)?;
            jets_at(&diff, j, Some(g))?.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
        }
        None => 0.0,
    };
    Ok(FiberReport { sup_error, residual, fd_residual, jet_defect, correction_sup })
}

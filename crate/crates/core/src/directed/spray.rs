//! Period-dominating sprays built from exact cone-tangent flows, and
//! Newton's method on the spray parameters.

use nalgebra::{DMatrix, DVector};

use super::cone::{check_components, ConeSpec, Generator};
use super::periods::HomologyCycle;
use crate::grid::{ComplexGrid, Lattice};
use crate::linalg::{min_norm_solve, singular_values};
use crate::{Error, Result, C64};

/// Default floor for the smallest singular value of the period Jacobian.
pub const DEFAULT_DOMINATION_THRESHOLD: f64 = 1e-8;

/// Largest `|ζ_k|` Newton may reach before giving up.
pub const DEFAULT_FLOW_RADIUS: f64 = 1.0;

/// Newton step halvings before a correction is declared failed.
pub const MAX_HALVINGS: usize = 30;

/// Which periods are driven to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodMode {
    Full,
    RealOnly,
}

/// `monomials[k] = z^k`, `k < count`.
pub fn monomial_multipliers(lat: Lattice, count: usize) -> Vec<ComplexGrid> {
    (0..count).map(|k| ComplexGrid::from_fn(lat, move |z| z.powu(k as u32))).collect()
}

/// `Ψ(ζ)(x) = φ^1_{ζ_1 h_1(x)} ∘ ... ∘ φ^N_{ζ_N h_N(x)} (f(x))`, one
/// coordinate per (generator, multiplier) pair.
#[derive(Clone, Debug)]
pub struct PeriodSpray {
    base: Vec<ComplexGrid>,
    cone: ConeSpec,
    theta: ComplexGrid,
    cycles: Vec<HomologyCycle>,
    multipliers: Vec<ComplexGrid>,
    coords: Vec<(Generator, usize)>,
}

impl PeriodSpray {
    /// Number of spray parameters `N`.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn base(&self) -> &[ComplexGrid] {
        &self.base
    }

    pub fn cone(&self) -> ConeSpec {
        self.cone
    }

    pub fn cycles(&self) -> &[HomologyCycle] {
        &self.cycles
    }

    pub fn theta(&self) -> &ComplexGrid {
        &self.theta
    }

    /// The spray with base field `f` and the same flows, multipliers and cycles.
    pub fn rebased(&self, f: Vec<ComplexGrid>) -> Result<PeriodSpray> {
        check_components(&f, self.cone)?;
        self.base[0].lattice().check_compatible(f[0].lattice())?;
        Ok(PeriodSpray { base: f, ..self.clone() })
    }

    fn point(&self, k: usize) -> Vec<C64> {
        self.base.iter().map(|g| g.samples()[k]).collect()
    }

    fn eval_node(&self, zeta: &[C64], k: usize, out: &mut [C64]) {
        out.iter_mut().zip(&self.base).for_each(|(o, g)| *o = g.samples()[k]);
        for (c, &(gen, m)) in self.coords.iter().enumerate().rev() {
            if zeta[c] != C64::new(0.0, 0.0) {
                gen.flow(zeta[c] * self.multipliers[m].samples()[k], out);
            }
        }
    }

    /// Deformed field on every lattice node; `ζ = 0` returns the base bit-exactly.
    pub fn apply(&self, zeta: &[C64]) -> Result<Vec<ComplexGrid>> {
        self.check_len(zeta)?;
        let lat = *self.base[0].lattice();
        let n = self.base.len();
        let mut cols = vec![Vec::with_capacity(lat.len()); n];
        let mut z = vec![C64::new(0.0, 0.0); n];
        for k in 0..lat.len() {
            self.eval_node(zeta, k, &mut z);
            for (col, v) in cols.iter_mut().zip(&z) {
                col.push(*v);
            }
        }
        cols.into_iter().map(|c| self.base[0].with_samples(c)).collect()
    }

    fn check_len(&self, zeta: &[C64]) -> Result<()> {
        if zeta.len() != self.len() {
            return Err(Error::Dimension(format!("spray has {} parameters, got {}", self.len(), zeta.len())));
        }
        Ok(())
    }

    /// Periods of `Ψ(ζ)`, `m x n`.
    pub fn periods(&self, zeta: &[C64]) -> Result<DMatrix<C64>> {
        self.check_len(zeta)?;
        let lat = *self.base[0].lattice();
        let n = self.base.len();
        let ts = self.theta.samples();
        let mut out = DMatrix::zeros(self.cycles.len(), n);
        let mut z = vec![C64::new(0.0, 0.0); n];
        for (j, cycle) in self.cycles.iter().enumerate() {
            let vals: Vec<Vec<C64>> = cycle
                .nodes()
                .iter()
                .map(|&k| {
                    self.eval_node(zeta, k, &mut z);
                    z.iter().map(|v| v * ts[k]).collect()
                })
                .collect();
            for i in 0..n {
                out[(j, i)] = trapezoid_values(&lat, cycle.nodes(), |p| vals[p][i]);
            }
        }
        Ok(out)
    }

    /// `∂ periods / ∂ζ` at `ζ`: `(m n) x N`, row `j n + i` for cycle `j`, component `i`.
    pub fn jacobian(&self, zeta: &[C64]) -> Result<DMatrix<C64>> {
        self.check_len(zeta)?;
        let lat = *self.base[0].lattice();
        let n = self.base.len();
        let nn = self.len();
        let ts = self.theta.samples();
        let mut out = DMatrix::zeros(self.cycles.len() * n, nn);
        for (j, cycle) in self.cycles.iter().enumerate() {
            // d[p][c] = dΨ/dζ_c at the p-th cycle node (times θ).
            let d: Vec<Vec<Vec<C64>>> = cycle.nodes().iter().map(|&k| self.node_jacobian(zeta, k, ts[k])).collect();
            for c in 0..nn {
                for i in 0..n {
                    out[(j * n + i, c)] = trapezoid_values(&lat, cycle.nodes(), |p| d[p][c][i]);
                }
            }
        }
        Ok(out)
    }

    fn node_jacobian(&self, zeta: &[C64], k: usize, theta: C64) -> Vec<Vec<C64>> {
        let nn = self.len();
        let n = self.base.len();
        // suffix[c] = φ^c ∘ ... ∘ φ^N (f); suffix[nn] = f.
        let mut suffix = vec![self.point(k); nn + 1];
        for c in (0..nn).rev() {
            let mut v = suffix[c + 1].clone();
            let (gen, m) = self.coords[c];
            gen.flow(zeta[c] * self.multipliers[m].samples()[k], &mut v);
            suffix[c] = v;
        }
        let mut out = Vec::with_capacity(nn);
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        for c in 0..nn {
            let (gen, m) = self.coords[c];
            let h = self.multipliers[m].samples()[k];
            gen.apply(&suffix[c], &mut tmp);
            let mut v: Vec<C64> = tmp.iter().map(|t| t * h).collect();
            for p in (0..c).rev() {
                let (g, mm) = self.coords[p];
                g.flow(zeta[p] * self.multipliers[mm].samples()[k], &mut v);
            }
            v.iter_mut().for_each(|x| *x *= theta);
            out.push(v);
        }
        out
    }

    /// Largest defining-polynomial residual of `Ψ(ζ)` over the mask.
    pub fn cone_residual(&self, zeta: &[C64]) -> f64 {
        let mut z = vec![C64::new(0.0, 0.0); self.base.len()];
        self.base[0]
            .masked_indices()
            .map(|k| {
                self.eval_node(zeta, k, &mut z);
                self.cone.defining_residual(&z)
            })
            .fold(0.0, f64::max)
    }
}

fn trapezoid_values(lat: &Lattice, nodes: &[usize], g: impl Fn(usize) -> C64) -> C64 {
    // Positions in `nodes` rather than node indices.
    let pos: Vec<usize> = (0..nodes.len()).collect();
    let z: Vec<C64> = nodes.iter().map(|&k| lat.node_at(k)).collect();
    pos.windows(2).map(|w| (z[w[1]] - z[w[0]]) * 0.5 * (g(w[0]) + g(w[1]))).sum()
}

/// Builds the spray and checks that its period Jacobian at `ζ = 0` has full
/// row rank with smallest singular value above `threshold`.
pub fn build_period_spray(
    f: &[ComplexGrid],
    cone: ConeSpec,
    theta: &ComplexGrid,
    cycles: &[HomologyCycle],
    multipliers: &[ComplexGrid],
    threshold: f64,
) -> Result<PeriodSpray> {
    check_components(f, cone)?;
    let lat = *f[0].lattice();
    lat.check_compatible(theta.lattice())?;
    for h in multipliers {
        lat.check_compatible(h.lattice())?;
    }
    for (j, c) in cycles.iter().enumerate() {
        if let Some(&k) = c.nodes().iter().find(|&&k| k >= lat.len() || !f[0].mask()[k]) {
            return Err(Error::Topology(format!("cycle {j} touches masked-out node {k}")));
        }
    }
    let coords: Vec<(Generator, usize)> = cone
        .generators()
        .into_iter()
        .flat_map(|g| (0..multipliers.len()).map(move |m| (g, m)))
        .collect();
    let rows = cycles.len() * f.len();
    if coords.len() < rows {
        return Err(Error::Domination { sigma_min: 0.0, threshold });
    }
    let spray = PeriodSpray {
        base: f.to_vec(),
        cone,
        theta: theta.clone(),
        cycles: cycles.to_vec(),
        multipliers: multipliers.to_vec(),
        coords,
    };
    if rows > 0 {
        let sv = singular_values(spray.jacobian(&vec![C64::new(0.0, 0.0); spray.len()])?);
        let sigma_min = sv.get(rows - 1).copied().unwrap_or(0.0);
        if !(sigma_min > threshold) {
            return Err(Error::Domination { sigma_min, threshold });
        }
    }
    Ok(spray)
}

/// Result of [`kill_periods`].
#[derive(Clone, Debug)]
pub struct PeriodCorrection {
    pub field: Vec<ComplexGrid>,
    pub zeta: Vec<C64>,
    pub iterations: usize,
    pub periods: DMatrix<C64>,
    /// Largest targeted period entry (all entries, or real parts) at the end.
    pub residual: f64,
    /// Largest defining-polynomial residual over all accepted iterates.
    pub max_cone_residual: f64,
    /// Targeted residual after each accepted iterate, starting with `ζ = 0`.
    pub history: Vec<f64>,
}

fn target(p: &DMatrix<C64>, mode: PeriodMode) -> f64 {
    p.iter()
        .map(|v| match mode {
            PeriodMode::Full => v.norm(),
            PeriodMode::RealOnly => v.re.abs(),
        })
        .fold(0.0, f64::max)
}

/// Damped Newton on `ζ` driving the targeted periods of `Ψ(ζ)` below `tol`.
///
/// Steps are minimum-norm least-squares solutions (real in `(Re ζ, Im ζ)`
/// for [`PeriodMode::RealOnly`]), halved up to [`MAX_HALVINGS`] times until
/// the residual decreases. Fails with [`Error::Correction`] when no halving
/// helps, when `|ζ|` exceeds `radius`, or after `max_iter` steps.
pub fn kill_periods(
    spray: &PeriodSpray,
    mode: PeriodMode,
    tol: f64,
    max_iter: usize,
    radius: f64,
) -> Result<PeriodCorrection> {
    let nn = spray.len();
    let mut zeta = vec![C64::new(0.0, 0.0); nn];
    let mut p = spray.periods(&zeta)?;
    let mut r = target(&p, mode);
    let mut history = vec![r];
    let mut max_cone = spray.cone_residual(&zeta);
    let mut iterations = 0;
    while !(r < tol) {
        if iterations == max_iter {
            return Err(Error::Correction { reason: format!("no convergence in {max_iter} Newton steps (residual {r:e})"), zeta });
        }
        let j = spray.jacobian(&zeta)?;
        let rows = j.nrows();
        let step: Vec<C64> = match mode {
            PeriodMode::Full => {
                let b = DVector::from_iterator(rows, (0..rows).map(|q| -p[(q / p.ncols(), q % p.ncols())]));
                min_norm_solve(j, &b, 1e-14).x.iter().copied().collect()
            }
            PeriodMode::RealOnly => {
                let mut a = DMatrix::<f64>::zeros(rows, 2 * nn);
                for q in 0..rows {
                    for c in 0..nn {
                        a[(q, c)] = j[(q, c)].re;
                        a[(q, nn + c)] = -j[(q, c)].im;
                    }
                }
                let b = DVector::from_iterator(rows, (0..rows).map(|q| -p[(q / p.ncols(), q % p.ncols())].re));
                let x = min_norm_solve(a, &b, 1e-14).x;
                (0..nn).map(|c| C64::new(x[c], x[nn + c])).collect()
            }
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<C64> = zeta.iter().zip(&step).map(|(z, s)| z + s * lambda).collect();
            if trial.iter().any(|z| !(z.norm() <= radius)) {
                lambda *= 0.5;
                continue;
            }
            let pt = spray.periods(&trial)?;
            let rt = target(&pt, mode);
            if rt < r {
                accepted = Some((trial, pt, rt));
                break;
            }
            lambda *= 0.5;
        }
        let Some((trial, pt, rt)) = accepted else {
            return Err(Error::Correction { reason: format!("damped Newton step failed to reduce residual {r:e}"), zeta });
        };
        zeta = trial;
        p = pt;
        r = rt;
        iterations += 1;
        history.push(r);
        max_cone = max_cone.max(spray.cone_residual(&zeta));
    }
    Ok(PeriodCorrection {
        field: spray.apply(&zeta)?,
        zeta,
        iterations,
        periods: p,
        residual: r,
        max_cone_residual: max_cone,
        history,
    })
}

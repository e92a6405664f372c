//! Post-composition of a chart with holomorphic flows so that prescribed
//! points are fixed.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::ConformalChart;
use crate::interp::Bicubic;
use crate::{Error, Result, C64};

/// Largest displacement accepted, as a fraction of the smallest distance
/// between fixed points.
pub const DISPLACEMENT_FRACTION: f64 = 0.25;

/// Distinct points to be fixed by a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointSet {
    points: Vec<C64>,
}

impl FixedPointSet {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        for (i, a) in points.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Domain(format!("fixed point {i} is not finite")));
            }
            for b in &points[..i] {
                if a == b {
                    return Err(Error::Domain(format!("fixed point {a} is repeated")));
                }
            }
        }
        Ok(FixedPointSet { points })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[..i] {
                d = d.min((a - b).norm());
            }
        }
        d
    }

    /// `v_j(z) = prod_{i != j} (z - a_i)`.
    fn field(&self, j: usize, z: C64) -> C64 {
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .fold(C64::new(1.0, 0.0), |acc, (_, a)| acc * (z - a))
    }
}

fn rk4(points: &FixedPointSet, j: usize, t: C64, z: C64, steps: usize) -> C64 {
    let dt = 1.0 / steps as f64;
    let f = |w: C64| t * points.field(j, w);
    let mut w = z;
    for _ in 0..steps {
        let k1 = f(w);
        let k2 = f(w + 0.5 * dt * k1);
        let k3 = f(w + 0.5 * dt * k2);
        let k4 = f(w + dt * k3);
        w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    w
}

/// Time-`t` map of the flow of `v_j` (complex time), applied to `z`.
///
/// One and two points have closed forms (translation and a complex
/// dilation about the other point). Otherwise RK4 is run with step doubling
/// until two resolutions agree to 1e-15 relative, and the Richardson
/// combination of the last pair is returned.
pub fn flow(points: &FixedPointSet, j: usize, t: C64, z: C64) -> C64 {
    if t == C64::new(0.0, 0.0) {
        return z;
    }
    match points.len() {
        1 => z + t,
        2 => {
            let other = points.points[1 - j];
            other + (z - other) * t.exp()
        }
        _ => {
            let mut steps = 1;
            let mut coarse = rk4(points, j, t, z, steps);
            loop {
                let fine = rk4(points, j, t, z, 2 * steps);
                let extrapolated = fine + (fine - coarse) / 15.0;
                if (fine - coarse).norm() <= 1e-15 * (1.0 + fine.norm()) || steps >= 1 << 16 {
                    return extrapolated;
                }
                coarse = fine;
                steps *= 2;
            }
        }
    }
}

/// `Ψ_t^{-1}(w) = ψ_{m,-t_m} ∘ … ∘ ψ_{1,-t_1}(w)`.
fn inverse_flow(points: &FixedPointSet, t: &[C64], w: C64) -> C64 {
    t.iter()
        .enumerate()
        .fold(w, |acc, (j, tj)| flow(points, j, -tj, acc))
}

fn defects(points: &FixedPointSet, t: &[C64], targets: &[C64]) -> Vec<C64> {
    targets
        .iter()
        .zip(points.points())
        .map(|(w, a)| inverse_flow(points, t, *w) - a)
        .collect()
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Post-composes the chart with `Ψ_t^{-1}`, with `t` found by damped Newton
/// so that every fixed point is mapped to itself within `tol`.
///
/// Returns the normalised chart and the flow times.
pub fn normalize_with_times(
    chart: &ConformalChart,
    fixed: &FixedPointSet,
    tol: f64,
) -> Result<(ConformalChart, Vec<C64>)> {
    if fixed.is_empty() {
        return Err(Error::Normalization("no fixed points given".into()));
    }
    let lat = *chart.f.lattice();
    let mask = chart.f.mask();
    for a in fixed.points() {
        let (r, c) = lat
            .nearest(*a)
            .ok_or_else(|| Error::Normalization(format!("point {a} lies outside the lattice")))?;
        let ok = lat.is_interior(r, c)
            && (-1..=1).all(|dr: isize| {
                (-1..=1).all(|dc: isize| mask[lat.index((r as isize + dr) as usize, (c as isize + dc) as usize)])
            });
        if !ok {
            return Err(Error::Normalization(format!("point {a} is not one cell inside the mask")));
        }
    }
    let interp = Bicubic::new(&chart.f);
    let targets: Vec<C64> = fixed
        .points()
        .iter()
        .map(|a| interp.eval(*a).expect("point checked inside the lattice"))
        .collect();
    let displacement = targets
        .iter()
        .zip(fixed.points())
        .map(|(w, a)| (w - a).norm())
        .fold(0.0, f64::max);
    if fixed.len() > 1 && displacement > DISPLACEMENT_FRACTION * fixed.min_distance() {
        return Err(Error::Normalization(format!(
            "displacement {displacement:e} exceeds the small-time radius"
        )));
    }

    let m = fixed.len();
    let mut t = vec![C64::new(0.0, 0.0); m];
    let mut d = defects(fixed, &t, &targets);
    let mut iterations = 0;
    while max_norm(&d) > tol {
        iterations += 1;
        if iterations > 50 {
            return Err(Error::Normalization(format!(
                "Newton did not converge (defect {:e})",
                max_norm(&d)
            )));
        }
        let delta = 1e-6;
        let mut jac = DMatrix::<C64>::zeros(m, m);
        for k in 0..m {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[k] += delta;
            tm[k] -= delta;
            let (dp, dm) = (defects(fixed, &tp, &targets), defects(fixed, &tm, &targets));
            for j in 0..m {
                jac[(j, k)] = (dp[j] - dm[j]) / (2.0 * delta);
            }
        }
        let rhs = DVector::from_iterator(m, d.iter().map(|v| -v));
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Normalization("singular flow Jacobian".into()))?;
        let current = max_norm(&d);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<C64> = t.iter().zip(step.iter()).map(|(a, s)| a + s * scale).collect();
            let dt = defects(fixed, &trial, &targets);
            if max_norm(&dt) < current || max_norm(&dt) <= tol {
                t = trial;
                d = dt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            if current <= 10.0 * tol {
                break;
            }
            return Err(Error::Normalization(format!("Newton stalled at defect {current:e}")));
        }
    }
    if max_norm(&d) > tol {
        return Err(Error::Normalization(format!("final defect {:e} above {tol:e}", max_norm(&d))));
    }
    let values: Vec<C64> = chart
        .f
        .samples()
        .par_iter()
        .map(|w| inverse_flow(fixed, &t, *w))
        .collect();
    let normalised = chart.with_values(chart.f.with_samples(values)?)?;
    Ok((normalised, t))
}

/// Chart `Ψ_t^{-1} ∘ f` fixing every point of `fixed` within `tol`.
pub fn normalize_fixing_points(
    chart: &ConformalChart,
    fixed: &FixedPointSet,
    tol: f64,
) -> Result<ConformalChart> {
    normalize_with_times(chart, fixed, tol).map(|(c, _)| c)
}

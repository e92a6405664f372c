//! Cones of admissible derivative values and their linear tangent flows.

use crate::grid::ComplexGrid;
use crate::{Error, Result, C64};

/// Target cone for the derivative of a directed curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeSpec {
    /// `C^*` (dimension 1).
    PuncturedPlane,
    /// `C^n \ {0}`.
    PuncturedSpace(usize),
    /// `{z != 0 : z_1^2 + ... + z_n^2 = 0}`, `n >= 3`.
    NullQuadric(usize),
}

/// Linear vector field `z -> A z` tangent to a cone, with exact flow `exp(tA)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// `A = I`.
    Scale,
    /// `A = E_ii`.
    ScaleAxis(usize),
    /// `A = E_ji - E_ij`: complex rotation in the `(i, j)` plane.
    Rotation(usize, usize),
    /// `A = E_ij` (`i != j`): adds a multiple of `z_j` to `z_i`.
    Shear { target: usize, source: usize },
}

impl Generator {
    /// `out = A z`.
    pub fn apply(&self, z: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        match *self {
            Generator::Scale => out.copy_from_slice(z),
            Generator::ScaleAxis(i) => out[i] = z[i],
            Generator::Rotation(i, j) => {
                out[i] = -z[j];
                out[j] = z[i];
            }
            Generator::Shear { target, source } => out[target] = z[source],
        }
    }

    /// `z <- exp(t A) z`.
    pub fn flow(&self, t: C64, z: &mut [C64]) {
        match *self {
            Generator::Scale => {
                let e = t.exp();
                z.iter_mut().for_each(|v| *v *= e);
            }
            Generator::ScaleAxis(i) => z[i] *= t.exp(),
            Generator::Rotation(i, j) => {
                let (c, s) = (t.cos(), t.sin());
                let (a, b) = (z[i], z[j]);
                z[i] = c * a - s * b;
                z[j] = s * a + c * b;
            }
            Generator::Shear { target, source } => {
                let add = t * z[source];
                z[target] += add;
            }
        }
    }
}

impl ConeSpec {
    pub fn null_quadric(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(format!("null quadric needs n >= 3, got {n}")));
        }
        Ok(ConeSpec::NullQuadric(n))
    }

    pub fn punctured_space(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("punctured space needs n >= 1".into()));
        }
        Ok(ConeSpec::PuncturedSpace(n))
    }

    pub fn dimension(&self) -> usize {
        match *self {
            ConeSpec::PuncturedPlane => 1,
            ConeSpec::PuncturedSpace(n) | ConeSpec::NullQuadric(n) => n,
        }
    }

    /// `|z_1^2 + ... + z_n^2|` for the null quadric, 0 otherwise.
    pub fn defining_residual(&self, z: &[C64]) -> f64 {
        match self {
            ConeSpec::NullQuadric(_) => z.iter().map(|v| v * v).sum::<C64>().norm(),
            _ => 0.0,
        }
    }

    pub fn contains(&self, z: &[C64], tol: f64) -> bool {
        z.len() == self.dimension() && z.iter().any(|v| v.norm() > 0.0) && self.defining_residual(z) < tol
    }

    /// Tangent generators: scaling and coordinate rotations for the null
    /// quadric; axis scalings and shears for `C^n \ {0}`.
    pub fn generators(&self) -> Vec<Generator> {
        match *self {
            ConeSpec::PuncturedPlane => vec![Generator::Scale],
            ConeSpec::NullQuadric(n) => {
                let mut g = vec![Generator::Scale];
                for i in 0..n {
                    for j in i + 1..n {
                        g.push(Generator::Rotation(i, j));
                    }
                }
                g
            }
            ConeSpec::PuncturedSpace(n) => {
                let mut g: Vec<Generator> = (0..n).map(Generator::ScaleAxis).collect();
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            g.push(Generator::Shear { target: i, source: j });
                        }
                    }
                }
                g
            }
        }
    }

    /// `|d/dt Q(z + t A z)|` at `t = 0` for the defining polynomial `Q`.
    pub fn tangency_defect(&self, g: Generator, z: &[C64]) -> f64 {
        match self {
            ConeSpec::NullQuadric(_) => {
                let mut az = vec![C64::new(0.0, 0.0); z.len()];
                g.apply(z, &mut az);
                (2.0 * z.iter().zip(&az).map(|(a, b)| a * b).sum::<C64>()).norm()
            }
            _ => 0.0,
        }
    }
}

/// Outcome of [`check_cone_membership`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub max_residual: f64,
    /// Node of the largest residual.
    pub worst_node: usize,
    pub min_modulus: f64,
    pub pass: bool,
}

/// Defining-polynomial residual and smallest `|f|` over the mask nodes of `f[0]`.
pub fn check_cone_membership(f: &[ComplexGrid], cone: ConeSpec, tol: f64) -> Result<ConeReport> {
    check_components(f, cone)?;
    let mut report = ConeReport { max_residual: 0.0, worst_node: 0, min_modulus: f64::INFINITY, pass: false };
    let mut z = vec![C64::new(0.0, 0.0); f.len()];
    for k in f[0].masked_indices() {
        for (v, g) in z.iter_mut().zip(f) {
            *v = g.samples()[k];
        }
        let r = cone.defining_residual(&z);
        if !(r <= report.max_residual) {
            report.max_residual = r;
            report.worst_node = k;
        }
        report.min_modulus = report.min_modulus.min(z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt());
    }
    report.pass = report.max_residual < tol && report.min_modulus > 0.0;
    Ok(report)
}

pub(crate) fn check_components(f: &[ComplexGrid], cone: ConeSpec) -> Result<()> {
    if f.len() != cone.dimension() {
        return Err(Error::Dimension(format!("{} components for a cone in dimension {}", f.len(), cone.dimension())));
    }
    for g in &f[1..] {
        f[0].lattice().check_compatible(g.lattice())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;

    #[test]
    fn flows_preserve_the_quadric_and_generators_are_tangent() {
        let cone = ConeSpec::null_quadric(3).unwrap();
        let z0 = C64::new(0.3, -0.8);
        let base = [1.0 - z0 * z0, C64::i() * (1.0 + z0 * z0), 2.0 * z0];
        for g in cone.generators() {
            assert!(cone.tangency_defect(g, &base) < 1e-14);
            let mut z = base;
            g.flow(C64::new(0.4, -0.7), &mut z);
            assert!(cone.defining_residual(&z) < 1e-13, "{g:?}");
        }
    }

    #[test]
    fn constant_unit_vector() {
        let lat = Lattice::centered_square(1.0, 5).unwrap();
        let f = vec![ComplexGrid::filled(lat, C64::new(1.0, 0.0)), ComplexGrid::zeros(lat), ComplexGrid::zeros(lat)];
        let null = check_cone_membership(&f, ConeSpec::NullQuadric(3), 1e-10).unwrap();
        assert_eq!(null.max_residual, 1.0);
        assert!(!null.pass);
        assert!(check_cone_membership(&f, ConeSpec::PuncturedSpace(3), 1e-10).unwrap().pass);
    }

    #[test]
    fn flow_derivative_matches_generator() {
        let z = [C64::new(0.2, 1.0), C64::new(-0.5, 0.3), C64::new(0.9, -0.1)];
        let t = 1e-7;
        for g in ConeSpec::PuncturedSpace(3).generators().into_iter().chain(ConeSpec::NullQuadric(3).generators()) {
            let mut moved = z;
            g.flow(C64::new(t, 0.0), &mut moved);
            let mut az = [C64::new(0.0, 0.0); 3];
            g.apply(&z, &mut az);
            for i in 0..3 {
                assert!(((moved[i] - z[i]) / t - az[i]).norm() < 1e-6);
            }
        }
    }
}

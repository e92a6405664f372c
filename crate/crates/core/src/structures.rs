//! Metric coefficients, almost complex structures and Beltrami coefficients,
//! and the node-wise conversions between them.
//!
//! A metric `E dx^2 + 2F dx dy + G dy^2` determines the rotation by a right
//! angle `[J] = (1/sqrt(EG - F^2)) (-F, -G; E, F)`. Writing `b = -j11` and
//! `c = -j12`, the Beltrami coefficient is `mu = (1 - c + ib) / (1 + c + ib)`,
//! and conversely `|dz + mu dzbar|^2` expands to `E = |1 + mu|^2`,
//! `F = 2 Im mu`, `G = |1 - mu|^2`.

use rayon::prelude::*;

use crate::grid::{ComplexGrid, Grid, Lattice, RealGrid};
use crate::{Error, Result, C64};

/// Tolerance for `J^2 = -I` and `tr J = 0`, scaled by the squared entry size.
pub const ACS_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    pub e: RealGrid,
    pub f: RealGrid,
    pub g: RealGrid,
}

impl MetricField {
    /// Validates compatibility and positive definiteness on mask-true nodes.
    pub fn new(e: RealGrid, f: RealGrid, g: RealGrid) -> Result<Self> {
        e.lattice().check_compatible(f.lattice())?;
        e.lattice().check_compatible(g.lattice())?;
        for k in e.masked_indices() {
            let (ee, ff, gg) = (e.samples()[k], f.samples()[k], g.samples()[k]);
            let delta = ee * gg - ff * ff;
            if !(ee > 0.0 && delta > 0.0) {
                return Err(Error::Definiteness { index: k, e: ee, delta });
            }
        }
        Ok(MetricField { e, f, g })
    }

    pub fn lattice(&self) -> &Lattice {
        self.e.lattice()
    }

    /// Multiplies the metric node-wise by a positive factor.
    pub fn scaled(&self, s: &RealGrid) -> Result<MetricField> {
        let mul = |a: &RealGrid| a.zip_map(s, |x, y| x * y);
        MetricField::new(mul(&self.e)?, mul(&self.f)?, mul(&self.g)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcsField {
    pub j11: RealGrid,
    pub j12: RealGrid,
    pub j21: RealGrid,
    pub j22: RealGrid,
}

impl AcsField {
    /// Validates `J^2 = -I` and `tr J = 0` on mask-true nodes.
    pub fn new(j11: RealGrid, j12: RealGrid, j21: RealGrid, j22: RealGrid) -> Result<Self> {
        for other in [&j12, &j21, &j22] {
            j11.lattice().check_compatible(other.lattice())?;
        }
        let field = AcsField { j11, j12, j21, j22 };
        for k in field.j11.masked_indices() {
            let m = field.at(k);
            let scale = 1.0 + m.iter().map(|v| v * v).sum::<f64>();
            let tol = ACS_TOLERANCE * scale;
            let sq = [
                m[0] * m[0] + m[1] * m[2] + 1.0,
                m[0] * m[1] + m[1] * m[3],
                m[2] * m[0] + m[3] * m[2],
                m[2] * m[1] + m[3] * m[3] + 1.0,
            ];
            if sq.iter().any(|v| !(v.abs() <= tol)) {
                return Err(Error::NotComplexStructure {
                    index: k,
                    reason: format!("J^2 + I has entries {sq:?}"),
                });
            }
            if !((m[0] + m[3]).abs() <= tol) {
                return Err(Error::NotComplexStructure {
                    index: k,
                    reason: format!("trace {}", m[0] + m[3]),
                });
            }
        }
        Ok(field)
    }

    /// The standard structure `(0, -1; 1, 0)` on every node.
    pub fn standard(lattice: Lattice) -> Self {
        AcsField {
            j11: Grid::filled(lattice, 0.0),
            j12: Grid::filled(lattice, -1.0),
            j21: Grid::filled(lattice, 1.0),
            j22: Grid::filled(lattice, 0.0),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        self.j11.lattice()
    }

    /// Entries `[j11, j12, j21, j22]` at a flat index.
    pub fn at(&self, k: usize) -> [f64; 4] {
        [
            self.j11.samples()[k],
            self.j12.samples()[k],
            self.j21.samples()[k],
            self.j22.samples()[k],
        ]
    }
}

/// A Beltrami coefficient with `|mu| < 1` on the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct BeltramiField {
    mu: ComplexGrid,
    sup: f64,
}

impl BeltramiField {
    /// Accepts `mu` if it is finite everywhere and `sup |mu| < 1` over mask-true nodes.
    pub fn new(mu: ComplexGrid) -> Result<Self> {
        let mut sup: f64 = 0.0;
        for (k, v) in mu.samples().iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                let (row, col) = mu.lattice().row_col(k);
                return Err(Error::NonFinite { row, col, z: mu.lattice().node(row, col) });
            }
            if mu.mask()[k] {
                let m = v.norm();
                if !(m < 1.0) {
                    return Err(Error::NotContractive { index: k, modulus: m });
                }
                sup = sup.max(m);
            }
        }
        Ok(BeltramiField { mu, sup })
    }

    pub fn zero(lattice: Lattice) -> Self {
        BeltramiField { mu: ComplexGrid::zeros(lattice), sup: 0.0 }
    }

    pub fn mu(&self) -> &ComplexGrid {
        &self.mu
    }

    pub fn into_grid(self) -> ComplexGrid {
        self.mu
    }

    pub fn lattice(&self) -> &Lattice {
        self.mu.lattice()
    }

    /// `sup |mu|` over mask-true nodes, recorded at construction.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// `sup |mu|` over every node, including the extension collar.
    pub fn sup_all(&self) -> f64 {
        self.mu.samples().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.mu.samples().iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }
}

/// `e g - f^2` with one rounding of the cross term compensated.
fn det2(e: f64, g: f64, f: f64) -> f64 {
    let ff = f * f;
    let err = f.mul_add(f, -ff);
    e.mul_add(g, -ff) - err
}

/// `[J]` of a positive definite metric. Nodes outside the mask with an
/// indefinite metric get the standard structure.
pub fn metric_to_acs(m: &MetricField) -> Result<AcsField> {
    let lat = *m.lattice();
    let mask = m.e.mask();
    let entries: Vec<Result<[f64; 4]>> = (0..lat.len())
        .into_par_iter()
        .map(|k| {
            let (e, f, g) = (m.e.samples()[k], m.f.samples()[k], m.g.samples()[k]);
            let delta = det2(e, g, f);
            if !(e > 0.0 && delta > 0.0) {
                if mask[k] {
                    return Err(Error::Definiteness { index: k, e, delta });
                }
                return Ok([0.0, -1.0, 1.0, 0.0]);
            }
            let s = 1.0 / delta.sqrt();
            Ok([-f * s, -g * s, e * s, f * s])
        })
        .collect();
    let mut cols = [
        Vec::with_capacity(lat.len()),
        Vec::with_capacity(lat.len()),
        Vec::with_capacity(lat.len()),
        Vec::with_capacity(lat.len()),
    ];
    for entry in entries {
        let v = entry?;
        for (c, x) in cols.iter_mut().zip(v) {
            c.push(x);
        }
    }
    let [a, b, c, d] = cols;
    let mk = |v: Vec<f64>| Grid::new(lat, v, mask.to_vec());
    AcsField::new(mk(a)?, mk(b)?, mk(c)?, mk(d)?)
}

/// Beltrami coefficient of a positively oriented structure (`c = -j12 > 0`).
pub fn acs_to_beltrami(a: &AcsField) -> Result<BeltramiField> {
    let lat = *a.lattice();
    let mask = a.j11.mask();
    let values: Vec<Result<C64>> = (0..lat.len())
        .into_par_iter()
        .map(|k| {
            let b = -a.j11.samples()[k];
            let c = -a.j12.samples()[k];
            if !(c > 0.0) {
                if mask[k] {
                    return Err(Error::Orientation { index: k, c });
                }
                return Ok(C64::new(0.0, 0.0));
            }
            Ok(C64::new(1.0 - c, b) / C64::new(1.0 + c, b))
        })
        .collect();
    let mu = values.into_iter().collect::<Result<Vec<_>>>()?;
    BeltramiField::new(Grid::new(lat, mu, mask.to_vec())?)
}

/// Expands `|dz + mu dzbar|^2` (conformal factor 1).
pub fn beltrami_to_metric(mu: &BeltramiField) -> MetricField {
    let g = mu.mu();
    MetricField {
        e: g.map(|m| (1.0 + m).norm_sqr()),
        f: g.map(|m| 2.0 * m.im),
        g: g.map(|m| (1.0 - m).norm_sqr()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> Lattice {
        Lattice::new(C64::new(0.0, 0.0), 1.0, 2, 2).unwrap()
    }

    fn metric(e: f64, f: f64, g: f64) -> MetricField {
        let l = lat();
        MetricField::new(Grid::filled(l, e), Grid::filled(l, f), Grid::filled(l, g)).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn standard_metric_gives_standard_structure() {
        for s in [1.0, 4.0] {
            let j = metric_to_acs(&metric(s, 0.0, s)).unwrap();
            assert_eq!(j.at(0), [0.0, -1.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn anisotropic_metric() {
        let j = metric_to_acs(&metric(2.25, 0.0, 0.25)).unwrap();
        let m = j.at(3);
        assert!(close(m[0], 0.0) && close(m[1], -1.0 / 3.0) && close(m[2], 3.0) && close(m[3], 0.0));
        let mu = acs_to_beltrami(&j).unwrap();
        assert!((mu.mu().samples()[0] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn beltrami_from_bc() {
        let l = lat();
        let acs = |b: f64, c: f64| {
            // J = (-b, -c; (1 + b^2)/c, b)
            AcsField::new(
                Grid::filled(l, -b),
                Grid::filled(l, -c),
                Grid::filled(l, (1.0 + b * b) / c),
                Grid::filled(l, b),
            )
            .unwrap()
        };
        let mu = acs_to_beltrami(&acs(0.0, 1.0)).unwrap();
        assert_eq!(mu.mu().samples()[0], C64::new(0.0, 0.0));
        let mu = acs_to_beltrami(&acs(1.0, 1.0)).unwrap();
        let v = mu.mu().samples()[0];
        assert!((v - C64::new(0.2, 0.4)).norm() < 1e-15);
        assert!((v.norm() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(acs_to_beltrami(&acs(0.0, -1.0)), Err(Error::Orientation { .. })));
    }

    #[test]
    fn metric_expansion() {
        let l = lat();
        let cases = [
            (C64::new(0.0, 0.0), (1.0, 0.0, 1.0)),
            (C64::new(0.5, 0.0), (2.25, 0.0, 0.25)),
            (C64::new(0.0, 0.5), (1.25, 1.0, 1.25)),
        ];
        for (m, (e, f, g)) in cases {
            let met = beltrami_to_metric(&BeltramiField::new(Grid::filled(l, m)).unwrap());
            assert!(close(met.e.samples()[0], e));
            assert!(close(met.f.samples()[0], f));
            assert!(close(met.g.samples()[0], g));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let l = lat();
        let bad = MetricField::new(Grid::filled(l, 1.0), Grid::filled(l, 2.0), Grid::filled(l, 1.0));
        assert!(matches!(bad, Err(Error::Definiteness { index: 0, .. })));
        let not_j = AcsField::new(
            Grid::filled(l, 0.0),
            Grid::filled(l, -1.0),
            Grid::filled(l, 2.0),
            Grid::filled(l, 0.0),
        );
        assert!(matches!(not_j, Err(Error::NotComplexStructure { .. })));
        assert!(BeltramiField::new(Grid::filled(l, C64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn round_trip_half_i() {
        let l = lat();
        let mu = BeltramiField::new(Grid::filled(l, C64::new(0.0, 0.5))).unwrap();
        let back = acs_to_beltrami(&metric_to_acs(&beltrami_to_metric(&mu)).unwrap()).unwrap();
        assert!((back.mu().samples()[0] - C64::new(0.0, 0.5)).norm() < 1e-15);
    }
}

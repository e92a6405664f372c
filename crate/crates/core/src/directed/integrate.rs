//! Path integration of 1-forms along a breadth-first spanning tree.

use std::collections::VecDeque;

use super::minimal::partials4;
use crate::grid::{ComplexGrid, Lattice};
use crate::topology::is_connected4;
use crate::{Error, Result, C64};

/// Integrated components and loop-closure diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub h: Vec<ComplexGrid>,
    /// Largest `|h_v - h_u - ∫_u^v|` over edges outside the spanning tree.
    pub loop_defect: f64,
    /// Same with real parts only.
    pub real_loop_defect: f64,
}

/// Per-edge quadrature of `G dw` with `G = g θ`.
struct EdgeRule<'a> {
    lat: Lattice,
    g: Vec<C64>,
    gx: Vec<C64>,
    gy: Vec<C64>,
    w: Option<(&'a ComplexGrid, Vec<C64>, Vec<C64>)>,
}

impl<'a> EdgeRule<'a> {
    fn new(g: &ComplexGrid, theta: &ComplexGrid, w: Option<&'a ComplexGrid>) -> Result<Self> {
        let gt = g.zip_map(theta, |a, b| a * b)?;
        let (gx, gy) = partials4(&gt)?;
        let w = match w {
            Some(c) => {
                let (wx, wy) = partials4(&c.clone().with_mask(g.mask().to_vec())?)?;
                Some((c, wx, wy))
            }
            None => None,
        };
        Ok(EdgeRule { lat: *g.lattice(), g: gt.into_samples(), gx, gy, w })
    }

    /// `∫_u^v G dw` for 4-adjacent `u`, `v`: trapezoid rule with the
    /// Euler-Maclaurin end correction `(Δw^2 / 12)(G'(u) - G'(v))`,
    /// `G' = dG/dw` taken along the edge with fourth-order differences.
    fn integral(&self, u: usize, v: usize) -> C64 {
        let h = self.lat.spacing;
        let nx = self.lat.nx;
        let (sign, horizontal) = if v == u + 1 {
            (1.0, true)
        } else if u == v + 1 {
            (-1.0, true)
        } else if v == u + nx {
            (1.0, false)
        } else {
            (-1.0, false)
        };
        let ds = |dx: &[C64], dy: &[C64], k: usize| sign * if horizontal { dx[k] } else { dy[k] };
        let (gu, gv) = (self.g[u], self.g[v]);
        let (dgu, dgv) = (ds(&self.gx, &self.gy, u), ds(&self.gx, &self.gy, v));
        let step = if horizontal { C64::new(sign * h, 0.0) } else { C64::new(0.0, sign * h) };
        match &self.w {
            None => step * 0.5 * (gu + gv) + step * h / 12.0 * (dgu - dgv),
            Some((w, wx, wy)) => {
                let dw = w.samples()[v] - w.samples()[u];
                let (du, dv) = (ds(wx, wy, u), ds(wx, wy, v));
                dw * 0.5 * (gu + gv) + dw * dw / 12.0 * (dgu / du - dgv / dv)
            }
        }
    }
}

/// `h_i(x) = v_i + ∫_{x_0}^x f_i θ dw` along a breadth-first spanning tree
/// of the mask of `f[0]` rooted at `basepoint`, where `w` is `coordinate`
/// (the lattice coordinate when `None`).
pub fn integrate_primitive(
    f: &[ComplexGrid],
    theta: &ComplexGrid,
    basepoint: usize,
    offset: &[C64],
    coordinate: Option<&ComplexGrid>,
) -> Result<Primitive> {
    if f.is_empty() || offset.len() != f.len() {
        return Err(Error::Dimension(format!("{} components with {} offsets", f.len(), offset.len())));
    }
    let lat = *f[0].lattice();
    for g in f {
        lat.check_compatible(g.lattice())?;
    }
    lat.check_compatible(theta.lattice())?;
    if let Some(c) = coordinate {
        lat.check_compatible(c.lattice())?;
    }
    let mask = f[0].mask();
    if basepoint >= lat.len() || !mask[basepoint] {
        return Err(Error::Domain(format!("basepoint {basepoint} is not a mask node")));
    }
    if !is_connected4(&lat, mask) {
        return Err(Error::Connectivity("integration needs a 4-connected mask".into()));
    }

    let neighbours = |k: usize| {
        let (r, c) = lat.row_col(k);
        let mut out = Vec::with_capacity(4);
        if c + 1 < lat.nx {
            out.push(k + 1);
        }
        if r + 1 < lat.ny {
            out.push(k + lat.nx);
        }
        if c > 0 {
            out.push(k - 1);
        }
        if r > 0 {
            out.push(k - lat.nx);
        }
        out
    };
    let mut parent = vec![usize::MAX; lat.len()];
    let mut order = Vec::with_capacity(lat.len());
    parent[basepoint] = basepoint;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(k) = queue.pop_front() {
        order.push(k);
        for n in neighbours(k) {
            if mask[n] && parent[n] == usize::MAX {
                parent[n] = k;
                queue.push_back(n);
            }
        }
    }

    let mut h = Vec::with_capacity(f.len());
    let mut loop_defect: f64 = 0.0;
    let mut real_loop_defect: f64 = 0.0;
    for (g, v0) in f.iter().zip(offset) {
        let g = g.clone().with_mask(mask.to_vec())?;
        let rule = EdgeRule::new(&g, theta, coordinate)?;
        let mut vals = vec![C64::new(0.0, 0.0); lat.len()];
        vals[basepoint] = *v0;
        for &k in &order[1..] {
            vals[k] = vals[parent[k]] + rule.integral(parent[k], k);
        }
        for &k in &order {
            for n in [k + 1, k + lat.nx] {
                let (r, c) = lat.row_col(k);
                let adjacent = if n == k + 1 { c + 1 < lat.nx } else { r + 1 < lat.ny };
                if !adjacent || !mask[n] || parent[n] == k || parent[k] == n {
                    continue;
                }
                let d = vals[n] - vals[k] - rule.integral(k, n);
                loop_defect = loop_defect.max(d.norm());
                real_loop_defect = real_loop_defect.max(d.re.abs());
            }
        }
        h.push(ComplexGrid::new(lat, vals, mask.to_vec())?);
    }
    Ok(Primitive { h, loop_defect, real_loop_defect })
}

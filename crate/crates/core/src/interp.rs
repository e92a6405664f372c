//! Bicubic (Catmull–Rom) interpolation of lattice samples.

use crate::grid::ComplexGrid;
use crate::C64;

#[inline]
fn weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

#[inline]
fn dweights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    [
        0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
        0.5 * (9.0 * t2 - 10.0 * t),
        0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
        0.5 * (3.0 * t2 - 2.0 * t),
    ]
}

/// Interpolant through every node of a grid (mask ignored).
///
/// Stencils that would leave the lattice use linearly continued ghost values,
/// so the outermost cell reproduces linear functions only.
pub struct Bicubic<'a> {
    grid: &'a ComplexGrid,
    reach: f64,
}

impl<'a> Bicubic<'a> {
    pub fn new(grid: &'a ComplexGrid) -> Self {
        Bicubic { grid, reach: 1e-9 }
    }

    /// Same interpolant, extended polynomially up to `cells` lattice cells
    /// beyond the rectangle using the edge cell's cubic.
    pub fn extrapolating(grid: &'a ComplexGrid, cells: f64) -> Self {
        Bicubic { grid, reach: cells.max(1e-9) }
    }

    fn locate(&self, z: C64) -> Option<(usize, usize, f64, f64)> {
        let lat = self.grid.lattice();
        let w = (z - lat.origin) / lat.spacing;
        let eps = self.reach;
        if !(w.re >= -eps && w.im >= -eps && w.re <= (lat.nx - 1) as f64 + eps && w.im <= (lat.ny - 1) as f64 + eps) {
            return None;
        }
        let c = (w.re.floor().max(0.0) as usize).min(lat.nx - 2);
        let r = (w.im.floor().max(0.0) as usize).min(lat.ny - 2);
        Some((r, c, w.re - c as f64, w.im - r as f64))
    }

    /// Node value, continued linearly past the lattice edge.
    fn at(&self, r: isize, c: isize) -> C64 {
        let lat = self.grid.lattice();
        let (ny, nx) = (lat.ny as isize, lat.nx as isize);
        if r < 0 {
            return self.at(0, c) + (self.at(0, c) - self.at(1, c)) * (-r) as f64;
        }
        if r >= ny {
            return self.at(ny - 1, c) + (self.at(ny - 1, c) - self.at(ny - 2, c)) * (r - ny + 1) as f64;
        }
        if c < 0 {
            return self.at(r, 0) + (self.at(r, 0) - self.at(r, 1)) * (-c) as f64;
        }
        if c >= nx {
            return self.at(r, nx - 1) + (self.at(r, nx - 1) - self.at(r, nx - 2)) * (c - nx + 1) as f64;
        }
        self.grid.get(r as usize, c as usize)
    }

    /// Value at `z`, or `None` outside the lattice rectangle.
    pub fn eval(&self, z: C64) -> Option<C64> {
        let (r, c, tx, ty) = self.locate(z)?;
        if tx == 0.0 && ty == 0.0 {
            return Some(self.grid.get(r, c));
        }
        let wx = weights(tx);
        let wy = weights(ty);
        let mut s = C64::new(0.0, 0.0);
        for (a, wya) in wy.iter().enumerate() {
            let mut row = C64::new(0.0, 0.0);
            for (b, wxb) in wx.iter().enumerate() {
                row += self.at(r as isize + a as isize - 1, c as isize + b as isize - 1) * wxb;
            }
            s += row * wya;
        }
        Some(s)
    }

    /// Value and partial derivatives `(f, f_x, f_y)` of the interpolant at `z`.
    pub fn eval_with_gradient(&self, z: C64) -> Option<(C64, C64, C64)> {
        let (r, c, tx, ty) = self.locate(z)?;
        let h = self.grid.lattice().spacing;
        let (wx, wy, dx, dy) = (weights(tx), weights(ty), dweights(tx), dweights(ty));
        let (mut v, mut fx, mut fy) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for a in 0..4 {
            for b in 0..4 {
                let s = self.at(r as isize + a as isize - 1, c as isize + b as isize - 1);
                v += s * (wx[b] * wy[a]);
                fx += s * (dx[b] * wy[a]);
                fy += s * (wx[b] * dy[a]);
            }
        }
        Some((v, fx / h, fy / h))
    }

    /// Solves `interpolant(z) = w` by Newton's method in the real plane,
    /// starting from `start`.
    pub fn invert(&self, w: C64, start: C64, tol: f64, max_iter: usize) -> Option<C64> {
        let mut z = start;
        for _ in 0..max_iter {
            let (v, fx, fy) = self.eval_with_gradient(z)?;
            let d = v - w;
            if d.norm() <= tol {
                return Some(z);
            }
            // [fx.re fy.re; fx.im fy.im] [dx; dy] = -[d.re; d.im]
            let det = fx.re * fy.im - fy.re * fx.im;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let sx = (-d.re * fy.im + fy.re * d.im) / det;
            let sy = (-fx.re * d.im + fx.im * d.re) / det;
            z += C64::new(sx, sy);
        }
        let (v, _, _) = self.eval_with_gradient(z)?;
        ((v - w).norm() <= tol).then_some(z)
    }
}

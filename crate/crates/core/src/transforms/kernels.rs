//! Convolution weights on a lattice with spacing `h`, indexed by the offset
//! `(ox, oy)` in cells from source node to target node.

use crate::C64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `∫∫_cell x / (x^2 + y^2)` antiderivative in both variables.
fn g1(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let at = if x == 0.0 { 0.0 } else { x * (y / x).atan() };
    0.5 * y * r2.ln() + at
}

fn rect(g: impl Fn(f64, f64) -> f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    g(x2, y2) - g(x1, y2) - g(x2, y1) + g(x1, y1)
}

/// `∫∫_cell dσ(w) / w` over the square of side `h` centred at `(ox h, oy h)`.
pub fn cell_integral_inverse(ox: i64, oy: i64, h: f64) -> C64 {
    let (cx, cy) = (ox as f64 * h, oy as f64 * h);
    let (x1, x2, y1, y2) = (cx - 0.5 * h, cx + 0.5 * h, cy - 0.5 * h, cy + 0.5 * h);
    let re = rect(g1, x1, x2, y1, y2);
    let im = rect(|x, y| g1(y, x), x1, x2, y1, y2);
    C64::new(re, -im)
}

/// `∫∫_cell dσ(w) / w^2` for off-centre cells; the centred cell is 0 in the
/// principal-value sense.
pub fn cell_integral_inverse_square(ox: i64, oy: i64, h: f64) -> C64 {
    if ox == 0 && oy == 0 {
        return C64::new(0.0, 0.0);
    }
    let (cx, cy) = (ox as f64 * h, oy as f64 * h);
    let (x1, x2, y1, y2) = (cx - 0.5 * h, cx + 0.5 * h, cy - 0.5 * h, cy + 0.5 * h);
    // ∫ dy / (x + iy) from y1 to y2
    let seg = |x: f64| {
        let a = C64::new(x, y1);
        let b = C64::new(x, y2);
        let q = b / a;
        -C64::i() * C64::new((b.norm() / a.norm()).ln(), q.arg())
    };
    -(seg(x2) - seg(x1))
}

/// Cell-averaged Cauchy–Green weight: `(1/π) ∫∫_cell dσ(w) / w`.
pub fn cauchy_weight(ox: i64, oy: i64, h: f64) -> C64 {
    cell_integral_inverse(ox, oy, h) / PI
}

/// Cell-averaged Beurling weight: `-(1/π) ∫∫_cell dσ(w) / w^2`.
pub fn beurling_weight(ox: i64, oy: i64, h: f64) -> C64 {
    -cell_integral_inverse_square(ox, oy, h) / PI
}

/// Potential kernel of the 5-point Laplacian on `Z^2`, normalised so that
/// `a(0,0) = 0` and `Δ a = δ`. Returns the table `a[m][n]` for `0 <= m, n <= max`.
pub fn lattice_potential(max: usize) -> Vec<Vec<f64>> {
    let nodes = (2 * max + 200).max(400);
    let (x, w) = gauss_legendre(nodes);
    let alpha: Vec<f64> = x.iter().map(|&t| 0.5 * PI * (t + 1.0)).collect();
    let t: Vec<f64> = alpha.iter().map(|&a| (2.0 - a.cos()).acosh()).collect();
    let weight: Vec<f64> = w
        .iter()
        .zip(&t)
        .map(|(&wi, &ti)| 0.5 * PI * wi / (2.0 * ti.sinh()) / PI)
        .collect();
    // 1 - cos(m a) e^{-n t} = 2 sin^2(m a / 2) + cos(m a) (1 - e^{-n t})
    let sin2: Vec<Vec<f64>> = (0..=max)
        .map(|m| alpha.iter().map(|&a| 2.0 * (0.5 * m as f64 * a).sin().powi(2)).collect())
        .collect();
    let cos: Vec<Vec<f64>> = (0..=max)
        .map(|m| alpha.iter().map(|&a| (m as f64 * a).cos()).collect())
        .collect();
    let decay: Vec<Vec<f64>> = (0..=max)
        .map(|n| t.iter().map(|&ti| -(-(n as f64) * ti).exp_m1()).collect())
        .collect();
    let mut out = vec![vec![0.0; max + 1]; max + 1];
    for m in 0..=max {
        for n in m..=max {
            let mut s = 0.0;
            for q in 0..nodes {
                s += weight[q] * (sin2[m][q] + cos[m][q] * decay[n][q]);
            }
            out[m][n] = s;
            out[n][m] = s;
        }
    }
    out
}

/// Weights of the lattice Cauchy pair on offsets `|ox| <= nx - 1`, `|oy| <= ny - 1`.
///
/// `G = 16 a(ox/2, oy/2)` on even offsets (0 elsewhere) satisfies
/// `D_zbar D_z G = δ / h^2` for the central-difference operators `D`.
/// The returned kernels are `E = h^2 D_z G` and `B = h^2 D_z D_z G`, stored
/// row-major over `(2 ny - 1) x (2 nx - 1)` with offset `(0, 0)` in the centre.
/// Convolution with `E` is an exact right inverse of `D_zbar` and
/// `D_z (E * φ) = B * φ` holds identically.
pub fn lattice_pair(nx: usize, ny: usize, h: f64) -> (Vec<C64>, Vec<C64>) {
    let lx = nx as i64 + 1;
    let ly = ny as i64 + 1;
    let amax = (lx.max(ly) / 2) as usize + 1;
    let a = lattice_potential(amax);
    let gw = (2 * lx + 1) as usize;
    let gh = (2 * ly + 1) as usize;
    let mut g = vec![0.0; gw * gh];
    for oy in -ly..=ly {
        if oy % 2 != 0 {
            continue;
        }
        for ox in -lx..=lx {
            if ox % 2 != 0 {
                continue;
            }
            let v = 16.0 * a[(ox.unsigned_abs() / 2) as usize][(oy.unsigned_abs() / 2) as usize];
            g[((oy + ly) as usize) * gw + (ox + lx) as usize] = v;
        }
    }
    let dz = |f: &dyn Fn(i64, i64) -> C64, ox: i64, oy: i64| -> C64 {
        let fx = (f(ox + 1, oy) - f(ox - 1, oy)) / (2.0 * h);
        let fy = (f(ox, oy + 1) - f(ox, oy - 1)) / (2.0 * h);
        0.5 * (fx - C64::i() * fy)
    };
    let gat = |ox: i64, oy: i64| C64::new(g[((oy + ly) as usize) * gw + (ox + lx) as usize], 0.0);
    // E on offsets |ox| <= nx, |oy| <= ny
    let ex = lx - 1;
    let ey = ly - 1;
    let ew = (2 * ex + 1) as usize;
    let eh = (2 * ey + 1) as usize;
    let mut e = vec![C64::new(0.0, 0.0); ew * eh];
    for oy in -ey..=ey {
        for ox in -ex..=ex {
            e[((oy + ey) as usize) * ew + (ox + ex) as usize] = dz(&gat, ox, oy);
        }
    }
    let eat = |ox: i64, oy: i64| e[((oy + ey) as usize) * ew + (ox + ex) as usize];
    let kx = ex - 1;
    let ky = ey - 1;
    let kw = (2 * kx + 1) as usize;
    let kh = (2 * ky + 1) as usize;
    let mut ek = vec![C64::new(0.0, 0.0); kw * kh];
    let mut bk = vec![C64::new(0.0, 0.0); kw * kh];
    let h2 = h * h;
    for oy in -ky..=ky {
        for ox in -kx..=kx {
            let idx = ((oy + ky) as usize) * kw + (ox + kx) as usize;
            ek[idx] = eat(ox, oy) * h2;
            bk[idx] = dz(&eat, ox, oy) * h2;
        }
    }
    (ek, bk)
}

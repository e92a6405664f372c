//! Uniform square lattices, Wirtinger derivatives, discrete Hölder norms and
//! the compactly supported extension operator.
//!
//! Samples are stored row-major: row `i` runs along the imaginary axis and
//! column `j` along the real axis, so node `(i, j)` sits at
//! `origin + spacing * (j + i·√-1)` and has flat index `i * nx + j`.

use rayon::prelude::*;

use crate::{Error, Result, C64};

/// Geometry of a rectangular lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub origin: C64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Lattice {
    pub fn new(origin: C64, spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Dimension(format!("spacing must be positive, got {spacing}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::Dimension(format!("need nx, ny >= 2, got {nx} x {ny}")));
        }
        if !origin.re.is_finite() || !origin.im.is_finite() {
            return Err(Error::Dimension("origin must be finite".into()));
        }
        Ok(Lattice { origin, spacing, nx, ny })
    }

    /// Square lattice covering `[-half_width, half_width]^2` with `n` nodes per side.
    pub fn centered_square(half_width: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("need n >= 2, got {n}")));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        Lattice::new(C64::new(-half_width, -half_width), h, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    #[inline]
    pub fn row_col(&self, index: usize) -> (usize, usize) {
        (index / self.nx, index % self.nx)
    }

    #[inline]
    pub fn node(&self, row: usize, col: usize) -> C64 {
        self.origin + C64::new(col as f64 * self.spacing, row as f64 * self.spacing)
    }

    #[inline]
    pub fn node_at(&self, index: usize) -> C64 {
        let (r, c) = self.row_col(index);
        self.node(r, c)
    }

    /// Nearest lattice node to `z`, if `z` lies within half a cell of the rectangle.
    pub fn nearest(&self, z: C64) -> Option<(usize, usize)> {
        let w = (z - self.origin) / self.spacing;
        let col = w.re.round();
        let row = w.im.round();
        if col < 0.0 || row < 0.0 || col > (self.nx - 1) as f64 || row > (self.ny - 1) as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    /// True on nodes that are not on the outermost ring.
    #[inline]
    pub fn is_interior(&self, row: usize, col: usize) -> bool {
        row > 0 && col > 0 && row + 1 < self.ny && col + 1 < self.nx
    }

    pub fn compatible(&self, other: &Lattice) -> bool {
        self == other
    }

    pub fn check_compatible(&self, other: &Lattice) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::Incompatible(format!("{self:?} vs {other:?}")))
        }
    }

    /// The same lattice grown by `margin` nodes on every side.
    pub fn enlarged(&self, margin: usize) -> Lattice {
        let shift = margin as f64 * self.spacing;
        Lattice {
            origin: self.origin - C64::new(shift, shift),
            spacing: self.spacing,
            nx: self.nx + 2 * margin,
            ny: self.ny + 2 * margin,
        }
    }
}

/// Samples on a lattice together with a domain mask (`true` = inside).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    lattice: Lattice,
    samples: Vec<T>,
    mask: Vec<bool>,
}

pub type ComplexGrid = Grid<C64>;
pub type RealGrid = Grid<f64>;

impl<T: Copy + Send + Sync> Grid<T> {
    pub fn new(lattice: Lattice, samples: Vec<T>, mask: Vec<bool>) -> Result<Self> {
        if samples.len() != lattice.len() || mask.len() != lattice.len() {
            return Err(Error::Dimension(format!(
                "expected {} samples and mask entries, got {} and {}",
                lattice.len(),
                samples.len(),
                mask.len()
            )));
        }
        Ok(Grid { lattice, samples, mask })
    }

    pub fn filled(lattice: Lattice, value: T) -> Self {
        Grid {
            samples: vec![value; lattice.len()],
            mask: vec![true; lattice.len()],
            lattice,
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl Fn(C64) -> T + Sync) -> Self {
        let samples = (0..lattice.len())
            .into_par_iter()
            .map(|k| f(lattice.node_at(k)))
            .collect();
        Grid {
            samples,
            mask: vec![true; lattice.len()],
            lattice,
        }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [T] {
        &mut self.samples
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.samples[self.lattice.index(row, col)]
    }

    #[inline]
    pub fn inside(&self, row: usize, col: usize) -> bool {
        self.mask[self.lattice.index(row, col)]
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.lattice.len() {
            return Err(Error::Dimension("mask length mismatch".into()));
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn with_samples<U: Copy + Send + Sync>(&self, samples: Vec<U>) -> Result<Grid<U>> {
        Grid::new(self.lattice, samples, self.mask.clone())
    }

    pub fn map<U: Copy + Send + Sync>(&self, f: impl Fn(T) -> U + Sync) -> Grid<U> {
        Grid {
            lattice: self.lattice,
            samples: self.samples.par_iter().map(|&v| f(v)).collect(),
            mask: self.mask.clone(),
        }
    }

    /// Node-wise combination of two compatible grids; the mask is taken from `self`.
    pub fn zip_map<U: Copy + Send + Sync, V: Copy + Send + Sync>(
        &self,
        other: &Grid<U>,
        f: impl Fn(T, U) -> V + Sync,
    ) -> Result<Grid<V>> {
        self.lattice.check_compatible(&other.lattice)?;
        Ok(Grid {
            lattice: self.lattice,
            samples: self
                .samples
                .par_iter()
                .zip(other.samples.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            mask: self.mask.clone(),
        })
    }

    /// Iterator over flat indices of mask-true nodes.
    pub fn masked_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(k, _)| k)
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mask-true nodes whose four lattice neighbours exist and are mask-true,
    /// i.e. where derivatives use the central stencil.
    pub fn interior_indices(&self) -> Vec<usize> {
        let lat = self.lattice;
        self.masked_indices()
            .filter(|&k| {
                let (r, c) = lat.row_col(k);
                lat.is_interior(r, c)
                    && self.mask[k - 1]
                    && self.mask[k + 1]
                    && self.mask[k - lat.nx]
                    && self.mask[k + lat.nx]
            })
            .collect()
    }
}

impl ComplexGrid {
    pub fn zeros(lattice: Lattice) -> Self {
        Grid::filled(lattice, C64::new(0.0, 0.0))
    }

    /// The coordinate function `z` on the lattice.
    pub fn coordinate(lattice: Lattice) -> Self {
        Grid::from_fn(lattice, |z| z)
    }

    /// Sup of `|value|` over mask-true nodes.
    pub fn sup_norm(&self) -> f64 {
        self.masked_indices()
            .map(|k| self.samples[k].norm())
            .fold(0.0, f64::max)
    }

    /// Sup of `|value|` over mask-true nodes that are off the outer ring.
    pub fn interior_sup_norm(&self) -> f64 {
        let lat = self.lattice;
        self.masked_indices()
            .filter(|&k| {
                let (r, c) = lat.row_col(k);
                lat.is_interior(r, c)
            })
            .map(|k| self.samples[k].norm())
            .fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of the lattice (mask ignored).
    pub fn boundary_ring_max(&self) -> f64 {
        let lat = self.lattice;
        let mut m: f64 = 0.0;
        for c in 0..lat.nx {
            m = m.max(self.get(0, c).norm()).max(self.get(lat.ny - 1, c).norm());
        }
        for r in 0..lat.ny {
            m = m.max(self.get(r, 0).norm()).max(self.get(r, lat.nx - 1).norm());
        }
        m
    }

    pub fn real_part(&self) -> RealGrid {
        self.map(|v| v.re)
    }

    pub fn conj(&self) -> ComplexGrid {
        self.map(|v| v.conj())
    }
}

impl RealGrid {
    pub fn to_complex(&self) -> ComplexGrid {
        self.map(|v| C64::new(v, 0.0))
    }
}

/// Rectangle description used by [`sample_on_grid`].
pub type Rect = Lattice;

/// Samples `generator` on every node of `rect`; the mask comes from `domain_test`.
///
/// Non-finite generator output at a mask-true node is rejected with the node
/// coordinates. Outside the domain non-finite values are replaced by zero so
/// that downstream transforms stay well defined.
pub fn sample_on_grid(
    generator: impl Fn(C64) -> C64 + Sync,
    rect: Rect,
    domain_test: impl Fn(C64) -> bool + Sync,
) -> Result<ComplexGrid> {
    let lattice = Lattice::new(rect.origin, rect.spacing, rect.nx, rect.ny)?;
    let mask: Vec<bool> = (0..lattice.len())
        .into_par_iter()
        .map(|k| domain_test(lattice.node_at(k)))
        .collect();
    let mut samples: Vec<C64> = (0..lattice.len())
        .into_par_iter()
        .map(|k| generator(lattice.node_at(k)))
        .collect();
    for (k, v) in samples.iter_mut().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            if mask[k] {
                let (row, col) = lattice.row_col(k);
                return Err(Error::NonFinite {
                    row,
                    col,
                    z: lattice.node(row, col),
                });
            }
            *v = C64::new(0.0, 0.0);
        }
    }
    Grid::new(lattice, samples, mask)
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// Derivative along one lattice axis: central differences where both
/// neighbours are usable, second-order one-sided stencils otherwise.
///
/// A neighbour is usable if it exists and, when the centre node is inside the
/// mask, is itself inside the mask.
fn axis_derivative(f: &ComplexGrid, axis: Axis) -> Vec<C64> {
    let lat = *f.lattice();
    let h = lat.spacing;
    let (nx, ny) = (lat.nx, lat.ny);
    let s = f.samples();
    let m = f.mask();
    (0..lat.len())
        .into_par_iter()
        .map(|k| {
            let (r, c) = lat.row_col(k);
            let (pos, len, stride) = match axis {
                Axis::X => (c, nx, 1usize),
                Axis::Y => (r, ny, nx),
            };
            let restrict = m[k];
            let usable = |step: isize| -> bool {
                let p = pos as isize + step;
                if p < 0 || p >= len as isize {
                    return false;
                }
                let idx = (k as isize + step * stride as isize) as usize;
                !restrict || m[idx]
            };
            let at = |step: isize| s[(k as isize + step * stride as isize) as usize];
            let back = usable(-1);
            let fwd = usable(1);
            if back && fwd {
                (at(1) - at(-1)) / (2.0 * h)
            } else if fwd {
                if usable(2) {
                    (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
                } else {
                    (at(1) - at(0)) / h
                }
            } else if back {
                if usable(-2) {
                    (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h)
                } else {
                    (at(0) - at(-1)) / h
                }
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Partial derivatives `(f_x, f_y)` with the same stencils as [`wirtinger_derivatives`].
pub fn partials(f: &ComplexGrid) -> Result<(ComplexGrid, ComplexGrid)> {
    let lat = f.lattice();
    if lat.nx < 3 || lat.ny < 3 {
        return Err(Error::Dimension(format!(
            "derivatives need at least 3 x 3 nodes, got {} x {}",
            lat.nx, lat.ny
        )));
    }
    let fx = axis_derivative(f, Axis::X);
    let fy = axis_derivative(f, Axis::Y);
    Ok((f.with_samples(fx)?, f.with_samples(fy)?))
}

/// `(f_z, f_zbar)` with `d/dz = (d/dx - i d/dy)/2` and `d/dzbar = (d/dx + i d/dy)/2`.
pub fn wirtinger_derivatives(f: &ComplexGrid) -> Result<(ComplexGrid, ComplexGrid)> {
    let (fx, fy) = partials(f)?;
    let i = C64::i();
    let fz = fx.zip_map(&fy, |a, b| 0.5 * (a - i * b))?;
    let fzb = fx.zip_map(&fy, |a, b| 0.5 * (a + i * b))?;
    Ok((fz, fzb))
}

/// Parameters of the discrete Hölder norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderParams {
    pub alpha: f64,
    pub k: usize,
}

impl HolderParams {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("Hölder exponent must lie in (0,1), got {alpha}")));
        }
        Ok(HolderParams { alpha, k })
    }
}

/// Node count above which [`holder_norm`] restricts pairs to a cutoff radius.
pub const HOLDER_BRUTE_FORCE_LIMIT: usize = 10_000;
/// Default pair cutoff (in lattice cells) used above [`HOLDER_BRUTE_FORCE_LIMIT`].
pub const HOLDER_DEFAULT_CUTOFF: usize = 16;

/// Discrete `C^(k,alpha)` norm over mask-true nodes.
///
/// For `k > 0` the Hölder norms of all `d_z^a d_zbar^b f` with `a + b <= k`
/// are added. Up to [`HOLDER_BRUTE_FORCE_LIMIT`] mask nodes every pair is
/// visited; above it only pairs within [`HOLDER_DEFAULT_CUTOFF`] cells, which
/// yields a lower bound.
pub fn holder_norm(f: &ComplexGrid, p: HolderParams) -> Result<f64> {
    let cutoff = if f.masked_count() > HOLDER_BRUTE_FORCE_LIMIT {
        Some(HOLDER_DEFAULT_CUTOFF)
    } else {
        None
    };
    holder_norm_with_cutoff(f, p, cutoff)
}

pub fn holder_norm_with_cutoff(
    f: &ComplexGrid,
    p: HolderParams,
    cutoff: Option<usize>,
) -> Result<f64> {
    HolderParams::new(p.alpha, p.k)?;
    let mut total = holder_seminorm_plus_sup(f, p.alpha, cutoff)?;
    let mut level = vec![f.clone()];
    for _ in 0..p.k {
        let mut next = Vec::with_capacity(level.len() + 1);
        for g in &level {
            next.push(wirtinger_derivatives(g)?.0);
        }
        let last = level.last().expect("level is never empty");
        next.push(wirtinger_derivatives(last)?.1);
        for g in &next {
            total += holder_seminorm_plus_sup(g, p.alpha, cutoff)?;
        }
        level = next;
    }
    Ok(total)
}

fn holder_seminorm_plus_sup(f: &ComplexGrid, alpha: f64, cutoff: Option<usize>) -> Result<f64> {
    let nodes: Vec<usize> = f.masked_indices().collect();
    if nodes.len() < 2 {
        return Err(Error::Domain(format!(
            "Hölder norm needs at least 2 mask nodes, got {}",
            nodes.len()
        )));
    }
    let lat = *f.lattice();
    let h = lat.spacing;
    let s = f.samples();
    let sup = nodes.iter().map(|&k| s[k].norm()).fold(0.0, f64::max);
    // max is insensitive to reduction order, so the parallel result is bit-stable
    let quotient = match cutoff {
        None => nodes
            .par_iter()
            .enumerate()
            .map(|(a, &ka)| {
                let za = lat.node_at(ka);
                nodes[a + 1..]
                    .iter()
                    .map(|&kb| (s[ka] - s[kb]).norm() / (za - lat.node_at(kb)).norm().powf(alpha))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max),
        Some(radius) => {
            let r = radius as isize;
            let mask = f.mask();
            nodes
                .par_iter()
                .map(|&ka| {
                    let (ra, ca) = lat.row_col(ka);
                    let mut best: f64 = 0.0;
                    for dr in 0..=r {
                        for dc in -r..=r {
                            if (dr == 0 && dc <= 0) || dr * dr + dc * dc > r * r {
                                continue;
                            }
                            let rb = ra as isize + dr;
                            let cb = ca as isize + dc;
                            if rb >= lat.ny as isize || cb < 0 || cb >= lat.nx as isize {
                                continue;
                            }
                            let kb = lat.index(rb as usize, cb as usize);
                            if !mask[kb] {
                                continue;
                            }
                            let dist = h * ((dr * dr + dc * dc) as f64).sqrt();
                            best = best.max((s[ka] - s[kb]).norm() / dist.powf(alpha));
                        }
                    }
                    best
                })
                .reduce(|| 0.0, f64::max)
        }
    };
    Ok(sup + quotient)
}

/// Quintic smoothstep `t^3 (10 - 15 t + 6 t^2)`, clamped to `[0, 1]`.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Exact Euclidean nearest-feature transform (Felzenszwalb–Huttenlocher).
///
/// Returns, for every node, the flat index of the nearest `true` node of
/// `features` and the squared distance in lattice units. Ties resolve to the
/// lower row, then the lower column.
pub fn nearest_feature(nx: usize, ny: usize, features: &[bool]) -> Vec<Option<(usize, f64)>> {
    const INF: f64 = f64::INFINITY;
    // pass 1: along each row
    let mut row_col = vec![usize::MAX; nx * ny];
    let mut row_d2 = vec![INF; nx * ny];
    for r in 0..ny {
        let base = r * nx;
        let mut last: Option<usize> = None;
        for c in 0..nx {
            if features[base + c] {
                last = Some(c);
            }
            if let Some(l) = last {
                row_col[base + c] = l;
                row_d2[base + c] = ((c - l) * (c - l)) as f64;
            }
        }
        let mut next: Option<usize> = None;
        for c in (0..nx).rev() {
            if features[base + c] {
                next = Some(c);
            }
            if let Some(n) = next {
                let d2 = ((n - c) * (n - c)) as f64;
                if d2 < row_d2[base + c] {
                    row_col[base + c] = n;
                    row_d2[base + c] = d2;
                }
            }
        }
    }
    // pass 2: lower envelope of parabolas along each column
    let mut out = vec![None; nx * ny];
    let mut v = vec![0usize; ny];
    let mut z = vec![0.0f64; ny + 1];
    for c in 0..nx {
        let f = |r: usize| row_d2[r * nx + c];
        let mut k: isize = -1;
        for q in 0..ny {
            if !f(q).is_finite() {
                continue;
            }
            loop {
                if k < 0 {
                    k = 0;
                    v[0] = q;
                    z[0] = -INF;
                    z[1] = INF;
                    break;
                }
                let p = v[k as usize];
                let s = ((f(q) + (q * q) as f64) - (f(p) + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                if s <= z[k as usize] {
                    k -= 1;
                    continue;
                }
                k += 1;
                v[k as usize] = q;
                z[k as usize] = s;
                z[k as usize + 1] = INF;
                break;
            }
        }
        if k < 0 {
            continue;
        }
        let mut j = 0usize;
        for q in 0..ny {
            while z[j + 1] < q as f64 {
                j += 1;
            }
            let p = v[j];
            let d2 = ((q as isize - p as isize).pow(2)) as f64 + f(p);
            out[q * nx + c] = Some((p * nx + row_col[p * nx + c], d2));
        }
    }
    out
}

/// Extends `f` from its mask to a lattice enlarged by `margin` nodes per side.
///
/// Each node takes the value at its nearest mask node, times a quintic
/// cutoff of the normalised distance `d / margin`: the cutoff is 1 on the
/// mask and 0 from distance `margin` cells on. The operator is linear in `f`,
/// reproduces `f` exactly on the mask, and the result carries the original
/// mask embedded in the larger lattice.
pub fn extend_compactly(f: &ComplexGrid, margin: usize) -> Result<ComplexGrid> {
    if margin < 1 {
        return Err(Error::Dimension("extension margin must be >= 1".into()));
    }
    if f.masked_count() == 0 {
        return Err(Error::Domain("cannot extend from an empty mask".into()));
    }
    let src = *f.lattice();
    let out = src.enlarged(margin);
    let mut features = vec![false; out.len()];
    let mut source_of = vec![usize::MAX; out.len()];
    for k in f.masked_indices() {
        let (r, c) = src.row_col(k);
        let o = out.index(r + margin, c + margin);
        features[o] = true;
        source_of[o] = k;
    }
    let nearest = nearest_feature(out.nx, out.ny, &features);
    let width = margin as f64;
    let s = f.samples();
    let samples: Vec<C64> = nearest
        .par_iter()
        .enumerate()
        .map(|(o, hit)| {
            let (p, d2) = hit.expect("mask is nonempty");
            let value = s[source_of[p]];
            if features[o] {
                value
            } else {
                let chi = 1.0 - smoothstep(d2.sqrt() / width);
                value * chi
            }
        })
        .collect();
    Grid::new(out, samples, features)
}

/// Restricts `f` (defined on `outer`) back to the sub-lattice `inner`, which
/// must be `outer` shrunk by an integer number of nodes on each side.
pub fn restrict_to(f: &ComplexGrid, inner: &Lattice) -> Result<ComplexGrid> {
    let outer = f.lattice();
    let offset = (inner.origin - outer.origin) / outer.spacing;
    let (dc, dr) = (offset.re.round(), offset.im.round());
    if (offset.re - dc).abs() > 1e-9
        || (offset.im - dr).abs() > 1e-9
        || dc < 0.0
        || dr < 0.0
        || (inner.spacing - outer.spacing).abs() > 1e-15 * outer.spacing
    {
        return Err(Error::Incompatible("inner lattice is not a sub-lattice".into()));
    }
    let (dc, dr) = (dc as usize, dr as usize);
    if dc + inner.nx > outer.nx || dr + inner.ny > outer.ny {
        return Err(Error::Incompatible("inner lattice exceeds outer lattice".into()));
    }
    let mut samples = Vec::with_capacity(inner.len());
    let mut mask = Vec::with_capacity(inner.len());
    for r in 0..inner.ny {
        for c in 0..inner.nx {
            let k = outer.index(r + dr, c + dc);
            samples.push(f.samples()[k]);
            mask.push(f.mask()[k]);
        }
    }
    Grid::new(*inner, samples, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Lattice {
        Lattice::new(C64::new(0.0, 0.0), 1.0 / (n - 1) as f64, n, n).unwrap()
    }

    #[test]
    fn zero_generator_gives_zero_grid_with_full_mask() {
        let g = sample_on_grid(|_| C64::new(0.0, 0.0), unit_square(4), |_| true).unwrap();
        assert!(g.samples().iter().all(|v| *v == C64::new(0.0, 0.0)));
        assert!(g.mask().iter().all(|&m| m));
    }

    #[test]
    fn identity_generator_reproduces_nodes() {
        let lat = Lattice::new(C64::new(0.0, 0.0), 0.25, 5, 5).unwrap();
        let g = sample_on_grid(|z| z, lat, |_| true).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(g.get(r, c), C64::new(0.25 * c as f64, 0.25 * r as f64));
            }
        }
    }

    #[test]
    fn squares_sampled_exactly() {
        let lat = Lattice::new(C64::new(-1.0, -1.0), 0.01, 201, 201).unwrap();
        let g = sample_on_grid(|z| z * z, lat, |_| true).unwrap();
        let worst = (0..lat.len())
            .map(|k| (g.samples()[k] - lat.node_at(k) * lat.node_at(k)).norm())
            .fold(0.0, f64::max);
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn non_finite_inside_mask_is_rejected() {
        let lat = Lattice::centered_square(1.0, 5).unwrap();
        let err = sample_on_grid(|z| 1.0 / z, lat, |_| true).unwrap_err();
        match err {
            Error::NonFinite { row, col, .. } => assert_eq!((row, col), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        // excluded by the mask: accepted, zero-filled
        let g = sample_on_grid(|z| 1.0 / z, lat, |z| z.norm() > 0.1).unwrap();
        assert_eq!(g.get(2, 2), C64::new(0.0, 0.0));
    }

    #[test]
    fn wirtinger_of_square_and_conjugate() {
        let lat = Lattice::centered_square(1.0, 21).unwrap();
        let f = ComplexGrid::from_fn(lat, |z| z * z);
        let (fz, fzb) = wirtinger_derivatives(&f).unwrap();
        for k in 0..lat.len() {
            let z = lat.node_at(k);
            assert!((fz.samples()[k] - 2.0 * z).norm() < 1e-12);
            assert!(fzb.samples()[k].norm() < 1e-12);
        }
        let g = ComplexGrid::from_fn(lat, |z| z.conj());
        let (gz, gzb) = wirtinger_derivatives(&g).unwrap();
        for k in 0..lat.len() {
            assert!(gz.samples()[k].norm() < 1e-12);
            assert!((gzb.samples()[k] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_needs_three_nodes() {
        let lat = Lattice::new(C64::new(0.0, 0.0), 1.0, 2, 5).unwrap();
        assert!(matches!(
            wirtinger_derivatives(&ComplexGrid::zeros(lat)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn one_sided_stencil_at_mask_boundary() {
        // mask excludes the left half; z^2 is still differentiated exactly
        let lat = Lattice::centered_square(1.0, 11).unwrap();
        let mask: Vec<bool> = (0..lat.len()).map(|k| lat.node_at(k).re >= -0.05).collect();
        let f = ComplexGrid::from_fn(lat, |z| z * z).with_mask(mask).unwrap();
        let (fz, _) = wirtinger_derivatives(&f).unwrap();
        for k in f.masked_indices() {
            assert!((fz.samples()[k] - 2.0 * lat.node_at(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn holder_examples() {
        let lat = Lattice::centered_square(1.0, 6).unwrap();
        let p = HolderParams::new(0.5, 0).unwrap();
        assert_eq!(holder_norm(&ComplexGrid::zeros(lat), p).unwrap(), 0.0);
        let c = C64::new(0.3, -0.4);
        let constant = Grid::filled(lat, c);
        assert!((holder_norm(&constant, p).unwrap() - 0.5).abs() < 1e-15);

        // f(x) = x on [0,1], one row active
        let n = 11;
        let lat = Lattice::new(C64::new(0.0, 0.0), 0.1, n, 2).unwrap();
        let mask: Vec<bool> = (0..lat.len()).map(|k| k < n).collect();
        let f = ComplexGrid::from_fn(lat, |z| C64::new(z.re, 0.0)).with_mask(mask).unwrap();
        assert!((holder_norm(&f, p).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn holder_rejects_tiny_domains_and_bad_alpha() {
        assert!(HolderParams::new(1.0, 0).is_err());
        assert!(HolderParams::new(0.0, 0).is_err());
        let lat = Lattice::centered_square(1.0, 3).unwrap();
        let mut mask = vec![false; 9];
        mask[4] = true;
        let f = ComplexGrid::zeros(lat).with_mask(mask).unwrap();
        assert!(matches!(
            holder_norm(&f, HolderParams { alpha: 0.5, k: 0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn holder_with_derivatives_adds_derivative_norms() {
        let lat = Lattice::centered_square(1.0, 9).unwrap();
        let f = ComplexGrid::from_fn(lat, |z| z);
        let n0 = holder_norm(&f, HolderParams { alpha: 0.5, k: 0 }).unwrap();
        let n1 = holder_norm(&f, HolderParams { alpha: 0.5, k: 1 }).unwrap();
        // f_z = 1 contributes sup 1 and zero quotient; f_zbar = 0 contributes nothing
        assert!((n1 - n0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_gives_lower_bound() {
        let lat = Lattice::centered_square(1.0, 21).unwrap();
        let f = ComplexGrid::from_fn(lat, |z| (3.0 * z).sin());
        let p = HolderParams { alpha: 0.3, k: 0 };
        let full = holder_norm_with_cutoff(&f, p, None).unwrap();
        let cut = holder_norm_with_cutoff(&f, p, Some(4)).unwrap();
        assert!(cut <= full + 1e-15);
        assert!(cut > 0.5 * full);
    }

    #[test]
    fn nearest_feature_matches_brute_force() {
        let (nx, ny) = (17, 13);
        let features: Vec<bool> = (0..nx * ny).map(|k| (k * 7919) % 23 == 0).collect();
        let got = nearest_feature(nx, ny, &features);
        for k in 0..nx * ny {
            let (r, c) = ((k / nx) as f64, (k % nx) as f64);
            let best = (0..nx * ny)
                .filter(|&q| features[q])
                .map(|q| {
                    let (qr, qc) = ((q / nx) as f64, (q % nx) as f64);
                    (r - qr).powi(2) + (c - qc).powi(2)
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(got[k].unwrap().1, best);
        }
    }

    #[test]
    fn extension_of_constant_is_the_cutoff() {
        let lat = Lattice::centered_square(1.0, 21).unwrap();
        let mask: Vec<bool> = (0..lat.len()).map(|k| lat.node_at(k).norm() <= 0.5).collect();
        let f = Grid::filled(lat, C64::new(1.0, 0.0)).with_mask(mask).unwrap();
        let e = extend_compactly(&f, 4).unwrap();
        for (k, v) in e.samples().iter().enumerate() {
            assert!(v.im == 0.0 && (0.0..=1.0).contains(&v.re));
            if e.mask()[k] {
                assert_eq!(v.re, 1.0);
            }
        }
        assert_eq!(e.boundary_ring_max(), 0.0);
        let zero = extend_compactly(&ComplexGrid::zeros(lat), 3).unwrap();
        assert!(zero.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn extension_never_exceeds_interior_sup() {
        let lat = Lattice::centered_square(1.0, 41).unwrap();
        let mask: Vec<bool> = (0..lat.len()).map(|k| lat.node_at(k).norm() <= 0.5).collect();
        let f = ComplexGrid::from_fn(lat, |z| z).with_mask(mask).unwrap();
        // margin of 6 cells reaches radius 0.8
        let e = extend_compactly(&f, 6).unwrap();
        let sup = e.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(sup <= 0.5 + 1e-15);
        let back = restrict_to(&e, &lat).unwrap();
        for k in f.masked_indices() {
            assert_eq!(back.samples()[k], f.samples()[k]);
        }
    }
}

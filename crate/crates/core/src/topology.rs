//! Flood-fill topology on lattice masks: Runge test, connectivity,
//! complement components, dilation and image rasterisation.
//!
//! Mask nodes are 8-connected and complement nodes 4-connected, so that a
//! diagonal step in a ring of mask nodes still separates its inside from its
//! outside.

use std::collections::VecDeque;

use crate::grid::{ComplexGrid, Lattice};
use crate::C64;

const N4: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
const N8: [(isize, isize); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

fn step(lat: &Lattice, k: usize, d: (isize, isize)) -> Option<usize> {
    let (r, c) = lat.row_col(k);
    let rr = r as isize + d.0;
    let cc = c as isize + d.1;
    if rr < 0 || cc < 0 || rr >= lat.ny as isize || cc >= lat.nx as isize {
        return None;
    }
    Some(lat.index(rr as usize, cc as usize))
}

/// Labels connected components of nodes where `select` is true.
/// Returns the label per node (`usize::MAX` for unselected) and the count.
pub fn components(lat: &Lattice, select: &[bool], eight: bool) -> (Vec<usize>, usize) {
    let dirs: &[(isize, isize)] = if eight { &N8 } else { &N4 };
    let mut label = vec![usize::MAX; lat.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..lat.len() {
        if !select[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            for &d in dirs {
                if let Some(n) = step(lat, k, d) {
                    if select[n] && label[n] == usize::MAX {
                        label[n] = count;
                        queue.push_back(n);
                    }
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Components of the complement of `mask` that do not reach the lattice edge.
pub fn bounded_complement_components(lat: &Lattice, mask: &[bool]) -> Vec<Vec<usize>> {
    let outside: Vec<bool> = mask.iter().map(|m| !m).collect();
    let (label, count) = components(lat, &outside, false);
    let mut touches = vec![false; count];
    let mut members = vec![Vec::new(); count];
    for k in 0..lat.len() {
        if label[k] == usize::MAX {
            continue;
        }
        let (r, c) = lat.row_col(k);
        if !lat.is_interior(r, c) {
            touches[label[k]] = true;
        }
        members[label[k]].push(k);
    }
    members
        .into_iter()
        .zip(touches)
        .filter(|(_, t)| !t)
        .map(|(m, _)| m)
        .collect()
}

/// True if the complement of `mask` has no bounded component in the lattice rectangle.
pub fn is_runge(lat: &Lattice, mask: &[bool]) -> bool {
    bounded_complement_components(lat, mask).is_empty()
}

/// True if the mask nodes form one 4-connected component.
pub fn is_connected4(lat: &Lattice, mask: &[bool]) -> bool {
    components(lat, mask, false).1 == 1
}

/// Number of 8-connected components of the mask.
pub fn mask_component_count(lat: &Lattice, mask: &[bool]) -> usize {
    components(lat, mask, true).1
}

/// Mask grown by every node within `radius` lattice cells (Euclidean).
pub fn dilate(lat: &Lattice, mask: &[bool], radius: f64) -> Vec<bool> {
    let r = radius.floor() as isize;
    let mut out = mask.to_vec();
    for k in 0..lat.len() {
        if !mask[k] {
            continue;
        }
        for dr in -r..=r {
            for dc in -r..=r {
                if ((dr * dr + dc * dc) as f64) > radius * radius {
                    continue;
                }
                if let Some(n) = step(lat, k, (dr, dc)) {
                    out[n] = true;
                }
            }
        }
    }
    out
}

fn inside_triangle(p: C64, a: C64, b: C64, c: C64) -> bool {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let d1 = cross(b - a, p - a);
    let d2 = cross(c - b, p - b);
    let d3 = cross(a - c, p - c);
    let scale = 1e-12 * ((b - a).norm_sqr() + (c - b).norm_sqr() + (a - c).norm_sqr());
    let neg = d1 < -scale || d2 < -scale || d3 < -scale;
    let pos = d1 > scale || d2 > scale || d3 > scale;
    !(neg && pos)
}

/// Nodes of `target` covered by the image of the mask cells of `map`
/// (two triangles per cell whose four corners are in the mask).
pub fn rasterize_image(map: &ComplexGrid, target: &Lattice) -> Vec<bool> {
    let lat = map.lattice();
    let mask = map.mask();
    let mut out = vec![false; target.len()];
    for r in 0..lat.ny - 1 {
        for c in 0..lat.nx - 1 {
            let ids = [lat.index(r, c), lat.index(r, c + 1), lat.index(r + 1, c + 1), lat.index(r + 1, c)];
            if !ids.iter().all(|&k| mask[k]) {
                continue;
            }
            let p: Vec<C64> = ids.iter().map(|&k| map.samples()[k]).collect();
            for tri in [[p[0], p[1], p[2]], [p[0], p[2], p[3]]] {
                let lo = C64::new(
                    tri.iter().map(|v| v.re).fold(f64::INFINITY, f64::min),
                    tri.iter().map(|v| v.im).fold(f64::INFINITY, f64::min),
                );
                let hi = C64::new(
                    tri.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max),
                    tri.iter().map(|v| v.im).fold(f64::NEG_INFINITY, f64::max),
                );
                let c0 = ((lo.re - target.origin.re) / target.spacing).ceil().max(0.0) as usize;
                let r0 = ((lo.im - target.origin.im) / target.spacing).ceil().max(0.0) as usize;
                let c1 = ((hi.re - target.origin.re) / target.spacing).floor();
                let r1 = ((hi.im - target.origin.im) / target.spacing).floor();
                if c1 < 0.0 || r1 < 0.0 {
                    continue;
                }
                let c1 = (c1 as usize).min(target.nx - 1);
                let r1 = (r1 as usize).min(target.ny - 1);
                for rr in r0..=r1 {
                    for cc in c0..=c1 {
                        let k = target.index(rr, cc);
                        if !out[k] && inside_triangle(target.node(rr, cc), tri[0], tri[1], tri[2]) {
                            out[k] = true;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Counter-clockwise closed loop of 4-adjacent mask nodes around a bounded
/// complement component: the boundary of its bounding box, grown until every
/// node of the loop lies in the mask. `None` if no such box fits.
pub fn square_loop_around(lat: &Lattice, mask: &[bool], hole: &[usize]) -> Option<Vec<usize>> {
    let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
    for &k in hole {
        let (r, c) = lat.row_col(k);
        r0 = r0.min(r);
        r1 = r1.max(r);
        c0 = c0.min(c);
        c1 = c1.max(c);
    }
    for grow in 1.. {
        if r0 < grow || c0 < grow || r1 + grow >= lat.ny || c1 + grow >= lat.nx {
            return None;
        }
        let (a, b, c, d) = (r0 - grow, r1 + grow, c0 - grow, c1 + grow);
        let mut path = Vec::new();
        for col in c..d {
            path.push(lat.index(a, col));
        }
        for row in a..b {
            path.push(lat.index(row, d));
        }
        for col in (c + 1..=d).rev() {
            path.push(lat.index(b, col));
        }
        for row in (a + 1..=b).rev() {
            path.push(lat.index(row, c));
        }
        path.push(path[0]);
        if path.iter().all(|&k| mask[k]) {
            return Some(path);
        }
    }
    None
}

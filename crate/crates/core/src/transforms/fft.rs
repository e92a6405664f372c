//! Two-dimensional FFT on a padded lattice and linear convolution through it.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Smallest integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Spectra are kept in transposed layout (`px` rows of length `py`).
pub struct Fft2 {
    pub px: usize,
    pub py: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("px", &self.px).field("py", &self.py).finish()
    }
}

fn run_rows(fft: &Arc<dyn Fft<f64>>, data: &mut [C64], len: usize) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![C64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, dst)| {
        for (r, d) in dst.iter_mut().enumerate() {
            *d = src[r * cols + c];
        }
    });
    out
}

impl Fft2 {
    pub fn new(px: usize, py: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            px,
            py,
            row_fwd: planner.plan_fft_forward(px),
            row_inv: planner.plan_fft_inverse(px),
            col_fwd: planner.plan_fft_forward(py),
            col_inv: planner.plan_fft_inverse(py),
        }
    }

    /// Forward transform of a `py x px` row-major array.
    pub fn forward(&self, mut data: Vec<C64>) -> Vec<C64> {
        run_rows(&self.row_fwd, &mut data, self.px);
        let mut t = transpose(&data, self.py, self.px);
        run_rows(&self.col_fwd, &mut t, self.py);
        t
    }

    /// Inverse of [`Fft2::forward`], including the `1/(px py)` normalisation.
    pub fn inverse(&self, mut spec: Vec<C64>) -> Vec<C64> {
        run_rows(&self.col_inv, &mut spec, self.py);
        let mut data = transpose(&spec, self.px, self.py);
        run_rows(&self.row_inv, &mut data, self.px);
        let s = 1.0 / (self.px * self.py) as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
        data
    }

    /// Spectrum of a kernel given on offsets `|ox| <= kx`, `|oy| <= ky`
    /// (row-major, centre at `(ky, kx)`), wrapped onto the torus.
    pub fn kernel_spectrum(&self, kernel: &[C64], kx: usize, ky: usize) -> Vec<C64> {
        let kw = 2 * kx + 1;
        let mut buf = vec![C64::new(0.0, 0.0); self.px * self.py];
        for oy in -(ky as i64)..=ky as i64 {
            let r = oy.rem_euclid(self.py as i64) as usize;
            for ox in -(kx as i64)..=kx as i64 {
                let c = ox.rem_euclid(self.px as i64) as usize;
                buf[r * self.px + c] = kernel[(oy + ky as i64) as usize * kw + (ox + kx as i64) as usize];
            }
        }
        self.forward(buf)
    }

    /// Linear convolution of an `ny x nx` array with a kernel spectrum;
    /// `conjugate` applies the adjoint (correlation) instead.
    pub fn convolve(&self, input: &[C64], nx: usize, ny: usize, spectrum: &[C64], conjugate: bool) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.px * self.py];
        for r in 0..ny {
            buf[r * self.px..r * self.px + nx].copy_from_slice(&input[r * nx..(r + 1) * nx]);
        }
        let mut spec = self.forward(buf);
        spec.par_iter_mut().zip(spectrum.par_iter()).for_each(|(a, k)| {
            *a *= if conjugate { k.conj() } else { *k };
        });
        let full = self.inverse(spec);
        let mut out = Vec::with_capacity(nx * ny);
        for r in 0..ny {
            out.extend_from_slice(&full[r * self.px..r * self.px + nx]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(7), 8);
        assert_eq!(smooth_size(257), 270);
        assert_eq!(smooth_size(514), 540);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let (nx, ny) = (5, 4);
        let (kx, ky) = (nx - 1, ny - 1);
        let kw = 2 * kx + 1;
        let kernel: Vec<C64> = (0..kw * (2 * ky + 1))
            .map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let input: Vec<C64> = (0..nx * ny).map(|k| C64::new(k as f64, -(k as f64) * 0.5)).collect();
        let fft = Fft2::new(smooth_size(2 * nx - 1), smooth_size(2 * ny - 1));
        let spec = fft.kernel_spectrum(&kernel, kx, ky);
        let got = fft.convolve(&input, nx, ny, &spec, false);
        let adj = fft.convolve(&input, nx, ny, &spec, true);
        for r in 0..ny {
            for c in 0..nx {
                let mut s = C64::new(0.0, 0.0);
                let mut t = C64::new(0.0, 0.0);
                for rr in 0..ny {
                    for cc in 0..nx {
                        let oy = r as i64 - rr as i64;
                        let ox = c as i64 - cc as i64;
                        let k = (oy + ky as i64) as usize * kw + (ox + kx as i64) as usize;
                        let kt = (-oy + ky as i64) as usize * kw + (-ox + kx as i64) as usize;
                        s += kernel[k] * input[rr * nx + cc];
                        t += kernel[kt].conj() * input[rr * nx + cc];
                    }
                }
                assert!((got[r * nx + c] - s).norm() < 1e-11);
                assert!((adj[r * nx + c] - t).norm() < 1e-11);
            }
        }
    }
}

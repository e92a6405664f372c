//! Discrete Cauchy–Green transform `P` and Beurling transform `S`.
//!
//! `P(φ)(z) = (1/π) ∫ φ(ζ) / (z - ζ) dσ(ζ)` and
//! `S(φ)(z) = -(1/π) p.v. ∫ φ(ζ) / (z - ζ)^2 dσ(ζ)` are evaluated as linear
//! convolutions on a zero-padded lattice with cell-averaged kernels.
//!
//! The plan also carries a second, lattice-consistent pair
//! ([`Operator::LatticeCauchy`], [`Operator::LatticeBeurling`]) for which the
//! central-difference identities `D_zbar P = I` and `D_z P = S` hold exactly.
//! The Beltrami solver iterates with that pair.

pub mod fft;
pub mod kernels;

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{ComplexGrid, Lattice};
use crate::{Error, Result, C64};
use fft::{smooth_size, Fft2};

/// Default relative size of boundary-ring values tolerated by the support check.
pub const DEFAULT_SUPPORT_TOLERANCE: f64 = 1e-5;
/// Seed of the power-iteration start vector.
pub const PROBE_SEED: u64 = 0x5eed_cafe;
/// Power-iteration steps used for the solver's cached norm estimate.
pub const SOLVER_PROBE_TRIALS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// Cell-averaged Cauchy–Green transform.
    Cauchy,
    /// Cell-averaged Beurling transform (singular cell weight 0).
    Beurling,
    /// Lattice right inverse of the central-difference `D_zbar`.
    LatticeCauchy,
    /// `D_z` of [`Operator::LatticeCauchy`].
    LatticeBeurling,
}

struct LatticeSpectra {
    cauchy: Vec<C64>,
    beurling: Vec<C64>,
}

/// Padded FFT geometry and kernel spectra for one input lattice.
///
/// Applying a plan allocates its own scratch, so a plan can be shared by
/// reference across threads.
pub struct TransformPlan {
    lattice: Lattice,
    padding: usize,
    support_tolerance: f64,
    fft: Fft2,
    cauchy: Vec<C64>,
    beurling: Vec<C64>,
    lattice_spectra: OnceLock<LatticeSpectra>,
    solver_norm: OnceLock<f64>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan")
            .field("lattice", &self.lattice)
            .field("padding", &self.padding)
            .field("padded", &(self.fft.px, self.fft.py))
            .finish()
    }
}

impl TransformPlan {
    /// Plan for `lattice`; the padded size per axis is at least
    /// `max(padding * n, 2n - 1)`, rounded up to a 5-smooth FFT length.
    pub fn new(lattice: Lattice, padding: usize) -> Result<Self> {
        if padding < 2 {
            return Err(Error::Dimension(format!("padding factor must be >= 2, got {padding}")));
        }
        let px = smooth_size((padding * lattice.nx).max(2 * lattice.nx - 1));
        let py = smooth_size((padding * lattice.ny).max(2 * lattice.ny - 1));
        let fft = Fft2::new(px, py);
        let (kx, ky) = (lattice.nx - 1, lattice.ny - 1);
        let h = lattice.spacing;
        let table = |w: fn(i64, i64, f64) -> C64| -> Vec<C64> {
            let mut k = Vec::with_capacity((2 * kx + 1) * (2 * ky + 1));
            for oy in -(ky as i64)..=ky as i64 {
                for ox in -(kx as i64)..=kx as i64 {
                    k.push(w(ox, oy, h));
                }
            }
            k
        };
        let cauchy = fft.kernel_spectrum(&table(kernels::cauchy_weight), kx, ky);
        let beurling = fft.kernel_spectrum(&table(kernels::beurling_weight), kx, ky);
        Ok(TransformPlan {
            lattice,
            padding,
            support_tolerance: DEFAULT_SUPPORT_TOLERANCE,
            fft,
            cauchy,
            beurling,
            lattice_spectra: OnceLock::new(),
            solver_norm: OnceLock::new(),
        })
    }

    pub fn with_support_tolerance(mut self, tol: f64) -> Self {
        self.support_tolerance = tol;
        self
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn padded_dims(&self) -> (usize, usize) {
        (self.fft.px, self.fft.py)
    }

    fn lattice_spectra(&self) -> &LatticeSpectra {
        self.lattice_spectra.get_or_init(|| {
            let (nx, ny) = (self.lattice.nx, self.lattice.ny);
            let (e, b) = kernels::lattice_pair(nx, ny, self.lattice.spacing);
            LatticeSpectra {
                cauchy: self.fft.kernel_spectrum(&e, nx - 1, ny - 1),
                beurling: self.fft.kernel_spectrum(&b, nx - 1, ny - 1),
            }
        })
    }

    fn spectrum(&self, op: Operator) -> &[C64] {
        match op {
            Operator::Cauchy => &self.cauchy,
            Operator::Beurling => &self.beurling,
            Operator::LatticeCauchy => &self.lattice_spectra().cauchy,
            Operator::LatticeBeurling => &self.lattice_spectra().beurling,
        }
    }

    /// Convolution on raw row-major samples, without support checks.
    pub fn apply_raw(&self, op: Operator, samples: &[C64]) -> Vec<C64> {
        self.fft
            .convolve(samples, self.lattice.nx, self.lattice.ny, self.spectrum(op), false)
    }

    /// Adjoint of [`TransformPlan::apply_raw`] with respect to the `l^2` product.
    pub fn apply_adjoint_raw(&self, op: Operator, samples: &[C64]) -> Vec<C64> {
        self.fft
            .convolve(samples, self.lattice.nx, self.lattice.ny, self.spectrum(op), true)
    }

    /// Fails if `phi` does not vanish on the outermost ring of nodes, up to
    /// the plan's relative support tolerance.
    pub fn check_support(&self, phi: &ComplexGrid) -> Result<()> {
        self.lattice.check_compatible(phi.lattice())?;
        let ring = phi.boundary_ring_max();
        let sup = phi.samples().iter().map(|v| v.norm()).fold(0.0, f64::max);
        if ring > self.support_tolerance * sup {
            return Err(Error::Support { max: ring });
        }
        Ok(())
    }

    /// Applies `op` to a compactly supported field; the result keeps `phi`'s mask.
    pub fn apply(&self, op: Operator, phi: &ComplexGrid) -> Result<ComplexGrid> {
        self.check_support(phi)?;
        phi.with_samples(self.apply_raw(op, phi.samples()))
    }

    /// Norm estimate of the lattice Beurling operator, computed once per plan.
    pub fn solver_operator_norm(&self) -> f64 {
        *self.solver_norm.get_or_init(|| {
            let hist = self.probe_history(Operator::LatticeBeurling, SOLVER_PROBE_TRIALS);
            hist.last().copied().unwrap_or(0.0)
        })
    }

    /// Power-iteration history of `‖op‖` on the lattice.
    pub fn probe_history(&self, op: Operator, trials: usize) -> Vec<f64> {
        power_iteration_norm(
            self.lattice.len(),
            trials,
            PROBE_SEED,
            |x| self.apply_raw(op, x),
            |y| self.apply_adjoint_raw(op, y),
        )
    }
}

/// Cell-averaged Cauchy–Green transform of a compactly supported field.
pub fn cauchy_green(phi: &ComplexGrid, plan: &TransformPlan) -> Result<ComplexGrid> {
    plan.apply(Operator::Cauchy, phi)
}

/// Cell-averaged Beurling transform of a compactly supported field.
pub fn beurling(phi: &ComplexGrid, plan: &TransformPlan) -> Result<ComplexGrid> {
    plan.apply(Operator::Beurling, phi)
}

/// Power-iteration estimate of the `l^2` norm of the plan's Beurling
/// transform restricted to the lattice. Deterministic (fixed seed).
pub fn operator_norm_probe(plan: &TransformPlan, trials: usize) -> f64 {
    plan.probe_history(Operator::Beurling, trials.max(1))
        .last()
        .copied()
        .unwrap_or(0.0)
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Runs `trials` steps of power iteration on `A^H A` and returns the
/// estimates `‖A x_k‖` for unit `x_k`; the sequence is nondecreasing up to
/// rounding. A zero operator gives zeros.
pub fn power_iteration_norm(
    dim: usize,
    trials: usize,
    seed: u64,
    mut apply: impl FnMut(&[C64]) -> Vec<C64>,
    mut adjoint: impl FnMut(&[C64]) -> Vec<C64>,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let n = l2(&x);
    x.iter_mut().for_each(|v| *v /= n);
    let mut history = Vec::with_capacity(trials);
    for _ in 0..trials {
        let y = apply(&x);
        let est = l2(&y);
        history.push(est);
        if est == 0.0 {
            continue;
        }
        let mut z = adjoint(&y);
        let nz = l2(&z);
        if nz == 0.0 {
            continue;
        }
        z.iter_mut().for_each(|v| *v /= nz);
        x = z;
    }
    history
}

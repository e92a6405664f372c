use thiserror::Error;

use crate::beltrami::ConformalChart;
use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("incompatible lattices: {0}")]
    Incompatible(String),

    #[error("non-finite sample at node (row {row}, col {col}), z = {z}")]
    NonFinite { row: usize, col: usize, z: C64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("metric is not positive definite at node {index} (E = {e}, EG - F^2 = {delta})")]
    Definiteness { index: usize, e: f64, delta: f64 },

    #[error("structure is not positively oriented at node {index} (c = {c})")]
    Orientation { index: usize, c: f64 },

    #[error("not an almost complex structure at node {index}: {reason}")]
    NotComplexStructure { index: usize, reason: String },

    #[error("Beltrami coefficient leaves the unit disc at node {index} (|mu| = {modulus})")]
    NotContractive { index: usize, modulus: f64 },

    #[error("field support touches the boundary ring (max |value| there = {max:e})")]
    Support { max: f64 },

    #[error("Neumann iteration cannot contract: estimated ratio {ratio}")]
    NoConvergence { ratio: f64 },

    #[error("iteration budget exhausted after {iterations} iterations (last increment {increment:e})")]
    IterationBudget {
        iterations: usize,
        increment: f64,
        partial: Box<ConformalChart>,
    },

    #[error("point normalization failed: {0}")]
    Normalization(String),

    #[error("fiber {index}: {source}")]
    Fiber {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("anchor {index}: {source}")]
    Anchor {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("partition does not cover the parameter axis: {0}")]
    Coverage(String),

    #[error("topology: {0}")]
    Topology(String),

    #[error("approximation budget exceeded at fiber {fiber}: achieved {achieved:e}, allowed {eps:e}")]
    Budget { fiber: usize, achieved: f64, eps: f64 },

    #[error("ill-conditioned interpolation: {0}")]
    Conditioning(String),

    #[error("spray does not dominate periods: smallest singular value {sigma_min:e} <= {threshold:e}")]
    Domination { sigma_min: f64, threshold: f64 },

    #[error("period correction failed: {reason}")]
    Correction { reason: String, zeta: Vec<C64> },

    #[error("degenerate immersion at node {index} (margin {margin:e})")]
    DegenerateImmersion { index: usize, margin: f64 },

    #[error("mask is not connected: {0}")]
    Connectivity(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input
    /// shapes, parse errors or I/O.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Fiber { source, .. } | Error::Anchor { source, .. } => source.is_numeric(),
            Error::NoConvergence { .. }
            | Error::IterationBudget { .. }
            | Error::Normalization(_)
            | Error::Budget { .. }
            | Error::Conditioning(_)
            | Error::Domination { .. }
            | Error::Correction { .. }
            | Error::DegenerateImmersion { .. }
            | Error::NotContractive { .. }
            | Error::Definiteness { .. }
            | Error::Orientation { .. }
            | Error::NotComplexStructure { .. }
            | Error::Support { .. }
            | Error::Topology(_)
            | Error::Connectivity(_)
            | Error::Coverage(_)
            | Error::NonFinite { .. }
            | Error::Domain(_) => true,
            Error::Dimension(_) | Error::Incompatible(_) | Error::Parse { .. } | Error::Io(_) => {
                false
            }
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Fiber { source, .. } | Error::Anchor { source, .. } => source.is_io(),
            Error::Io(_) => true,
            _ => false,
        }
    }

    pub(crate) fn in_fiber(self, index: usize) -> Error {
        Error::Fiber {
            index,
            source: Box::new(self),
        }
    }
}

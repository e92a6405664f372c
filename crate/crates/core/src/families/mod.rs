//! Sampled parameter families and family-level Runge approximation.

mod jets;
mod partition;
mod poly;
mod runge;

pub use jets::{hermite_polynomial, jet_interpolation_correction, jets_at, JetSpec, DEFAULT_JET_STENCIL};
pub use partition::{hat_partition, PartitionOfUnity};
pub use poly::{fit_polynomial, local_runge_approximate, PolyFit, Polynomial};
pub use runge::{
    family_runge_approximate, family_runge_with_charts, standard_charts, FamilyRungeOptions, FamilyRungeReport,
    FiberReport,
};

use crate::{Error, Result};

/// Strictly increasing parameter samples `b_0 < ... < b_{M-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGrid {
    values: Vec<f64>,
}

impl ParameterGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("parameter grid needs at least one sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("parameter samples must be finite".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("parameter samples must be strictly increasing".into()));
        }
        Ok(ParameterGrid { values })
    }

    /// `samples` equispaced values from `min` to `max` inclusive.
    pub fn uniform(min: f64, max: f64, samples: usize) -> Result<Self> {
        if samples == 1 {
            return ParameterGrid::new(vec![min]);
        }
        let step = (max - min) / (samples - 1) as f64;
        ParameterGrid::new((0..samples).map(|i| if i + 1 == samples { max } else { min + step * i as f64 }).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One payload per parameter sample.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyField<T> {
    pub params: ParameterGrid,
    pub fibers: Vec<T>,
}

impl<T> FamilyField<T> {
    pub fn new(params: ParameterGrid, fibers: Vec<T>) -> Result<Self> {
        if params.len() != fibers.len() {
            return Err(Error::Dimension(format!(
                "{} parameter samples but {} fibers",
                params.len(),
                fibers.len()
            )));
        }
        Ok(FamilyField { params, fibers })
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.params.values().iter().copied().zip(self.fibers.iter())
    }
}

use super::ParameterGrid;
use crate::{Error, Result};

/// Hat-function weights over anchor samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOfUnity {
    anchors: Vec<usize>,
    /// `weights[i][j]`: weight of anchor `j` at sample `i`.
    weights: Vec<Vec<f64>>,
}

impl PartitionOfUnity {
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn weights(&self, sample: usize) -> &[f64] {
        &self.weights[sample]
    }

    pub fn weight(&self, sample: usize, anchor: usize) -> f64 {
        self.weights[sample][anchor]
    }

    /// Sample indices inside the closed hat support of anchor `j`.
    pub fn window(&self, j: usize) -> std::ops::RangeInclusive<usize> {
        let last = self.weights.len() - 1;
        let lo = if j == 0 { 0 } else { self.anchors[j - 1] };
        let hi = if j + 1 == self.anchors.len() { last } else { self.anchors[j + 1] };
        lo..=hi
    }
}

/// Piecewise-linear partition of unity with one hat per anchor.
///
/// A single anchor gets weight 1 everywhere. Otherwise the anchors must be
/// strictly increasing sample indices that include the first and last sample.
pub fn hat_partition(params: &ParameterGrid, anchors: &[usize]) -> Result<PartitionOfUnity> {
    let m = params.len();
    if anchors.is_empty() {
        return Err(Error::Coverage("no anchors given".into()));
    }
    if anchors.iter().any(|&a| a >= m) {
        return Err(Error::Coverage(format!("anchor index outside 0..{m}")));
    }
    if anchors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Coverage("anchors must be strictly increasing".into()));
    }
    if anchors.len() == 1 {
        return Ok(PartitionOfUnity { anchors: anchors.to_vec(), weights: vec![vec![1.0]; m] });
    }
    if anchors[0] != 0 || *anchors.last().unwrap() != m - 1 {
        return Err(Error::Coverage("anchors must include the first and last sample".into()));
    }
    let b = params.values();
    let mut weights = vec![vec![0.0; anchors.len()]; m];
    for (i, w) in weights.iter_mut().enumerate() {
        let j = anchors.partition_point(|&a| a <= i) - 1;
        if anchors[j] == i {
            w[j] = 1.0;
            continue;
        }
        let (lo, hi) = (b[anchors[j]], b[anchors[j + 1]]);
        let lambda = (b[i] - lo) / (hi - lo);
        w[j] = 1.0 - lambda;
        w[j + 1] = lambda;
    }
    Ok(PartitionOfUnity { anchors: anchors.to_vec(), weights })
}

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DecentralizedProblem, LogisticLoss, NodeProblem};
use crate::error::{check_dim, Error, Result};
use crate::linalg::seeded_rng;
use crate::operators::ConstraintSet;

/// Feature rows with +1/-1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSamples {
    pub features: DMatrix<f64>,
    pub labels: DVector<f64>,
}

impl LabeledSamples {
    pub fn new(features: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        check_dim(features.nrows(), labels.len())?;
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidParameter("labels must be +1 or -1".into()));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }
}

/// Two overlapping Gaussian clusters with means `+-separation/(2 sqrt(m)) 1`
/// and unit covariance; labels alternate so the classes are balanced.
pub fn synthetic_two_clusters(samples: usize, dim: usize, separation: f64, seed: u64) -> Result<LabeledSamples> {
    if samples == 0 || dim == 0 {
        return Err(Error::InvalidParameter("need at least one sample and one feature".into()));
    }
    let mut rng = seeded_rng(seed);
    let shift = separation / (2.0 * (dim as f64).sqrt());
    let labels = DVector::from_fn(samples, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
    let mut features = DMatrix::zeros(samples, dim);
    for i in 0..samples {
        for j in 0..dim {
            let noise: f64 = rng.sample(StandardNormal);
            features[(i, j)] = labels[i] * shift + noise;
        }
    }
    LabeledSamples::new(features, labels)
}

/// Shuffles the samples with `seed` and deals `N_s / M` to each node; each
/// node's ridge weight is `lambda / M`.
pub fn build_logistic_problem(
    data: &LabeledSamples,
    nodes: usize,
    lambda: f64,
    seed: u64,
) -> Result<DecentralizedProblem> {
    if nodes == 0 || data.is_empty() {
        return Err(Error::InvalidParameter("need at least one node and one sample".into()));
    }
    if !data.len().is_multiple_of(nodes) {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot be split equally across {nodes} nodes",
            data.len()
        )));
    }
    let per = data.len() / nodes;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut out = Vec::with_capacity(nodes);
    for chunk in order.chunks(per) {
        let feats = data.features.select_rows(chunk);
        let labels = data.labels.select_rows(chunk);
        let loss = LogisticLoss::new(feats, labels, lambda / nodes as f64)?;
        out.push(NodeProblem::new(Arc::new(loss), ConstraintSet::WholeSpace { dim: data.dim() })?);
    }
    DecentralizedProblem::new(out)
}

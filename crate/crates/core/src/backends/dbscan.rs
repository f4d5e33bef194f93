//! DBSCAN with noise points as singleton clusters.

use crate::error::{Error, Result};
use crate::model::{canonical_labels, Clustering, Dataset, DistortionMeasure};
use crate::perturb::nn_representation;

use super::PairwiseDistances;

/// Point role after density classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Core,
    Border,
    Noise,
}

/// Cluster labels and point roles. Noise points get singleton labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DbscanLabels {
    pub labels: Vec<usize>,
    pub kinds: Vec<PointKind>,
}

/// DBSCAN under euclidean distance with nearest-neighbour representatives.
///
/// A point is core when at least `min_pts` points (itself included) lie
/// within `eps`. Border points join the cluster of their lowest-index core
/// neighbour. Every noise point becomes its own cluster.
pub fn dbscan(dataset: &Dataset, eps: f64, min_pts: usize) -> Result<Clustering> {
    let labels = dbscan_labels(dataset, eps, min_pts)?;
    nn_representation(dataset, labels.labels, DistortionMeasure::Euclidean)
}

pub fn dbscan_labels(dataset: &Dataset, eps: f64, min_pts: usize) -> Result<DbscanLabels> {
    let m = DistortionMeasure::Euclidean;
    dbscan_by(dataset.len(), eps, min_pts, |i, j| {
        m.distance(dataset.point(i), dataset.point(j))
    })
}

/// Same as [`dbscan_labels`] over precomputed distances.
pub fn dbscan_labels_from(
    distances: &PairwiseDistances,
    eps: f64,
    min_pts: usize,
) -> Result<DbscanLabels> {
    dbscan_by(distances.len(), eps, min_pts, |i, j| distances.get(i, j))
}

fn dbscan_by(
    n: usize,
    eps: f64,
    min_pts: usize,
    dist: impl Fn(usize, usize) -> f64,
) -> Result<DbscanLabels> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    if min_pts == 0 {
        return Err(Error::InvalidParams("min_pts must be at least 1".into()));
    }
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && dist(i, j) <= eps).collect())
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() + 1 >= min_pts).collect();

    const UNSET: usize = usize::MAX;
    let mut label = vec![UNSET; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if !core[start] || label[start] != UNSET {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            for &q in &neighbours[p] {
                if core[q] && label[q] == UNSET {
                    label[q] = next;
                    stack.push(q);
                }
            }
        }
        next += 1;
    }

    let mut kinds = vec![PointKind::Core; n];
    for j in 0..n {
        if core[j] {
            continue;
        }
        // neighbour lists are ascending, so the first core neighbour is the lowest
        match neighbours[j].iter().find(|&&q| core[q]) {
            Some(&q) => {
                label[j] = label[q];
                kinds[j] = PointKind::Border;
            }
            None => {
                label[j] = next;
                next += 1;
                kinds[j] = PointKind::Noise;
            }
        }
    }
    Ok(DbscanLabels {
        labels: canonical_labels(&label),
        kinds,
    })
}

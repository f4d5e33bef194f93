//! Shared domain model: datasets, clusterings, distortion measures and
//! clustering parameter bundles.
//!
//! Observation and cluster indices are 0-based throughout. A clustering with
//! `ν` clusters uses labels `0..ν`, and every label has at least one member.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × d` matrix of finite observations, stored row-major, with optional
/// binary outlier labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    dim: usize,
    labels: Option<Vec<bool>>,
}

impl Dataset {
    /// Builds a dataset from rows of equal length.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDataset("dataset has no observations".into()))?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidDataset(format!(
                    "row {j} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, dim)
    }

    /// Builds a dataset from a row-major buffer.
    pub fn from_flat(values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("dimensionality must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidDataset("dataset has no observations".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidDataset(format!(
                "{} values do not form rows of length {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        let n = values.len() / dim;
        Ok(Dataset {
            values,
            n,
            dim,
            labels: None,
        })
    }

    /// Attaches outlier labels (`true` = outlier).
    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} observations",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Number of labelled outliers, if labels are present.
    pub fn outlier_count(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().filter(|&&y| y).count())
    }
}

/// Per-observation dissimilarity used as distortion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistortionMeasure {
    #[default]
    Euclidean,
    SquaredEuclidean,
    Manhattan,
}

impl DistortionMeasure {
    /// Distance between two points of equal length. Lengths are not checked;
    /// use [`point_distortion`] for untrusted input.
    #[inline]
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            DistortionMeasure::Euclidean => squared_l2(a, b).sqrt(),
            DistortionMeasure::SquaredEuclidean => squared_l2(a, b),
            DistortionMeasure::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

#[inline]
pub(crate) fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl fmt::Display for DistortionMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistortionMeasure::Euclidean => "euclidean",
            DistortionMeasure::SquaredEuclidean => "squared-euclidean",
            DistortionMeasure::Manhattan => "manhattan",
        })
    }
}

impl FromStr for DistortionMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(DistortionMeasure::Euclidean),
            "squared-euclidean" | "sqeuclidean" => Ok(DistortionMeasure::SquaredEuclidean),
            "manhattan" | "l1" => Ok(DistortionMeasure::Manhattan),
            other => Err(Error::InvalidParams(format!("unknown distortion measure `{other}`"))),
        }
    }
}

/// Distortion between an observation and its representative.
pub fn point_distortion(measure: DistortionMeasure, x: &[f64], r: &[f64]) -> Result<f64> {
    if x.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: r.len(),
        });
    }
    Ok(measure.distance(x, r))
}

/// How a clustering represents its observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Representation {
    /// One representative point per cluster.
    Centroids(Vec<Vec<f64>>),
    /// For every observation, the index of the observation representing it.
    NearestNeighbor(Vec<usize>),
}

/// A hard partition of a dataset together with its representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    assignments: Vec<usize>,
    representation: Representation,
    sizes: Vec<usize>,
}

impl Clustering {
    /// Validates and builds a clustering.
    ///
    /// Labels must cover `0..ν` without gaps. Centroid representations need
    /// exactly `ν` finite points of equal length; nearest-neighbour
    /// representations must point inside the observation's own cluster, at a
    /// different member unless the cluster is a singleton.
    pub fn new(assignments: Vec<usize>, representation: Representation) -> Result<Self> {
        let sizes = cluster_sizes(&assignments)?;
        match &representation {
            Representation::Centroids(centroids) => {
                if centroids.len() != sizes.len() {
                    return Err(Error::InvalidClustering(format!(
                        "{} centroids for {} clusters",
                        centroids.len(),
                        sizes.len()
                    )));
                }
                let dim = centroids[0].len();
                for (g, c) in centroids.iter().enumerate() {
                    if c.len() != dim || dim == 0 {
                        return Err(Error::InvalidClustering(format!(
                            "centroid {g} has dimension {}, expected {dim}",
                            c.len()
                        )));
                    }
                    if c.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidClustering(format!("centroid {g} is not finite")));
                    }
                }
            }
            Representation::NearestNeighbor(reps) => {
                if reps.len() != assignments.len() {
                    return Err(Error::InvalidClustering(format!(
                        "{} representatives for {} observations",
                        reps.len(),
                        assignments.len()
                    )));
                }
                for (j, &r) in reps.iter().enumerate() {
                    let g = assignments[j];
                    if r >= assignments.len() {
                        return Err(Error::InvalidClustering(format!(
                            "representative {r} of observation {j} is out of range"
                        )));
                    }
                    if assignments[r] != g {
                        return Err(Error::InvalidClustering(format!(
                            "representative {r} of observation {j} lies outside cluster {g}"
                        )));
                    }
                    let singleton = sizes[g] == 1;
                    if singleton != (r == j) {
                        return Err(Error::InvalidClustering(format!(
                            "observation {j}: only singletons may represent themselves"
                        )));
                    }
                }
            }
        }
        Ok(Clustering {
            assignments,
            representation,
            sizes,
        })
    }

    /// Builds a clustering whose nearest-neighbour representatives may sit
    /// outside their observation's cluster. Produced by purging, where
    /// observations that were represented by the purged point keep it.
    pub(crate) fn new_purged(
        assignments: Vec<usize>,
        representation: Representation,
    ) -> Result<Self> {
        let sizes = cluster_sizes(&assignments)?;
        Ok(Clustering {
            assignments,
            representation,
            sizes,
        })
    }

    /// Builds a centroid clustering whose centroids are the arithmetic means
    /// of the members.
    pub fn with_mean_centroids(dataset: &Dataset, assignments: Vec<usize>) -> Result<Self> {
        if assignments.len() != dataset.len() {
            return Err(Error::SizeMismatch(format!(
                "{} assignments for {} observations",
                assignments.len(),
                dataset.len()
            )));
        }
        let sizes = cluster_sizes(&assignments)?;
        let centroids = mean_centroids(dataset, &assignments, sizes.len());
        Clustering::new(assignments, Representation::Centroids(centroids))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn cluster_of(&self, j: usize) -> usize {
        self.assignments[j]
    }

    /// Checks that this clustering describes `dataset`.
    pub fn check_against(&self, dataset: &Dataset) -> Result<()> {
        if self.len() != dataset.len() {
            return Err(Error::SizeMismatch(format!(
                "clustering covers {} observations, dataset has {}",
                self.len(),
                dataset.len()
            )));
        }
        if let Representation::Centroids(c) = &self.representation {
            if c[0].len() != dataset.dim() {
                return Err(Error::DimensionMismatch {
                    expected: dataset.dim(),
                    found: c[0].len(),
                });
            }
        }
        Ok(())
    }

    /// Representative of observation `j`.
    pub fn rep_of<'a>(&'a self, dataset: &'a Dataset, j: usize) -> Result<&'a [f64]> {
        self.check_against(dataset)?;
        if j >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.len(),
            });
        }
        Ok(self.rep_unchecked(dataset, j))
    }

    #[inline]
    pub(crate) fn rep_unchecked<'a>(&'a self, dataset: &'a Dataset, j: usize) -> &'a [f64] {
        match &self.representation {
            Representation::Centroids(c) => &c[self.assignments[j]],
            Representation::NearestNeighbor(reps) => dataset.point(reps[j]),
        }
    }

    /// Distortion of every observation against its representative.
    pub fn point_distortions(
        &self,
        dataset: &Dataset,
        measure: DistortionMeasure,
    ) -> Result<Vec<f64>> {
        self.check_against(dataset)?;
        Ok((0..self.len())
            .map(|j| measure.distance(dataset.point(j), self.rep_unchecked(dataset, j)))
            .collect())
    }
}

/// Counts members per label; rejects empty input and unused labels.
pub fn cluster_sizes(assignments: &[usize]) -> Result<Vec<usize>> {
    let num = assignments
        .iter()
        .max()
        .map(|m| m + 1)
        .ok_or_else(|| Error::InvalidClustering("no assignments".into()))?;
    let mut sizes = vec![0usize; num];
    for &g in assignments {
        sizes[g] += 1;
    }
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidClustering(format!("cluster {g} is empty")));
    }
    Ok(sizes)
}

/// Relabels clusters in order of first appearance so that label 0 holds
/// observation 0.
pub fn canonical_labels(assignments: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignments
        .iter()
        .map(|g| {
            let next = map.len();
            *map.entry(*g).or_insert(next)
        })
        .collect()
}

pub(crate) fn mean_centroids(dataset: &Dataset, assignments: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dataset.dim()]; k];
    let mut counts = vec![0usize; k];
    for (x, &g) in dataset.points().zip(assignments) {
        counts[g] += 1;
        for (s, v) in sums[g].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let c = c as f64;
            s.iter_mut().for_each(|v| *v /= c);
        }
    }
    sums
}

/// Parameter bundle for a clustering backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum ClusteringParams {
    Kmeans { k: usize, n_start: usize, seed: u64 },
    /// Complete-linkage agglomerative clustering cut at `k` clusters.
    Hac { k: usize },
    Dbscan { min_pts: usize, eps: f64 },
}

impl ClusteringParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClusteringParams::Kmeans { k, n_start, .. } => {
                if k == 0 {
                    return Err(Error::InvalidParams("k must be at least 1".into()));
                }
                if n_start == 0 {
                    return Err(Error::InvalidParams("n_start must be at least 1".into()));
                }
            }
            ClusteringParams::Hac { k } => {
                if k == 0 {
                    return Err(Error::InvalidParams("k must be at least 1".into()));
                }
            }
            ClusteringParams::Dbscan { min_pts, eps } => {
                if min_pts == 0 {
                    return Err(Error::InvalidParams("min_pts must be at least 1".into()));
                }
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidParams(format!("eps must be positive, got {eps}")));
                }
            }
        }
        Ok(())
    }

    /// Name of the backend, as used in files and score tables.
    pub fn backend(&self) -> &'static str {
        match self {
            ClusteringParams::Kmeans { .. } => "kmeans",
            ClusteringParams::Hac { .. } => "hac",
            ClusteringParams::Dbscan { .. } => "dbscan",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            ClusteringParams::Kmeans { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

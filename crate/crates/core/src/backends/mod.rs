//! Clustering backends.

mod dbscan;
mod hac;
mod kmeans;

pub use dbscan::{dbscan, dbscan_labels, dbscan_labels_from, DbscanLabels, PointKind};
pub use hac::{complete_linkage, complete_linkage_from, hac_complete, Dendrogram};
pub use kmeans::{kmeans, kmeans_fit, KMeansFit, MAX_ITERATIONS};

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{Clustering, ClusteringParams, Dataset, DistortionMeasure};
use crate::purging::{Detector, Diagnostics, OutlierReport};

/// Runs the backend described by `params`.
pub fn fit(dataset: &Dataset, params: &ClusteringParams) -> Result<Clustering> {
    params.validate()?;
    match *params {
        ClusteringParams::Kmeans { k, n_start, seed } => kmeans(dataset, k, n_start, seed),
        ClusteringParams::Hac { k } => hac_complete(dataset, k),
        ClusteringParams::Dbscan { min_pts, eps } => dbscan(dataset, eps, min_pts),
    }
}

/// Flags the members of singleton clusters.
pub fn vanilla_detect(clustering: &Clustering) -> OutlierReport {
    let flagged: Vec<bool> = clustering
        .assignments()
        .iter()
        .map(|&g| clustering.sizes()[g] == 1)
        .collect();
    OutlierReport {
        detector: Detector::Vanilla,
        is_outlier: flagged,
        tested_clusterings: vec![0],
        thresholds: Vec::new(),
        diagnostics: Diagnostics::default(),
    }
}

/// Condensed symmetric distance matrix.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    values: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(dataset: &Dataset, measure: DistortionMeasure) -> Self {
        let n = dataset.len();
        let values = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..n).map(move |j| measure.distance(dataset.point(i), dataset.point(j)))
            })
            .collect();
        PairwiseDistances { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // rows 0..a hold n-1, n-2, ... entries
        self.values[a * (2 * self.n - a - 1) / 2 + (b - a - 1)]
    }

    /// Distance from every point to its `k`-th nearest other point.
    pub fn kth_neighbor_distances(&self, k: usize) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut row: Vec<f64> = (0..self.n).filter(|&j| j != i).map(|j| self.get(i, j)).collect();
                if k == 0 || k > row.len() {
                    return f64::NAN;
                }
                let (_, kth, _) = row.select_nth_unstable_by(k - 1, f64::total_cmp);
                *kth
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condensed_indexing() {
        let ds = Dataset::new(vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]]).unwrap();
        let pd = PairwiseDistances::new(&ds, DistortionMeasure::Euclidean);
        for i in 0..4 {
            for j in 0..4 {
                let want = (ds.point(i)[0] - ds.point(j)[0]).abs();
                assert_eq!(pd.get(i, j), want);
            }
        }
        assert_eq!(pd.kth_neighbor_distances(1), vec![1.0, 1.0, 2.0, 4.0]);
        assert_eq!(pd.kth_neighbor_distances(3), vec![7.0, 6.0, 4.0, 7.0]);
    }

    #[test]
    fn vanilla_flags_singletons() {
        let c = Clustering::new(
            vec![0, 0, 1, 2, 2],
            crate::model::Representation::NearestNeighbor(vec![1, 0, 2, 4, 3]),
        )
        .unwrap();
        let r = vanilla_detect(&c);
        assert_eq!(r.outliers(), vec![2]);
        assert_eq!(r.detector, Detector::Vanilla);
    }

    #[test]
    fn fit_dispatches() {
        let ds = Dataset::new(vec![vec![0.0], vec![0.1], vec![5.0]]).unwrap();
        let c = fit(&ds, &ClusteringParams::Hac { k: 2 }).unwrap();
        assert_eq!(c.assignments(), &[0, 0, 1]);
        let c = fit(&ds, &ClusteringParams::Dbscan { min_pts: 2, eps: 0.2 }).unwrap();
        assert_eq!(c.sizes(), &[2, 1]);
        let c = fit(&ds, &ClusteringParams::Kmeans { k: 2, n_start: 5, seed: 1 }).unwrap();
        assert_eq!(c.sizes().len(), 2);
        assert!(fit(&ds, &ClusteringParams::Hac { k: 0 }).is_err());
    }
}

//! Complete-linkage agglomerative clustering.

use crate::error::{Error, Result};
use crate::model::{canonical_labels, Clustering, Dataset, DistortionMeasure};

use super::PairwiseDistances;

/// Merge history of an agglomerative clustering. Merge `s` joins the
/// clusters occupying slots `a < b` at height `h`; the result keeps slot `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<(usize, usize, f64)>,
}

impl Dendrogram {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn merges(&self) -> &[(usize, usize, f64)] {
        &self.merges
    }

    /// Labels after applying the first `n - k` merges.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidParams(format!("k = {k} must lie in 1..={}", self.n)));
        }
        let mut slot: Vec<usize> = (0..self.n).collect();
        for &(a, b, _) in &self.merges[..self.n - k] {
            slot.iter_mut().filter(|s| **s == b).for_each(|s| *s = a);
        }
        Ok(canonical_labels(&slot))
    }
}

/// Complete-linkage dendrogram under euclidean distance. Among equally close
/// pairs the one with the lowest slot indices merges first.
pub fn complete_linkage(dataset: &Dataset) -> Dendrogram {
    complete_linkage_from(&PairwiseDistances::new(dataset, DistortionMeasure::Euclidean))
}

pub fn complete_linkage_from(distances: &PairwiseDistances) -> Dendrogram {
    let n = distances.len();
    // full symmetric copy that is updated in place
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = distances.get(i, j);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut active = vec![true; n];
    // nearest active partner with a larger slot index
    let mut nn = vec![(usize::MAX, f64::INFINITY); n];
    let row_min = |d: &[f64], active: &[bool], i: usize| {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in i + 1..n {
            if active[j] && d[i * n + j] < best.1 {
                best = (j, d[i * n + j]);
            }
        }
        best
    };
    for (i, slot) in nn.iter_mut().enumerate() {
        *slot = row_min(&d, &active, i);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if active[i] && nn[i].0 != usize::MAX && nn[i].1 < best {
                a = i;
                best = nn[i].1;
            }
        }
        let b = nn[a].0;
        merges.push((a, b, best));
        active[b] = false;
        for k in 0..n {
            if active[k] && k != a {
                let v = d[a * n + k].max(d[b * n + k]);
                d[a * n + k] = v;
                d[k * n + a] = v;
            }
        }
        for k in 0..n {
            if active[k] && (k == a || nn[k].0 == a || nn[k].0 == b) {
                nn[k] = row_min(&d, &active, k);
            }
        }
    }
    Dendrogram { n, merges }
}

/// Complete-linkage clustering cut at `k` clusters, with mean centroids.
pub fn hac_complete(dataset: &Dataset, k: usize) -> Result<Clustering> {
    if k == 0 || k > dataset.len() {
        return Err(Error::InvalidParams(format!(
            "k = {k} must lie in 1..={}",
            dataset.len()
        )));
    }
    let labels = complete_linkage(dataset).cut(k)?;
    Clustering::with_mean_centroids(dataset, labels)
}

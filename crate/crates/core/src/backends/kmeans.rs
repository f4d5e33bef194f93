//! Lloyd's k-means with seeded random restarts.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{mean_centroids, squared_l2, Clustering, Dataset};

pub const MAX_ITERATIONS: usize = 300;

/// Outcome of one k-means restart.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub clustering: Clustering,
    /// Within-cluster sum of squared euclidean distances.
    pub inertia: f64,
    /// Inertia after every centroid update.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Best of `n_start` Lloyd runs by inertia. Each run is initialised with `k`
/// distinct observations drawn from a generator seeded by `seed`.
pub fn kmeans(dataset: &Dataset, k: usize, n_start: usize, seed: u64) -> Result<Clustering> {
    kmeans_fit(dataset, k, n_start, seed).map(|f| f.clustering)
}

pub fn kmeans_fit(dataset: &Dataset, k: usize, n_start: usize, seed: u64) -> Result<KMeansFit> {
    let n = dataset.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!("k = {k} must lie in 1..={n}")));
    }
    if n_start == 0 {
        return Err(Error::InvalidParams("n_start must be at least 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n_start).map(|_| master.random()).collect();

    let runs: Vec<(usize, Vec<usize>, Vec<f64>, usize)> = seeds
        .par_iter()
        .enumerate()
        .map(|(restart, &s)| {
            let (assign, history, iters) = lloyd(dataset, k, s);
            (restart, assign, history, iters)
        })
        .collect();

    let (restart, assign, history, iterations) = runs
        .into_iter()
        .min_by(|a, b| {
            let ia = *a.2.last().expect("at least one update");
            let ib = *b.2.last().expect("at least one update");
            ia.total_cmp(&ib).then(a.0.cmp(&b.0))
        })
        .expect("n_start >= 1");
    let inertia = *history.last().expect("at least one update");
    Ok(KMeansFit {
        clustering: Clustering::with_mean_centroids(dataset, assign)?,
        inertia,
        history,
        iterations,
        restart,
    })
}

fn lloyd(dataset: &Dataset, k: usize, seed: u64) -> (Vec<usize>, Vec<f64>, usize) {
    let n = dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<Vec<f64>> = sample(&mut rng, n, k)
        .into_iter()
        .map(|j| dataset.point(j).to_vec())
        .collect();
    let mut assign = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    for iter in 0..MAX_ITERATIONS {
        iterations = iter + 1;
        let mut changed = false;
        for (j, x) in dataset.points().enumerate() {
            let g = nearest(&centroids, x);
            if assign[j] != g {
                assign[j] = g;
                changed = true;
            }
        }
        changed |= repair_empty(dataset, &mut assign, &mut centroids);
        if !changed {
            break;
        }
        centroids = mean_centroids(dataset, &assign, k);
        history.push(inertia(dataset, &assign, &centroids));
    }
    (assign, history, iterations)
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (g, c) in centroids.iter().enumerate() {
        let d = squared_l2(x, c);
        if d < best_d {
            best = g;
            best_d = d;
        }
    }
    best
}

/// Reseeds every empty cluster with the observation farthest from its
/// centroid, taken from a cluster that can spare it.
fn repair_empty(dataset: &Dataset, assign: &mut [usize], centroids: &mut [Vec<f64>]) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    assign.iter().for_each(|&g| sizes[g] += 1);
    let mut changed = false;
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (j, x) in dataset.points().enumerate() {
            let g = assign[j];
            if sizes[g] < 2 {
                continue;
            }
            let d = squared_l2(x, &centroids[g]);
            if d > far_d {
                far = Some(j);
                far_d = d;
            }
        }
        let j = far.expect("k <= n leaves a cluster with two members");
        sizes[assign[j]] -= 1;
        sizes[empty] += 1;
        assign[j] = empty;
        centroids[empty] = dataset.point(j).to_vec();
        changed = true;
    }
    changed
}

fn inertia(dataset: &Dataset, assign: &[usize], centroids: &[Vec<f64>]) -> f64 {
    dataset
        .points()
        .zip(assign)
        .map(|(x, &g)| squared_l2(x, &centroids[g]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Representation;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let ds = line(&[1.0, 2.0, 6.0]);
        let c = kmeans(&ds, 1, 3, 0).unwrap();
        assert_eq!(c.assignments(), &[0, 0, 0]);
        assert_eq!(c.representation(), &Representation::Centroids(vec![vec![3.0]]));
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let ds = line(&[0.0, 5.0, 1.0, 9.0]);
        let c = kmeans(&ds, 4, 2, 11).unwrap();
        assert_eq!(c.sizes(), &[1, 1, 1, 1]);
        assert_eq!(crate::rd::total_distortion(&ds, &c, Default::default()).unwrap(), 0.0);
    }

    #[test]
    fn separates_two_blobs() {
        let ds = line(&[0.0, 0.1, 10.0, 10.1]);
        // exhaustive check over all 2-partitions: the blob split minimises inertia
        let mut best = (f64::INFINITY, 0u32);
        for mask in 1u32..(1 << 3) {
            let labels: Vec<usize> = (0..4).map(|j| ((mask << 1) >> j & 1) as usize).collect();
            let c = Clustering::with_mean_centroids(&ds, crate::model::canonical_labels(&labels));
            let Ok(c) = c else { continue };
            let Representation::Centroids(cs) = c.representation() else { unreachable!() };
            let w = inertia(&ds, c.assignments(), cs);
            if w < best.0 {
                best = (w, mask);
            }
        }
        let c = kmeans(&ds, 2, 10, 3).unwrap();
        let Representation::Centroids(cs) = c.representation() else { unreachable!() };
        assert!((inertia(&ds, c.assignments(), cs) - best.0).abs() < 1e-12);
        assert_eq!(c.assignments()[0], c.assignments()[1]);
        assert_eq!(c.assignments()[2], c.assignments()[3]);
        assert_ne!(c.assignments()[0], c.assignments()[2]);
        let mut xs: Vec<f64> = cs.iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 0.05).abs() < 1e-12 && (xs[1] - 10.05).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_k() {
        let ds = line(&[0.0, 1.0]);
        assert!(kmeans(&ds, 3, 1, 0).is_err());
        assert!(kmeans(&ds, 0, 1, 0).is_err());
        assert!(kmeans(&ds, 1, 0, 0).is_err());
    }

    #[test]
    fn duplicate_points_never_leave_empty_clusters() {
        let ds = line(&[1.0; 6]);
        let c = kmeans(&ds, 3, 4, 5).unwrap();
        assert_eq!(c.num_clusters(), 3);
        assert!(c.sizes().iter().all(|&s| s >= 1));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let vals: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 * 0.37).collect();
        let ds = Dataset::from_flat(vals, 2).unwrap();
        let a = kmeans(&ds, 5, 4, 42).unwrap();
        let b = kmeans(&ds, 5, 4, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inertia_never_increases() {
        let vals: Vec<f64> = (0..600).map(|i| ((i * 7919) % 1009) as f64 / 17.0).collect();
        let ds = Dataset::from_flat(vals, 3).unwrap();
        for seed in 0..10 {
            let fit = kmeans_fit(&ds, 8, 1, seed).unwrap();
            for w in fit.history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{w:?}");
            }
        }
    }
}

//! Minimal perturbations of a seed clustering, and nearest-neighbour
//! representations for clusterings that come without representatives.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{cluster_sizes, Clustering, Dataset, DistortionMeasure, Representation};
use crate::purging::PurgedVariant;
use crate::rd::{entropy_delta, Measures};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    Min,
    Max,
}

/// Which cluster to perturb (by size) and which of its members to purge (by
/// distortion).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PerturbationStrategy {
    pub cluster_pick: Pick,
    pub observation_pick: Pick,
}

impl PerturbationStrategy {
    pub const MIN_MIN: Self = Self::new(Pick::Min, Pick::Min);
    pub const MIN_MAX: Self = Self::new(Pick::Min, Pick::Max);
    pub const MAX_MIN: Self = Self::new(Pick::Max, Pick::Min);
    pub const MAX_MAX: Self = Self::new(Pick::Max, Pick::Max);
    pub const ALL: [Self; 4] = [Self::MIN_MIN, Self::MIN_MAX, Self::MAX_MIN, Self::MAX_MAX];

    pub const fn new(cluster_pick: Pick, observation_pick: Pick) -> Self {
        PerturbationStrategy {
            cluster_pick,
            observation_pick,
        }
    }
}

impl Default for PerturbationStrategy {
    fn default() -> Self {
        Self::MAX_MAX
    }
}

impl fmt::Display for PerturbationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |p: Pick| match p {
            Pick::Min => "min",
            Pick::Max => "max",
        };
        write!(f, "{}-{}", name(self.cluster_pick), name(self.observation_pick))
    }
}

impl FromStr for PerturbationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pick = |p: &str| match p {
            "min" => Ok(Pick::Min),
            "max" => Ok(Pick::Max),
            _ => Err(Error::InvalidParams(format!("unknown perturbation strategy `{s}`"))),
        };
        let lower = s.to_ascii_lowercase();
        let (a, b) = lower
            .split_once('-')
            .ok_or_else(|| Error::InvalidParams(format!("unknown perturbation strategy `{s}`")))?;
        Ok(PerturbationStrategy::new(pick(a)?, pick(b)?))
    }
}

impl Serialize for PerturbationStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PerturbationStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Moves a single observation of `clustering` into a new singleton cluster.
///
/// Clusters are visited in the strategy's size order (ties: lowest cluster
/// index); within the first cluster whose purge changes the
/// entropy-distortion pair, the member with the minimum or maximum
/// distortion is purged (ties: lowest observation index). Singleton clusters
/// are never purged since that only relabels them. The original cluster
/// keeps its representative.
pub fn perturb(
    dataset: &Dataset,
    clustering: &Clustering,
    strategy: PerturbationStrategy,
    measures: impl Into<Measures>,
) -> Result<Clustering> {
    let measures = measures.into();
    let distortions = clustering.point_distortions(dataset, measures.distortion)?;
    let sizes = clustering.sizes();
    let n = clustering.len();

    let mut order: Vec<usize> = (0..sizes.len()).collect();
    match strategy.cluster_pick {
        Pick::Min => order.sort_by_key(|&g| sizes[g]),
        Pick::Max => order.sort_by_key(|&g| std::cmp::Reverse(sizes[g])),
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (j, &g) in clustering.assignments().iter().enumerate() {
        members[g].push(j);
    }

    for g in order {
        if sizes[g] < 2 {
            continue;
        }
        let chosen = pick_member(&members[g], &distortions, strategy.observation_pick);
        let delta_h = entropy_delta(sizes[g], n, measures.unit)?;
        if delta_h <= 1e-12 && distortions[chosen] <= 1e-12 {
            continue;
        }
        return PurgedVariant::new(dataset, clustering, 0, chosen)?.to_clustering();
    }
    Err(Error::NoPerturbation(
        "every cluster is a singleton, so no purge changes the clustering".into(),
    ))
}

fn pick_member(members: &[usize], distortions: &[f64], pick: Pick) -> usize {
    let mut best = members[0];
    for &j in &members[1..] {
        let better = match pick {
            Pick::Min => distortions[j] < distortions[best],
            Pick::Max => distortions[j] > distortions[best],
        };
        if better {
            best = j;
        }
    }
    best
}

/// Represents every observation by its nearest other member of the same
/// cluster (ties: lowest index). Singletons represent themselves.
pub fn nn_representation(
    dataset: &Dataset,
    assignments: Vec<usize>,
    measure: DistortionMeasure,
) -> Result<Clustering> {
    if assignments.len() != dataset.len() {
        return Err(Error::SizeMismatch(format!(
            "{} assignments for {} observations",
            assignments.len(),
            dataset.len()
        )));
    }
    let sizes = cluster_sizes(&assignments)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (j, &g) in assignments.iter().enumerate() {
        members[g].push(j);
    }
    let reps: Vec<usize> = (0..dataset.len())
        .into_par_iter()
        .map(|j| {
            let x = dataset.point(j);
            let mut best = j;
            let mut best_d = f64::INFINITY;
            for &other in &members[assignments[j]] {
                if other == j {
                    continue;
                }
                let d = measure.distance(x, dataset.point(other));
                if d < best_d {
                    best = other;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    Clustering::new(assignments, Representation::NearestNeighbor(reps))
}

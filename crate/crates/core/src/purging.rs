//! Cluster Purging.
//!
//! An observation is a rate-distortion outlier when moving it into a new
//! singleton cluster (represented exactly by itself) would lift every tested
//! hull clustering to or above the hull. For clustering `i` with hull slope
//! `κ_i < 0` this reduces to a per-cluster radius: observation `j` in a
//! cluster of size `f` qualifies iff
//!
//! ```text
//! d(x_j, r_{c_j}) >= Δh(f) / -κ_i
//! ```
//!
//! where `Δh(f)` is [`entropy_delta`]. [`parameter_free`] and [`parametric`]
//! use this closed form; [`definition_oracle`] recomputes every purged
//! clustering from scratch and exists to check the closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, Dataset, Representation};
use crate::rd::{build_hull, entropy, entropy_delta, Measures, RateDistortionHull, RdPoint};

/// Which detector produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    /// Members of singleton clusters.
    Vanilla,
    /// Parameter-free Cluster Purging.
    Cp,
    /// Parametric Cluster Purging.
    Cpp,
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Detector::Vanilla => "vanilla",
            Detector::Cp => "cp",
            Detector::Cpp => "cpp",
        })
    }
}

impl std::str::FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vanilla" => Ok(Detector::Vanilla),
            "cp" => Ok(Detector::Cp),
            "cpp" => Ok(Detector::Cpp),
            other => Err(Error::InvalidParams(format!("unknown detector `{other}`"))),
        }
    }
}

/// Purging boundaries of one tested clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringThresholds {
    pub clustering_id: usize,
    /// Hull segment the slope came from; `None` for a user-supplied slope.
    pub segment: Option<usize>,
    /// Slope used (negative).
    pub kappa: f64,
    /// Boundary radius per cluster, in distortion units.
    pub thresholds: Vec<f64>,
    /// Observations satisfying the boundary in this clustering.
    #[serde(skip)]
    pub flagged: Vec<bool>,
}

/// Hull bookkeeping attached to a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub rd_points: Vec<RdPoint>,
    pub hull: Option<RateDistortionHull>,
    /// Clusterings not tested: off the hull, or the leftmost hull vertex.
    pub dropped_clusterings: Vec<usize>,
    /// Hull clusterings whose segment has a non-negative slope.
    pub skipped_segments: Vec<usize>,
}

/// Result of an outlier detector.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierReport {
    pub detector: Detector,
    pub is_outlier: Vec<bool>,
    pub thresholds: Vec<ClusteringThresholds>,
    pub tested_clusterings: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl OutlierReport {
    pub fn len(&self) -> usize {
        self.is_outlier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_outlier.is_empty()
    }

    /// Indices of flagged observations, ascending.
    pub fn outliers(&self) -> Vec<usize> {
        self.is_outlier
            .iter()
            .enumerate()
            .filter_map(|(j, &o)| o.then_some(j))
            .collect()
    }

    pub fn num_outliers(&self) -> usize {
        self.is_outlier.iter().filter(|&&o| o).count()
    }
}

/// A clustering with observation `j` moved into a new singleton cluster that
/// represents it exactly.
///
/// For nearest-neighbour representations, observations that were
/// represented by `j` keep it as their representative, so only `j`'s own
/// distortion term changes.
#[derive(Debug, Clone, PartialEq)]
pub struct PurgedVariant {
    pub base_id: usize,
    pub observation: usize,
    assignments: Vec<usize>,
    representation: Representation,
}

impl PurgedVariant {
    pub fn new(dataset: &Dataset, base: &Clustering, base_id: usize, j: usize) -> Result<Self> {
        base.check_against(dataset)?;
        if j >= base.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: base.len(),
            });
        }
        let mut assignments = base.assignments().to_vec();
        assignments[j] = base.num_clusters();
        let representation = match base.representation() {
            Representation::Centroids(c) => {
                let mut c = c.clone();
                c.push(dataset.point(j).to_vec());
                Representation::Centroids(c)
            }
            Representation::NearestNeighbor(reps) => {
                let mut reps = reps.clone();
                reps[j] = j;
                Representation::NearestNeighbor(reps)
            }
        };
        Ok(PurgedVariant {
            base_id,
            observation: j,
            assignments,
            representation,
        })
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    /// Entropy recomputed from the variant's assignments. Purging a singleton
    /// leaves its old cluster empty; empty clusters contribute nothing.
    pub fn entropy(&self, measures: Measures) -> f64 {
        let mut sizes = vec![0usize; self.assignments.iter().max().map_or(0, |m| m + 1)];
        for &g in &self.assignments {
            sizes[g] += 1;
        }
        sizes.retain(|&f| f > 0);
        entropy(&sizes, self.assignments.len(), measures.unit)
            .expect("sizes are recounted from assignments")
    }

    /// Total distortion recomputed from scratch over all observations.
    pub fn distortion(&self, dataset: &Dataset, measures: Measures) -> f64 {
        let m = measures.distortion;
        (0..self.assignments.len())
            .map(|k| {
                let r = match &self.representation {
                    Representation::Centroids(c) => &c[self.assignments[k]][..],
                    Representation::NearestNeighbor(reps) => dataset.point(reps[k]),
                };
                m.distance(dataset.point(k), r)
            })
            .sum()
    }

    /// Materializes the variant as a [`Clustering`], dropping a cluster left
    /// empty by the purge.
    pub fn to_clustering(&self) -> Result<Clustering> {
        let mut assignments = self.assignments.clone();
        let mut representation = self.representation.clone();
        let num = assignments.iter().max().map_or(0, |m| m + 1);
        let mut used = vec![false; num];
        assignments.iter().for_each(|&g| used[g] = true);
        if let Some(empty) = used.iter().position(|u| !u) {
            assignments
                .iter_mut()
                .filter(|g| **g > empty)
                .for_each(|g| *g -= 1);
            if let Representation::Centroids(c) = &mut representation {
                c.remove(empty);
            }
        }
        Clustering::new_purged(assignments, representation)
    }
}

/// Hull-based representivity of a modified clustering:
/// `L_i(d(x, r')) / h(c')` using segment `i`'s linear extension.
pub fn representivity_estimate(
    dataset: &Dataset,
    modified: &PurgedVariant,
    hull: &RateDistortionHull,
    segment: usize,
    measures: Measures,
) -> Result<f64> {
    let kappa = hull.slope(segment)?;
    if kappa >= 0.0 {
        return Err(Error::IncreasingSegment { segment, kappa });
    }
    let h = modified.entropy(measures);
    if h == 0.0 {
        return Err(Error::ZeroEntropy);
    }
    let d = modified.distortion(dataset, measures);
    Ok(hull.eval(d, segment)? / h)
}

/// Purging boundary `Δh / -κ` in distortion units.
pub fn purging_threshold(delta_h: f64, kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa >= 0.0 {
        return Err(Error::IncreasingSegment { segment: 0, kappa });
    }
    if delta_h.is_nan() || delta_h < 0.0 {
        return Err(Error::InvalidParams(format!("entropy delta {delta_h} is negative")));
    }
    Ok(delta_h / -kappa)
}

/// Per-cluster boundaries for slope magnitude `kappa_magnitude`.
fn cluster_thresholds(clustering: &Clustering, kappa_magnitude: f64, measures: Measures) -> Vec<f64> {
    let n = clustering.len();
    clustering
        .sizes()
        .iter()
        .map(|&f| entropy_delta(f, n, measures.unit).expect("1 <= f <= n") / kappa_magnitude)
        .collect()
}

/// Relative slack on the purging boundary. A purged clustering that lands
/// exactly on the hull, such as another hull clustering, must count as an
/// outlier regardless of rounding.
pub const BOUNDARY_RTOL: f64 = 1e-12;

fn flag(clustering: &Clustering, distortions: &[f64], thresholds: &[f64]) -> Vec<bool> {
    distortions
        .iter()
        .zip(clustering.assignments())
        .map(|(&d, &g)| d >= thresholds[g] * (1.0 - BOUNDARY_RTOL))
        .collect()
}

/// Tested hull segments: every vertex right of the leftmost one.
struct HullSelection {
    rd_points: Vec<RdPoint>,
    hull: RateDistortionHull,
    /// `(segment, clustering_id)` with a negative slope.
    tested: Vec<(usize, usize)>,
    dropped: Vec<usize>,
    skipped: Vec<usize>,
}

fn select_hull(
    dataset: &Dataset,
    clusterings: &[Clustering],
    measures: Measures,
) -> Result<HullSelection> {
    if clusterings.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least two clusterings, got {}",
            clusterings.len()
        )));
    }
    let rd_points = clusterings
        .iter()
        .enumerate()
        .map(|(id, c)| RdPoint::of(dataset, c, id, measures))
        .collect::<Result<Vec<_>>>()?;
    let hull = build_hull(&rd_points)?;

    let leftmost = hull.vertices()[0].clustering_id;
    let dropped = (0..clusterings.len())
        .filter(|&id| id == leftmost || !hull.contains(id))
        .collect();
    let mut tested = Vec::new();
    let mut skipped = Vec::new();
    for i in hull.segments() {
        let id = hull.vertices()[i].clustering_id;
        if hull.is_usable(i) {
            tested.push((i, id));
        } else {
            skipped.push(id);
        }
    }
    if tested.is_empty() {
        return Err(Error::EmptyTestedSet(
            "every hull segment right of the leftmost clustering is non-decreasing; \
             supply more clusterings or a perturbation"
                .into(),
        ));
    }
    Ok(HullSelection {
        rd_points,
        hull,
        tested,
        dropped,
        skipped,
    })
}

fn combine(n: usize, per_clustering: &[ClusteringThresholds]) -> Vec<bool> {
    (0..n)
        .map(|j| per_clustering.iter().all(|t| t.flagged[j]))
        .collect()
}

/// Parameter-free Cluster Purging over a set of clusterings of `dataset`.
///
/// Builds the rate-distortion hull of the clusterings, tests every hull
/// clustering except the leftmost one, and flags the observations that pass
/// the purging boundary in all of them. Segments with a non-negative slope
/// are skipped.
pub fn parameter_free(
    dataset: &Dataset,
    clusterings: &[Clustering],
    measures: impl Into<Measures>,
) -> Result<OutlierReport> {
    let measures = measures.into();
    let sel = select_hull(dataset, clusterings, measures)?;
    let mut per_clustering = Vec::with_capacity(sel.tested.len());
    for &(segment, id) in &sel.tested {
        let clustering = &clusterings[id];
        let kappa = sel.hull.slope(segment)?;
        let thresholds = cluster_thresholds(clustering, -kappa, measures);
        let distortions = clustering.point_distortions(dataset, measures.distortion)?;
        let flagged = flag(clustering, &distortions, &thresholds);
        per_clustering.push(ClusteringThresholds {
            clustering_id: id,
            segment: Some(segment),
            kappa,
            thresholds,
            flagged,
        });
    }
    Ok(OutlierReport {
        detector: Detector::Cp,
        is_outlier: combine(dataset.len(), &per_clustering),
        tested_clusterings: sel.tested.iter().map(|&(_, id)| id).collect(),
        thresholds: per_clustering,
        diagnostics: Diagnostics {
            rd_points: sel.rd_points,
            hull: Some(sel.hull),
            dropped_clusterings: sel.dropped,
            skipped_segments: sel.skipped,
        },
    })
}

/// Parametric Cluster Purging with a user-supplied hull slope magnitude.
///
/// Flags `x_j` iff `d(x_j, r_{c_j}) >= Δh(f_{c_j}) / kappa_magnitude`, which
/// is the parameter-free rule with `κ = -kappa_magnitude`.
pub fn parametric(
    dataset: &Dataset,
    clustering: &Clustering,
    kappa_magnitude: f64,
    measures: impl Into<Measures>,
) -> Result<OutlierReport> {
    let measures = measures.into();
    if kappa_magnitude.is_nan() || kappa_magnitude <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "kappa must be positive, got {kappa_magnitude}"
        )));
    }
    let distortions = clustering.point_distortions(dataset, measures.distortion)?;
    let thresholds = cluster_thresholds(clustering, kappa_magnitude, measures);
    let flagged = flag(clustering, &distortions, &thresholds);
    Ok(OutlierReport {
        detector: Detector::Cpp,
        is_outlier: flagged.clone(),
        tested_clusterings: vec![0],
        thresholds: vec![ClusteringThresholds {
            clustering_id: 0,
            segment: None,
            kappa: -kappa_magnitude,
            thresholds,
            flagged,
        }],
        diagnostics: Diagnostics::default(),
    })
}

/// Brute-force outlier test: materializes every purged clustering, recomputes
/// its entropy and distortion from scratch and flags `x_j` iff the
/// representivity estimate is at least 1 for every tested clustering.
///
/// Quadratic in `n`; intended as a reference for [`parameter_free`].
pub fn definition_oracle(
    dataset: &Dataset,
    clusterings: &[Clustering],
    measures: impl Into<Measures>,
) -> Result<OutlierReport> {
    let measures = measures.into();
    let sel = select_hull(dataset, clusterings, measures)?;
    let mut per_clustering = Vec::with_capacity(sel.tested.len());
    for &(segment, id) in &sel.tested {
        let base = &clusterings[id];
        let flagged = (0..dataset.len())
            .map(|j| {
                let variant = PurgedVariant::new(dataset, base, id, j)?;
                let rho = representivity_estimate(dataset, &variant, &sel.hull, segment, measures)?;
                Ok(rho >= 1.0 - BOUNDARY_RTOL)
            })
            .collect::<Result<Vec<_>>>()?;
        per_clustering.push(ClusteringThresholds {
            clustering_id: id,
            segment: Some(segment),
            kappa: sel.hull.slope(segment)?,
            thresholds: Vec::new(),
            flagged,
        });
    }
    Ok(OutlierReport {
        detector: Detector::Cp,
        is_outlier: combine(dataset.len(), &per_clustering),
        tested_clusterings: sel.tested.iter().map(|&(_, id)| id).collect(),
        thresholds: per_clustering,
        diagnostics: Diagnostics {
            rd_points: sel.rd_points,
            hull: Some(sel.hull),
            dropped_clusterings: sel.dropped,
            skipped_segments: sel.skipped,
        },
    })
}

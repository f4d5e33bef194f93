//! Entropy, distortion and the rate-distortion hull.
//!
//! A clustering maps to a point `(D, h)`: its total distortion and the
//! empirical entropy of its cluster sizes. The lower convex hull of such
//! points across several clusterings is a computable stand-in for the
//! empirical rate-distortion function of the dataset.


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, Dataset, DistortionMeasure};

/// Logarithm base used for entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnit {
    /// Natural logarithm.
    #[default]
    Nats,
    /// Base-2 logarithm.
    Bits,
}

impl EntropyUnit {
    #[inline]
    fn scale(self, nats: f64) -> f64 {
        match self {
            EntropyUnit::Nats => nats,
            EntropyUnit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

/// Distortion measure and entropy unit used together by every hull
/// computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Measures {
    pub distortion: DistortionMeasure,
    pub unit: EntropyUnit,
}

impl Measures {
    pub fn new(distortion: DistortionMeasure) -> Self {
        Measures {
            distortion,
            unit: EntropyUnit::Nats,
        }
    }

    pub fn with_unit(mut self, unit: EntropyUnit) -> Self {
        self.unit = unit;
        self
    }
}

impl From<DistortionMeasure> for Measures {
    fn from(distortion: DistortionMeasure) -> Self {
        Measures::new(distortion)
    }
}

/// Empirical entropy `-Σ (f/n) log(f/n)` of a partition with the given
/// cluster sizes.
///
/// The sum runs over the sizes in ascending order, so any relabelling of the
/// clusters gives a bit-identical result.
pub fn entropy(sizes: &[usize], n: usize, unit: EntropyUnit) -> Result<f64> {
    if sizes.contains(&0) {
        return Err(Error::InvalidClustering("cluster sizes must be positive".into()));
    }
    let total: usize = sizes.iter().sum();
    if total != n || n == 0 {
        return Err(Error::SizeMismatch(format!("cluster sizes sum to {total}, expected {n}")));
    }
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let nf = n as f64;
    let h: f64 = sorted
        .iter()
        .map(|&f| {
            let p = f as f64 / nf;
            -p * p.ln()
        })
        .sum();
    Ok(unit.scale(h.max(0.0)))
}

/// Total distortion `Σ_j d(x_j, r_{c_j})`.
pub fn total_distortion(
    dataset: &Dataset,
    clustering: &Clustering,
    measure: DistortionMeasure,
) -> Result<f64> {
    Ok(clustering.point_distortions(dataset, measure)?.iter().sum())
}

/// Entropy increase caused by moving one member of a size-`f` cluster into a
/// new singleton cluster, out of `n` observations:
/// `(f log f - (f-1) log(f-1)) / n`.
pub fn entropy_delta(f: usize, n: usize, unit: EntropyUnit) -> Result<f64> {
    if f == 0 || f > n {
        return Err(Error::InvalidParams(format!(
            "cluster size {f} outside 1..={n}"
        )));
    }
    Ok(unit.scale(entropy_delta_nats(f) / n as f64))
}

/// `f log f - (f-1) log(f-1)` rewritten as `log f + (f-1) log(f/(f-1))`,
/// which stays accurate for large `f`.
fn entropy_delta_nats(f: usize) -> f64 {
    if f == 1 {
        return 0.0;
    }
    let ff = f as f64;
    ff.ln() - (ff - 1.0) * (-1.0 / ff).ln_1p()
}

/// A clustering's position in distortion-entropy space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub distortion: f64,
    pub entropy: f64,
    /// Index of the clustering in the caller's list.
    pub clustering_id: usize,
}

impl RdPoint {
    pub fn of(
        dataset: &Dataset,
        clustering: &Clustering,
        clustering_id: usize,
        measures: Measures,
    ) -> Result<Self> {
        Ok(RdPoint {
            distortion: total_distortion(dataset, clustering, measures.distortion)?,
            entropy: entropy(clustering.sizes(), clustering.len(), measures.unit)?,
            clustering_id,
        })
    }
}

/// Piecewise-linear lower convex hull of a set of [`RdPoint`]s.
///
/// Vertices are sorted by strictly increasing distortion. Segment `i`
/// (for `1 <= i < vertices.len()`) joins vertex `i - 1` to vertex `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionHull {
    vertices: Vec<RdPoint>,
    /// `slopes[i - 1]` is the slope of segment `i`.
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl RateDistortionHull {
    pub fn vertices(&self) -> &[RdPoint] {
        &self.vertices
    }

    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    /// Segment indices `1..s`.
    pub fn segments(&self) -> std::ops::Range<usize> {
        1..self.vertices.len()
    }

    pub fn slope(&self, segment: usize) -> Result<f64> {
        self.check_segment(segment)?;
        Ok(self.slopes[segment - 1])
    }

    pub fn intercept(&self, segment: usize) -> Result<f64> {
        self.check_segment(segment)?;
        Ok(self.intercepts[segment - 1])
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    /// Segments with a negative slope. Non-decreasing segments carry no
    /// usable trade-off and are skipped by purging.
    pub fn usable_segments(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments().filter(|&i| self.slopes[i - 1] < 0.0)
    }

    pub fn is_usable(&self, segment: usize) -> bool {
        segment >= 1 && segment < self.vertices.len() && self.slopes[segment - 1] < 0.0
    }

    /// Whether clustering `id` is a hull vertex.
    pub fn contains(&self, clustering_id: usize) -> bool {
        self.vertices.iter().any(|v| v.clustering_id == clustering_id)
    }

    /// Linear extension of segment `i` evaluated at `distortion`, also left
    /// of the segment. Computed as `κ_i (D - D_i) + h_i`, which equals
    /// `κ_i D + δ_i` and is exact at the segment's right endpoint.
    pub fn eval(&self, distortion: f64, segment: usize) -> Result<f64> {
        self.check_segment(segment)?;
        let end = &self.vertices[segment];
        Ok(self.slopes[segment - 1] * (distortion - end.distortion) + end.entropy)
    }

    fn check_segment(&self, segment: usize) -> Result<()> {
        if segment == 0 || segment >= self.vertices.len() {
            return Err(Error::InvalidParams(format!(
                "segment {segment} outside 1..{}",
                self.vertices.len()
            )));
        }
        Ok(())
    }
}

/// Free-function form of [`RateDistortionHull::eval`].
pub fn hull_eval(hull: &RateDistortionHull, distortion: f64, segment: usize) -> Result<f64> {
    hull.eval(distortion, segment)
}

/// Lower convex hull of `points`.
///
/// Among points sharing a distortion only the lowest entropy survives (ties
/// go to the lowest clustering id); collinear interior points are dropped.
/// Fails with [`Error::DegenerateHull`] when fewer than two distinct
/// distortions remain.
pub fn build_hull(points: &[RdPoint]) -> Result<RateDistortionHull> {
    if let Some(p) = points
        .iter()
        .find(|p| !(p.distortion.is_finite() && p.entropy.is_finite()))
    {
        return Err(Error::InvalidParams(format!(
            "clustering {} has a non-finite distortion or entropy",
            p.clustering_id
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        a.distortion
            .total_cmp(&b.distortion)
            .then(a.entropy.total_cmp(&b.entropy))
            .then(a.clustering_id.cmp(&b.clustering_id))
    });
    sorted.dedup_by(|later, first| later.distortion == first.distortion);
    if sorted.len() < 2 {
        return Err(Error::DegenerateHull(
            "need at least two clusterings with distinct distortions; \
             supply more clusterings or a perturbation"
                .into(),
        ));
    }

    let mut hull: Vec<RdPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    let (slopes, intercepts) = hull
        .windows(2)
        .map(|w| {
            let kappa = (w[1].entropy - w[0].entropy) / (w[1].distortion - w[0].distortion);
            (kappa, w[1].entropy - kappa * w[1].distortion)
        })
        .unzip();
    Ok(RateDistortionHull {
        vertices: hull,
        slopes,
        intercepts,
    })
}

/// Positive when `o -> a -> b` turns counter-clockwise in (D, h) space.
fn cross(o: &RdPoint, a: &RdPoint, b: &RdPoint) -> f64 {
    (a.distortion - o.distortion) * (b.entropy - o.entropy)
        - (a.entropy - o.entropy) * (b.distortion - o.distortion)
}

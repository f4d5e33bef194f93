//! Detection metrics, parameter grid search and the k-means case study.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{
    complete_linkage, dbscan_labels_from, kmeans, vanilla_detect, PairwiseDistances,
};
use crate::error::{Error, Result};
use crate::model::{Clustering, ClusteringParams, Dataset, DistortionMeasure};
use crate::perturb::{nn_representation, perturb, PerturbationStrategy};
use crate::purging::{parameter_free, parametric, Detector, OutlierReport};
use crate::rd::Measures;

/// F1 score of the positive class. Zero when precision and recall are both zero.
pub fn f1(predicted: &[bool], truth: &[bool]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    let (mut tp, mut fp, mut fnn) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let tp = tp as f64;
    Ok(2.0 * tp / (2.0 * tp + fp as f64 + fnn as f64))
}

/// F1 of the outlier class, of the inlier class, and their mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClasswiseF1 {
    pub outlier: f64,
    pub inlier: f64,
    pub combined: f64,
}

impl ClasswiseF1 {
    pub fn new(outlier: f64, inlier: f64) -> Self {
        ClasswiseF1 {
            outlier,
            inlier,
            combined: (outlier + inlier) / 2.0,
        }
    }
}

pub fn classwise_f1(predicted: &[bool], truth: &[bool]) -> Result<ClasswiseF1> {
    let outlier = f1(predicted, truth)?;
    let neg = |v: &[bool]| v.iter().map(|b| !b).collect::<Vec<_>>();
    let inlier = f1(&neg(predicted), &neg(truth))?;
    Ok(ClasswiseF1::new(outlier, inlier))
}

/// Score a grid search maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    OutlierF1,
    Combined,
}

impl Target {
    fn pick(self, s: &ClasswiseF1) -> f64 {
        match self {
            Target::OutlierF1 => s.outlier,
            Target::Combined => s.combined,
        }
    }
}

/// Clustering parameter grid. Missing lists take their standard ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum BackendGrid {
    /// `k` defaults to 2..=10.
    Kmeans {
        #[serde(default)]
        k: Option<Vec<usize>>,
        #[serde(default = "default_n_start")]
        n_start: usize,
        #[serde(default)]
        seed: u64,
    },
    /// `k` defaults to 1..=n.
    Hac {
        #[serde(default)]
        k: Option<Vec<usize>>,
    },
    /// `min_pts` defaults to d+1..=d+10. For each `min_pts`, `eps` defaults to
    /// the distinct positive distances from each point to its `min_pts`-th
    /// nearest neighbour.
    Dbscan {
        #[serde(default)]
        min_pts: Option<Vec<usize>>,
        #[serde(default)]
        eps: Option<Vec<f64>>,
    },
}

fn default_n_start() -> usize {
    1000
}

/// Slope magnitudes swept by the parametric detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    /// Number of linearly spaced values. Defaults to `min(n, 200)`.
    pub steps: Option<usize>,
    /// Use `n` steps regardless of `steps`.
    pub exact: bool,
    /// Explicit values; overrides the linear spacing.
    pub values: Option<Vec<f64>>,
}

impl Default for KappaGrid {
    fn default() -> Self {
        KappaGrid {
            min: 0.1,
            max: 10.0,
            steps: None,
            exact: false,
            values: None,
        }
    }
}

pub const DEFAULT_MAX_KAPPA_STEPS: usize = 200;

impl KappaGrid {
    pub fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let values = match &self.values {
            Some(v) => v.clone(),
            None => {
                let steps = if self.exact {
                    n
                } else {
                    self.steps.unwrap_or(n.min(DEFAULT_MAX_KAPPA_STEPS))
                };
                if !(self.min > 0.0 && self.min <= self.max && self.max.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "kappa range [{}, {}] must be positive and ordered",
                        self.min, self.max
                    )));
                }
                linspace(self.min, self.max, steps)
            }
        };
        if values.is_empty() {
            return Err(Error::InvalidParams("kappa grid is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v <= 0.0) {
            return Err(Error::InvalidParams(format!("kappa grid value {v} is not positive")));
        }
        Ok(values)
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchConfig {
    #[serde(flatten)]
    pub backend: BackendGrid,
    pub detector: Detector,
    #[serde(default)]
    pub kappa: KappaGrid,
    #[serde(default)]
    pub strategy: PerturbationStrategy,
    #[serde(default)]
    pub measure: DistortionMeasure,
    #[serde(default)]
    pub target: Target,
}

impl GridSearchConfig {
    pub fn new(backend: BackendGrid, detector: Detector) -> Self {
        GridSearchConfig {
            backend,
            detector,
            kappa: KappaGrid::default(),
            strategy: PerturbationStrategy::default(),
            measure: DistortionMeasure::default(),
            target: Target::default(),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub index: usize,
    pub backend: String,
    pub k: Option<usize>,
    pub n_start: Option<usize>,
    pub seed: Option<u64>,
    pub min_pts: Option<usize>,
    pub eps: Option<f64>,
    pub kappa: Option<f64>,
    pub num_clusters: Option<usize>,
    pub num_outliers: usize,
    pub outlier_f1: f64,
    pub inlier_f1: f64,
    pub combined_f1: f64,
    /// Wall time of the clustering call, shared by rows of one parametrization.
    pub cluster_seconds: f64,
    /// Wall time of the detector call.
    pub detect_seconds: f64,
    pub error: Option<String>,
}

impl ScoreRow {
    fn new(params: &ClusteringParams) -> Self {
        let (k, n_start, seed, min_pts, eps) = match *params {
            ClusteringParams::Kmeans { k, n_start, seed } => {
                (Some(k), Some(n_start), Some(seed), None, None)
            }
            ClusteringParams::Hac { k } => (Some(k), None, None, None, None),
            ClusteringParams::Dbscan { min_pts, eps } => (None, None, None, Some(min_pts), Some(eps)),
        };
        ScoreRow {
            index: 0,
            backend: params.backend().to_string(),
            k,
            n_start,
            seed,
            min_pts,
            eps,
            kappa: None,
            num_clusters: None,
            num_outliers: 0,
            outlier_f1: 0.0,
            inlier_f1: 0.0,
            combined_f1: 0.0,
            cluster_seconds: 0.0,
            detect_seconds: 0.0,
            error: None,
        }
    }

    pub fn scores(&self) -> ClasswiseF1 {
        ClasswiseF1 {
            outlier: self.outlier_f1,
            inlier: self.inlier_f1,
            combined: self.combined_f1,
        }
    }

    pub fn params(&self) -> Option<ClusteringParams> {
        match self.backend.as_str() {
            "kmeans" => Some(ClusteringParams::Kmeans {
                k: self.k?,
                n_start: self.n_start?,
                seed: self.seed?,
            }),
            "hac" => Some(ClusteringParams::Hac { k: self.k? }),
            "dbscan" => Some(ClusteringParams::Dbscan {
                min_pts: self.min_pts?,
                eps: self.eps?,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: ScoreRow,
    pub rows: Vec<ScoreRow>,
}

impl GridSearchResult {
    pub fn failures(&self) -> impl Iterator<Item = &ScoreRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }
}

fn truth_of(dataset: &Dataset) -> Result<&[bool]> {
    dataset
        .labels()
        .ok_or_else(|| Error::InvalidDataset("dataset has no outlier labels".into()))
}

/// Expands the backend grid into clustering parametrizations.
pub fn expand_grid(dataset: &Dataset, grid: &BackendGrid) -> Result<Vec<ClusteringParams>> {
    let n = dataset.len();
    let params: Vec<ClusteringParams> = match grid {
        BackendGrid::Kmeans { k, n_start, seed } => k
            .clone()
            .unwrap_or_else(|| (2..=10).collect())
            .into_iter()
            .map(|k| ClusteringParams::Kmeans {
                k,
                n_start: *n_start,
                seed: *seed,
            })
            .collect(),
        BackendGrid::Hac { k } => k
            .clone()
            .unwrap_or_else(|| (1..=n).collect())
            .into_iter()
            .map(|k| ClusteringParams::Hac { k })
            .collect(),
        BackendGrid::Dbscan { min_pts, eps } => {
            let d = dataset.dim();
            let min_pts = min_pts.clone().unwrap_or_else(|| (d + 1..=d + 10).collect());
            let pd = eps
                .is_none()
                .then(|| PairwiseDistances::new(dataset, DistortionMeasure::Euclidean));
            let mut out = Vec::new();
            for m in min_pts {
                let eps_values = match (eps, &pd) {
                    (Some(e), _) => e.clone(),
                    (None, Some(pd)) => unique_positive(pd.kth_neighbor_distances(m)),
                    (None, None) => unreachable!(),
                };
                out.extend(eps_values.into_iter().map(|eps| ClusteringParams::Dbscan { min_pts: m, eps }));
            }
            out
        }
    };
    if params.is_empty() {
        return Err(Error::InvalidParams("clustering grid is empty".into()));
    }
    params.iter().try_for_each(ClusteringParams::validate)?;
    Ok(params)
}

fn unique_positive(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|x| *x > 0.0 && x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Fits every parametrization, sharing the dendrogram or distance matrix
/// across grid points where possible. Returns clustering and wall time.
fn fit_all(
    dataset: &Dataset,
    params: &[ClusteringParams],
) -> Vec<(Result<Clustering>, f64)> {
    let timed = |f: &dyn Fn() -> Result<Clustering>| {
        let t = Instant::now();
        let c = f();
        (c, t.elapsed().as_secs_f64())
    };
    let has = |b: &str| params.iter().any(|p| p.backend() == b);
    let dendrogram = has("hac").then(|| complete_linkage(dataset));
    let distances = has("dbscan").then(|| PairwiseDistances::new(dataset, DistortionMeasure::Euclidean));

    params
        .par_iter()
        .map(|p| match *p {
            ClusteringParams::Kmeans { k, n_start, seed } => timed(&|| kmeans(dataset, k, n_start, seed)),
            ClusteringParams::Hac { k } => timed(&|| {
                let labels = dendrogram.as_ref().expect("built above").cut(k)?;
                Clustering::with_mean_centroids(dataset, labels)
            }),
            ClusteringParams::Dbscan { min_pts, eps } => timed(&|| {
                let pd = distances.as_ref().expect("built above");
                let labels = dbscan_labels_from(pd, eps, min_pts)?;
                nn_representation(dataset, labels.labels, DistortionMeasure::Euclidean)
            }),
        })
        .collect()
}

fn run_detector(
    dataset: &Dataset,
    clustering: &Clustering,
    detector: Detector,
    kappa: Option<f64>,
    strategy: PerturbationStrategy,
    measures: Measures,
) -> Result<OutlierReport> {
    match detector {
        Detector::Vanilla => Ok(vanilla_detect(clustering)),
        Detector::Cp => {
            let perturbed = perturb(dataset, clustering, strategy, measures)?;
            parameter_free(dataset, &[clustering.clone(), perturbed], measures)
        }
        Detector::Cpp => parametric(dataset, clustering, kappa.expect("cpp rows carry kappa"), measures),
    }
}

/// Evaluates every grid point and returns the best one by the configured
/// target. Failed points score zero and carry their error message. Ties go
/// to the earliest grid point.
pub fn grid_search(dataset: &Dataset, config: &GridSearchConfig) -> Result<GridSearchResult> {
    let truth = truth_of(dataset)?;
    let params = expand_grid(dataset, &config.backend)?;
    let kappas = match config.detector {
        Detector::Cpp => config.kappa.resolve(dataset.len())?.into_iter().map(Some).collect(),
        _ => vec![None],
    };
    let measures = Measures::new(config.measure);
    let fits = fit_all(dataset, &params);

    let jobs: Vec<(usize, Option<f64>)> = (0..params.len())
        .flat_map(|p| kappas.iter().map(move |&k| (p, k)))
        .collect();
    let rows: Vec<ScoreRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(p, kappa))| {
            let mut row = ScoreRow::new(&params[p]);
            row.index = index;
            row.kappa = kappa;
            let (fit, seconds) = &fits[p];
            row.cluster_seconds = *seconds;
            let clustering = match fit {
                Ok(c) => c,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            row.num_clusters = Some(clustering.num_clusters());
            let t = Instant::now();
            let report = run_detector(dataset, clustering, config.detector, kappa, config.strategy, measures);
            row.detect_seconds = t.elapsed().as_secs_f64();
            match report.and_then(|r| Ok((classwise_f1(&r.is_outlier, truth)?, r.num_outliers()))) {
                Ok((s, count)) => {
                    row.outlier_f1 = s.outlier;
                    row.inlier_f1 = s.inlier;
                    row.combined_f1 = s.combined;
                    row.num_outliers = count;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();

    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if config.target.pick(&r.scores()) > config.target.pick(&rows[best].scores()) {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best: rows[best].clone(),
        rows,
    })
}

/// Repeated k-means runs scored under several perturbation strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    pub k: usize,
    /// Single-initialization k-means runs per seed.
    pub n_inits: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<PerturbationStrategy>,
    #[serde(default)]
    pub measure: DistortionMeasure,
}

fn all_strategies() -> Vec<PerturbationStrategy> {
    PerturbationStrategy::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyScore {
    pub strategy: PerturbationStrategy,
    /// Mean over all runs; failed runs count as zero.
    pub mean: ClasswiseF1,
    pub runs: usize,
    pub failures: Vec<String>,
}

/// Runs CP with a single perturbation on `n_inits` k-means clusterings for
/// each seed and averages class-wise F1 per strategy.
pub fn case_study(dataset: &Dataset, config: &CaseStudyConfig) -> Result<Vec<StrategyScore>> {
    let truth = truth_of(dataset)?;
    if config.n_inits == 0 || config.seeds.is_empty() || config.strategies.is_empty() {
        return Err(Error::InvalidParams(
            "case study needs at least one initialization, seed and strategy".into(),
        ));
    }
    let run_seeds: Vec<u64> = config
        .seeds
        .iter()
        .flat_map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..config.n_inits).map(move |_| rng.random::<u64>())
        })
        .collect();
    let measures = Measures::new(config.measure);

    let per_run: Vec<Vec<std::result::Result<ClasswiseF1, String>>> = run_seeds
        .par_iter()
        .map(|&seed| match kmeans(dataset, config.k, 1, seed) {
            Ok(c) => config
                .strategies
                .iter()
                .map(|&strategy| {
                    run_detector(dataset, &c, Detector::Cp, None, strategy, measures)
                        .and_then(|r| classwise_f1(&r.is_outlier, truth))
                        .map_err(|e| e.to_string())
                })
                .collect(),
            Err(e) => vec![Err(e.to_string()); config.strategies.len()],
        })
        .collect();

    let runs = run_seeds.len();
    Ok(config
        .strategies
        .iter()
        .enumerate()
        .map(|(s, &strategy)| {
            let mut sum = (0.0, 0.0);
            let mut failures = Vec::new();
            for run in &per_run {
                match &run[s] {
                    Ok(f) => {
                        sum.0 += f.outlier;
                        sum.1 += f.inlier;
                    }
                    Err(e) => failures.push(e.clone()),
                }
            }
            StrategyScore {
                strategy,
                mean: ClasswiseF1::new(sum.0 / runs as f64, sum.1 / runs as f64),
                runs,
                failures,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Representation;
    use proptest::prelude::*;
    use rand::Rng;

    fn toy() -> (Dataset, Clustering) {
        let ds = Dataset::new([0.0, 0.1, 0.2, 0.3, 0.4, 100.0].iter().map(|&x| vec![x]).collect())
            .unwrap()
            .with_labels(vec![false, false, false, false, false, true])
            .unwrap();
        let p = Clustering::new(
            vec![0, 0, 0, 0, 0, 1],
            Representation::Centroids(vec![vec![0.2], vec![100.0]]),
        )
        .unwrap();
        (ds, p)
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(&[true, false, true], &[true, false, true]).unwrap(), 1.0);
        assert_eq!(f1(&[false, false], &[true, false]).unwrap(), 0.0);
        // tp=1, fp=1, fn=1
        assert_eq!(f1(&[true, true, false], &[true, false, true]).unwrap(), 0.5);
        assert!(matches!(f1(&[true], &[true, false]), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn combined_is_mean() {
        let s = ClasswiseF1::new(0.17, 0.43);
        assert!((s.combined - 0.30).abs() < 1e-12);
        let s = ClasswiseF1::new(0.16, 0.97);
        assert!((s.combined - 0.565).abs() < 1e-12);
        let s = classwise_f1(&[true, false, false], &[true, false, false]).unwrap();
        assert_eq!(s, ClasswiseF1::new(1.0, 1.0));
    }

    #[test]
    fn kappa_grid_resolution() {
        let g = KappaGrid::default();
        assert_eq!(g.resolve(5).unwrap().len(), 5);
        assert_eq!(g.resolve(1000).unwrap().len(), 200);
        let v = g.resolve(1000).unwrap();
        assert_eq!(v[0], 0.1);
        assert!((v[199] - 10.0).abs() < 1e-12);
        let exact = KappaGrid { exact: true, ..KappaGrid::default() };
        assert_eq!(exact.resolve(1000).unwrap().len(), 1000);
        let bad = KappaGrid { values: Some(vec![1.0, 0.0]), ..KappaGrid::default() };
        assert!(bad.resolve(3).is_err());
        let empty = KappaGrid { values: Some(vec![]), ..KappaGrid::default() };
        assert!(empty.resolve(3).is_err());
    }

    #[test]
    fn toy_cpp_grid_finds_the_outlier() {
        let (ds, _) = toy();
        let mut cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![2]) }, Detector::Cpp);
        cfg.kappa.values = Some(vec![0.1, 1.8693, 10.0]);
        let res = grid_search(&ds, &cfg).unwrap();
        assert_eq!(res.rows.len(), 3);
        assert_eq!(res.best.outlier_f1, 1.0);
        assert_eq!(res.best.num_outliers, 1);
        // kappa = 0.1 already isolates only the singleton, so the tie goes to it
        assert_eq!(res.best.kappa, Some(0.1));
        assert_eq!(res.rows[1].outlier_f1, 1.0);
        assert!(res.rows[2].outlier_f1 < 1.0);
        let (_, p) = toy();
        let c = crate::backends::hac_complete(&ds, 2).unwrap();
        assert_eq!(c.assignments(), p.assignments());
    }

    #[test]
    fn singleton_grid_matches_direct_call() {
        let (ds, p) = toy();
        let mut cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![2]) }, Detector::Cp);
        cfg.strategy = PerturbationStrategy::MAX_MAX;
        let res = grid_search(&ds, &cfg).unwrap();
        assert_eq!(res.rows.len(), 1);
        let q = perturb(&ds, &p, PerturbationStrategy::MAX_MAX, DistortionMeasure::Euclidean).unwrap();
        let direct = parameter_free(&ds, &[p, q], DistortionMeasure::Euclidean).unwrap();
        let s = classwise_f1(&direct.is_outlier, ds.labels().unwrap()).unwrap();
        assert_eq!(res.best.scores(), s);
        assert_eq!(res.best.index, 0);
    }

    #[test]
    fn failing_grid_points_score_zero() {
        let (ds, _) = toy();
        // k = 6 gives all singletons, which cannot be perturbed
        let cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![6]) }, Detector::Cp);
        let res = grid_search(&ds, &cfg).unwrap();
        assert_eq!(res.best.outlier_f1, 0.0);
        assert!(res.best.error.is_some());
        assert_eq!(res.failures().count(), 1);
        let cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![7, 0]) }, Detector::Vanilla);
        assert!(grid_search(&ds, &cfg).is_err());
        let cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![7, 8]) }, Detector::Vanilla);
        let res = grid_search(&ds, &cfg).unwrap();
        assert!(res.rows.iter().all(|r| r.outlier_f1 == 0.0 && r.error.is_some()));
        let cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![]) }, Detector::Vanilla);
        assert!(grid_search(&ds, &cfg).is_err());
    }

    #[test]
    fn ties_go_to_first_grid_point() {
        let (ds, _) = toy();
        let cfg = GridSearchConfig::new(BackendGrid::Hac { k: Some(vec![2, 3]) }, Detector::Vanilla);
        let res = grid_search(&ds, &cfg).unwrap();
        assert_eq!(res.best.k, Some(2));
        assert_eq!(res.best.outlier_f1, 1.0);
    }

    #[test]
    fn dbscan_grid_defaults() {
        let ds = Dataset::new([0.0, 0.5, 1.0, 1.5, 2.0, 100.0].iter().map(|&x| vec![x]).collect()).unwrap();
        let params = expand_grid(&ds, &BackendGrid::Dbscan { min_pts: Some(vec![2]), eps: None }).unwrap();
        // second-nearest distances 1, 0.5, 0.5, 0.5, 1, 98.5
        let eps: Vec<f64> = params
            .iter()
            .map(|p| match p {
                ClusteringParams::Dbscan { eps, .. } => *eps,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(eps, vec![0.5, 1.0, 98.5]);
        let all = expand_grid(&ds, &BackendGrid::Dbscan { min_pts: None, eps: None }).unwrap();
        assert!(all.iter().all(|p| matches!(p, ClusteringParams::Dbscan { min_pts, .. } if (2..=11).contains(min_pts))));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: GridSearchConfig = serde_json::from_str(r#"{"backend":"kmeans","detector":"cpp"}"#).unwrap();
        assert_eq!(
            cfg.backend,
            BackendGrid::Kmeans { k: None, n_start: 1000, seed: 0 }
        );
        assert_eq!(cfg.strategy, PerturbationStrategy::MAX_MAX);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<GridSearchConfig>(&text).unwrap(), cfg);
        let cfg: GridSearchConfig = serde_json::from_str(
            r#"{"backend":"dbscan","min_pts":[3],"eps":[0.5],"detector":"cp","strategy":"min-max","measure":"manhattan"}"#,
        )
        .unwrap();
        assert_eq!(cfg.strategy, PerturbationStrategy::MIN_MAX);
        assert_eq!(cfg.measure, DistortionMeasure::Manhattan);
    }

    #[test]
    fn case_study_on_separable_toy() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            rows.push(vec![(i % 5) as f64 * 0.01, (i / 5) as f64 * 0.01]);
            labels.push(false);
            rows.push(vec![50.0 + (i % 5) as f64 * 0.01, (i / 5) as f64 * 0.01]);
            labels.push(false);
        }
        rows.push(vec![25.0, 40.0]);
        labels.push(true);
        let ds = Dataset::new(rows).unwrap().with_labels(labels).unwrap();
        let cfg = CaseStudyConfig {
            k: 3,
            n_inits: 1,
            seeds: vec![0],
            strategies: PerturbationStrategy::ALL.to_vec(),
            measure: DistortionMeasure::Euclidean,
        };
        let scores = case_study(&ds, &cfg).unwrap();
        assert_eq!(scores.len(), 4);
        assert!(scores.iter().all(|s| s.runs == 1 && s.failures.is_empty()));

        // one single-restart k-means run seeded from the per-seed generator
        let run_seed: u64 = ChaCha8Rng::seed_from_u64(0).random();
        let c = kmeans(&ds, 3, 1, run_seed).unwrap();
        let truth = ds.labels().unwrap();
        for s in &scores {
            let r = run_detector(&ds, &c, Detector::Cp, None, s.strategy, Measures::new(cfg.measure)).unwrap();
            let f = classwise_f1(&r.is_outlier, truth).unwrap();
            assert_eq!(s.mean, f, "{}", s.strategy);
        }
        let max_max = scores.iter().find(|s| s.strategy == PerturbationStrategy::MAX_MAX).unwrap();
        assert!(max_max.mean.outlier > 0.0);
    }

    proptest! {
        #[test]
        fn f1_is_permutation_invariant(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40),
            seed in any::<u64>(),
        ) {
            let (p, t): (Vec<bool>, Vec<bool>) = pairs.iter().copied().unzip();
            let mut idx: Vec<usize> = (0..p.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
            let ps: Vec<bool> = idx.iter().map(|&i| p[i]).collect();
            let ts: Vec<bool> = idx.iter().map(|&i| t[i]).collect();
            prop_assert_eq!(f1(&p, &t).unwrap(), f1(&ps, &ts).unwrap());
            let s = classwise_f1(&p, &t).unwrap();
            prop_assert_eq!(s.combined, (s.outlier + s.inlier) / 2.0);
            prop_assert!((0.0..=1.0).contains(&s.outlier) && (0.0..=1.0).contains(&s.inlier));
        }
    }
}

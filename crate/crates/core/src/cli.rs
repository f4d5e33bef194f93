//! The `cpurge` command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backends::{fit, vanilla_detect};
use crate::error::{Error, Result};
use crate::eval::{case_study, classwise_f1, grid_search, CaseStudyConfig, GridSearchConfig};
use crate::io;
use crate::model::{ClusteringParams, DistortionMeasure};
use crate::perturb::{perturb, PerturbationStrategy};
use crate::purging::{parameter_free, parametric};
use crate::rd::{build_hull, EntropyUnit, Measures, RdPoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cpurge", version, about = "Rate-distortion outlier detection on clusterings")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a dataset and write a clustering file.
    Cluster(ClusterArgs),
    /// Cluster Purging over clustering files, or one clustering plus a perturbation.
    Purge(PurgeArgs),
    /// Parametric Cluster Purging with a fixed slope magnitude.
    PurgeParametric(ParametricArgs),
    /// Flag the members of singleton clusters.
    Vanilla(VanillaArgs),
    /// Score a report against 0/1 labels.
    Evaluate(EvaluateArgs),
    /// Grid search a detector over clustering parameters.
    Gridsearch(GridsearchArgs),
    /// Mean class-wise F1 of the perturbation strategies over repeated k-means runs.
    CaseStudy(CaseStudyArgs),
    /// Export rate-distortion points and hull segments as CSV.
    Hull(HullArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Kmeans,
    Hac,
    Dbscan,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, default_value = "euclidean")]
    pub measure: DistortionMeasure,
    /// Entropy unit (nats or bits). Detection results do not depend on it.
    #[arg(long, value_enum, default_value = "nats")]
    pub unit: UnitArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Nats,
    Bits,
}

impl MeasureArgs {
    fn measures(&self) -> Measures {
        let unit = match self.unit {
            UnitArg::Nats => EntropyUnit::Nats,
            UnitArg::Bits => EntropyUnit::Bits,
        };
        Measures::new(self.measure).with_unit(unit)
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub backend: Backend,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub min_pts: Option<usize>,
    /// k-means restarts.
    #[arg(long, default_value_t = 10)]
    pub n_start: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PurgeArgs {
    pub data: PathBuf,
    #[arg(required = true)]
    pub clusterings: Vec<PathBuf>,
    /// Perturbation used when a single clustering is given.
    #[arg(long, default_value = "max-max")]
    pub strategy: PerturbationStrategy,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParametricArgs {
    pub data: PathBuf,
    pub clustering: PathBuf,
    /// Hull slope magnitude, positive.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VanillaArgs {
    pub clustering: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub report: PathBuf,
    /// CSV with a `label` column, or a single column of 0/1 values.
    pub labels: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridsearchArgs {
    /// Dataset CSV with a final `label` column.
    pub data: PathBuf,
    /// JSON grid configuration.
    pub config: PathBuf,
    /// Score table destination; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the best row as CSV.
    #[arg(long)]
    pub best: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    /// Dataset CSV with a final `label` column.
    pub data: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub n_inits: usize,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "min-min,min-max,max-min,max-max")]
    pub strategies: Vec<PerturbationStrategy>,
    #[arg(long, default_value = "euclidean")]
    pub measure: DistortionMeasure,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    pub data: PathBuf,
    #[arg(required = true)]
    pub clusterings: Vec<PathBuf>,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = sink(path)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    Ok(())
}

fn cluster_params(args: &ClusterArgs) -> Result<ClusteringParams> {
    let need = |v: Option<usize>, flag: &str| {
        v.ok_or_else(|| Error::InvalidParams(format!("--{flag} is required for this backend")))
    };
    let params = match args.backend {
        Backend::Kmeans => ClusteringParams::Kmeans {
            k: need(args.k, "k")?,
            n_start: args.n_start,
            seed: args.seed,
        },
        Backend::Hac => ClusteringParams::Hac { k: need(args.k, "k")? },
        Backend::Dbscan => ClusteringParams::Dbscan {
            min_pts: need(args.min_pts, "min-pts")?,
            eps: args
                .eps
                .ok_or_else(|| Error::InvalidParams("--eps is required for dbscan".into()))?,
        },
    };
    params.validate()?;
    Ok(params)
}

fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let params = cluster_params(args)?;
    let ds = io::read_dataset(&args.data)?;
    let clustering = fit(&ds, &params)?;
    emit(args.output.as_deref(), &io::clustering_to_json(&clustering, Some(&params))?)
}

fn cmd_purge(args: &PurgeArgs) -> Result<()> {
    let ds = io::read_dataset(&args.data)?;
    let measures = args.measures.measures();
    let mut clusterings = args
        .clusterings
        .iter()
        .map(|p| io::read_clustering(p))
        .collect::<Result<Vec<_>>>()?;
    for c in &clusterings {
        c.check_against(&ds)?;
    }
    if clusterings.len() == 1 {
        let perturbed = perturb(&ds, &clusterings[0], args.strategy, measures)?;
        clusterings.push(perturbed);
    }
    let report = parameter_free(&ds, &clusterings, measures)?;
    emit(args.output.as_deref(), &io::report_to_json(&report)?)
}

fn cmd_parametric(args: &ParametricArgs) -> Result<()> {
    if args.kappa.is_nan() || args.kappa <= 0.0 {
        return Err(Error::InvalidParams(format!("--kappa must be positive, got {}", args.kappa)));
    }
    let ds = io::read_dataset(&args.data)?;
    let clustering = io::read_clustering(&args.clustering)?;
    clustering.check_against(&ds)?;
    let report = parametric(&ds, &clustering, args.kappa, args.measures.measures())?;
    emit(args.output.as_deref(), &io::report_to_json(&report)?)
}

fn cmd_vanilla(args: &VanillaArgs) -> Result<()> {
    let clustering = io::read_clustering(&args.clustering)?;
    emit(args.output.as_deref(), &io::report_to_json(&vanilla_detect(&clustering))?)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let predicted = io::read_report_mask(&args.report)?;
    let truth = io::read_labels(&args.labels)?;
    let s = classwise_f1(&predicted, &truth)?;
    let text = format!(
        "outlier_f1,inlier_f1,combined_f1\n{},{},{}",
        s.outlier, s.inlier, s.combined
    );
    if args.output.is_some() {
        emit(args.output.as_deref(), &text)?;
    }
    emit(None, &text)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn cmd_gridsearch(args: &GridsearchArgs) -> Result<()> {
    let config: GridSearchConfig = read_json(&args.config)?;
    let ds = io::read_dataset(&args.data)?;
    let result = grid_search(&ds, &config)?;
    let mut w = sink(args.output.as_deref())?;
    io::write_scores_csv(&mut w, &result.rows)?;
    w.flush()?;
    drop(w);
    if let Some(p) = &args.best {
        io::write_scores_csv(BufWriter::new(File::create(p)?), std::slice::from_ref(&result.best))?;
    }
    let b = &result.best;
    let msg = format!(
        "best: row {} outlier_f1 {} inlier_f1 {} combined_f1 {}{}",
        b.index,
        b.outlier_f1,
        b.inlier_f1,
        b.combined_f1,
        b.kappa.map(|k| format!(" kappa {k}")).unwrap_or_default()
    );
    if args.output.is_some() {
        emit(None, &msg)
    } else {
        eprintln!("{msg}");
        Ok(())
    }
}

fn cmd_case_study(args: &CaseStudyArgs) -> Result<()> {
    let ds = io::read_dataset(&args.data)?;
    let config = CaseStudyConfig {
        k: args.k,
        n_inits: args.n_inits,
        seeds: args.seeds.clone(),
        strategies: args.strategies.clone(),
        measure: args.measure,
    };
    let scores = case_study(&ds, &config)?;
    let mut text = String::from("strategy,outlier_f1,inlier_f1,combined_f1,runs,failures");
    for s in &scores {
        text.push_str(&format!(
            "\n{},{},{},{},{},{}",
            s.strategy,
            s.mean.outlier,
            s.mean.inlier,
            s.mean.combined,
            s.runs,
            s.failures.len()
        ));
    }
    emit(args.output.as_deref(), &text)
}

fn cmd_hull(args: &HullArgs) -> Result<()> {
    if args.clusterings.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least two clusterings, got {}",
            args.clusterings.len()
        )));
    }
    let ds = io::read_dataset(&args.data)?;
    let measures = args.measures.measures();
    let points = args
        .clusterings
        .iter()
        .enumerate()
        .map(|(id, p)| {
            let c = io::read_clustering(p)?;
            RdPoint::of(&ds, &c, id, measures)
        })
        .collect::<Result<Vec<_>>>()?;
    let hull = build_hull(&points)?;
    let mut w = sink(args.output.as_deref())?;
    io::write_hull_csv(&mut w, &points, &hull)?;
    w.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    let run = || match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Purge(a) => cmd_purge(a),
        Command::PurgeParametric(a) => cmd_parametric(a),
        Command::Vanilla(a) => cmd_vanilla(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Gridsearch(a) => cmd_gridsearch(a),
        Command::CaseStudy(a) => cmd_case_study(a),
        Command::Hull(a) => cmd_hull(a),
    };
    match cli.jobs {
        Some(0) => Err(Error::InvalidParams("--jobs must be at least 1".into())),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidParams(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_degenerate() {
                EXIT_DEGENERATE
            } else {
                EXIT_USAGE
            }
        }
    }
}

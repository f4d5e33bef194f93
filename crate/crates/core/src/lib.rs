//! Outlier detection over arbitrary clusterings through the empirical
//! rate-distortion hull.
//!
//! An observation is flagged when isolating it into its own cluster costs
//! less entropy than the distortion it saves, measured against the slope of
//! the lower convex hull of the supplied clusterings.

pub mod backends;
pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod perturb;
pub mod purging;
pub mod rd;

pub use error::{Error, Result};
pub use model::{Clustering, ClusteringParams, Dataset, DistortionMeasure, Representation};
pub use perturb::{perturb, PerturbationStrategy, Pick};
pub use purging::{definition_oracle, parameter_free, parametric, Detector, OutlierReport};
pub use rd::{build_hull, entropy, entropy_delta, EntropyUnit, Measures, RateDistortionHull, RdPoint};

//! Evaluation against subjective scores: manifest loading, the five-parameter
//! logistic mapping to DMOS, correlation statistics, report rendering and the
//! intensity/chroma decomposition experiment.

mod decompose;
mod manifest;
mod regression;
mod report;
mod stats;

use std::path::PathBuf;

use crate::baselines::BaselineError;
use crate::imageio::ImageError;
use crate::pcdm::PcdmError;

pub use decompose::decompose_distortion;
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, DistortionClass, ManifestEntry};
pub use regression::{
    fit_regression, fit_regression_with, linear_fit, LogisticForm, RegressionParams, MAX_ITERATIONS,
    RELATIVE_TOLERANCE,
};
pub use report::{
    evaluate, literature_reference, score_pair, CellStats, EvalOptions, Metric, MetricReport, ScatterRow,
};
pub use stats::{pearson_cc, rmse, spearman_rho};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("manifest line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("manifest line {line}: file not found: {}", path.display())]
    MissingFile { line: usize, path: PathBuf },
    #[error("manifest line {line}: unknown distortion class {class:?}")]
    UnknownClass { line: usize, class: String },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("regression did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("unknown metric {0:?}; expected pcdm, psnr, ssim or de2000")]
    UnknownMetric(String),
    #[error("pair {ref_path} / {dist_path}: {source}")]
    Pair {
        ref_path: String,
        dist_path: String,
        #[source]
        source: Box<EvalError>,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Pcdm(#[from] PcdmError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

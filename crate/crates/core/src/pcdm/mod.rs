//! The perceptual color-difference metric.
//!
//! Both images are downsampled, converted to Lab and labeled with color-name
//! descriptors. Each aligned pixel pair is scored by fusing a thresholded
//! CIEDE2000 difference with the earth mover's distance between the two
//! descriptors through a logistic function:
//!
//! ```text
//! D = α · min(ΔE00, T) / T + (1 − α) · EMD(p1, p2)
//! v = 1 / (1 + exp(−z · (D − 1/2)))
//! ```
//!
//! The distortion map holds `v` per pixel; the score is its mean. Higher
//! scores mean lower quality.

mod resample;

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::colorspace::{delta_e_2000, srgb_to_lab, De2000Params, LabColor};
use crate::emd::{emd_cost, EmdError};
use crate::grid::Grid;
use crate::imageio::RgbImage;
use crate::naming::{
    default_fallback_table, derive_prototypes, normalized_ground_distance, ColorDescriptor, ColorVocabulary, GroundDistanceMatrix,
    NamingError, NamingTable,
};

pub use resample::{cubic, output_dim};

pub const DEFAULT_SAMPLING_RATE: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_Z: f64 = 10.0;
pub const DEFAULT_DE_THRESHOLD: f64 = 7.0;

#[derive(Debug, thiserror::Error)]
pub enum PcdmError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Emd(#[from] EmdError),
}

/// Parameters of the metric.
#[derive(Clone, Debug)]
pub struct PcdmConfig {
    /// Downsampling factor in `(0, 1]`.
    pub sampling_rate: f64,
    /// Weight of the CIEDE2000 term, in `[0, 1]`.
    pub alpha: f64,
    /// Logistic steepness.
    pub z: f64,
    /// CIEDE2000 values are capped at this many Lab units, then divided by it.
    pub de_threshold: f64,
    pub de_params: De2000Params,
    pub table: Arc<NamingTable>,
    pub ground: Arc<GroundDistanceMatrix>,
}

fn default_naming() -> (Arc<NamingTable>, Arc<GroundDistanceMatrix>) {
    static NAMING: OnceLock<(Arc<NamingTable>, Arc<GroundDistanceMatrix>)> = OnceLock::new();
    NAMING
        .get_or_init(|| {
            let ground = normalized_ground_distance(&ColorVocabulary::basic()).expect("basic vocabulary is valid");
            (Arc::new(default_fallback_table()), Arc::new(ground))
        })
        .clone()
}

impl Default for PcdmConfig {
    /// Default parameters with the built-in fallback naming table.
    fn default() -> Self {
        let (table, ground) = default_naming();
        Self::with_naming(table, ground)
    }
}

impl PcdmConfig {
    pub fn with_naming(table: Arc<NamingTable>, ground: Arc<GroundDistanceMatrix>) -> Self {
        Self {
            sampling_rate: DEFAULT_SAMPLING_RATE,
            alpha: DEFAULT_ALPHA,
            z: DEFAULT_Z,
            de_threshold: DEFAULT_DE_THRESHOLD,
            de_params: De2000Params::default(),
            table,
            ground,
        }
    }

    /// Default parameters over a loaded naming table. Term prototypes are
    /// derived from the table and the ground distances normalized to `[0, 1]`.
    pub fn from_table(table: NamingTable) -> Result<Self, NamingError> {
        let vocab = derive_prototypes(&table)?;
        let ground = normalized_ground_distance(&vocab)?;
        Ok(Self::with_naming(Arc::new(table), Arc::new(ground)))
    }

    pub fn sampling_rate(mut self, rate: f64) -> Self {
        self.sampling_rate = rate;
        self
    }

    pub fn validate(&self) -> Result<(), PcdmError> {
        let bad = |msg: String| Err(PcdmError::InvalidConfig(msg));
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return bad(format!("sampling rate {} not in (0, 1]", self.sampling_rate));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} not in [0, 1]", self.alpha));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad(format!("z {} must be positive", self.z));
        }
        if !(self.de_threshold > 0.0 && self.de_threshold.is_finite()) {
            return bad(format!("threshold {} must be positive", self.de_threshold));
        }
        if self.table.term_count() != self.ground.size() {
            return bad(format!(
                "naming table has {} terms but ground distances are {}x{}",
                self.table.term_count(),
                self.ground.size(),
                self.ground.size()
            ));
        }
        Ok(())
    }
}

/// Per-pixel fused differences, each strictly inside `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionMap {
    values: Grid<f64>,
}

impl DistortionMap {
    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    /// `1 − v` per pixel, so that bright means similar.
    pub fn residual(&self) -> Grid<f64> {
        self.values.map(|v| 1.0 - v)
    }
}

/// Pooled score; `residual = 1 − score`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcdmScore {
    pub score: f64,
    pub residual: f64,
}

/// Anti-aliased bicubic downsampling; output dimensions are
/// `max(1, round(dim · rate))`.
pub fn downsample(img: &RgbImage, rate: f64) -> Result<RgbImage, PcdmError> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(PcdmError::InvalidConfig(format!("sampling rate {rate} not in (0, 1]")));
    }
    Ok(resample::resize(img, rate))
}

#[inline]
fn logistic(z: f64, d: f64) -> f64 {
    1.0 / (1.0 + (-z * (d - 0.5)).exp())
}

/// Fuses normalized CIEDE2000 and descriptor EMD for one pixel pair.
pub fn pixel_difference(
    s1: LabColor,
    s2: LabColor,
    p1: &ColorDescriptor,
    p2: &ColorDescriptor,
    cfg: &PcdmConfig,
) -> Result<f64, PcdmError> {
    let de = delta_e_2000(s1, s2, cfg.de_params);
    // Fixed argument order keeps the result bit-identical under swapping.
    let (a, b) = match compare_descriptors(p1, p2) {
        Ordering::Greater => (p2, p1),
        _ => (p1, p2),
    };
    let transport = emd_cost(a, b, &cfg.ground)?;
    Ok(fuse(de, transport, cfg))
}

#[inline]
fn fuse(de: f64, transport: f64, cfg: &PcdmConfig) -> f64 {
    let d = cfg.alpha * (de.min(cfg.de_threshold) / cfg.de_threshold) + (1.0 - cfg.alpha) * transport;
    logistic(cfg.z, d)
}

fn compare_descriptors(a: &ColorDescriptor, b: &ColorDescriptor) -> Ordering {
    a.probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), PcdmError> {
    if a.dimensions() != b.dimensions() {
        return Err(PcdmError::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

pub fn pcdm_map(reference: &RgbImage, distorted: &RgbImage, cfg: &PcdmConfig) -> Result<DistortionMap, PcdmError> {
    check_dims(reference, distorted)?;
    cfg.validate()?;
    let small_ref = downsample(reference, cfg.sampling_rate)?;
    let small_dist = downsample(distorted, cfg.sampling_rate)?;
    let (w, h) = small_ref.dimensions();
    let lab_ref = srgb_to_lab(&small_ref);
    let lab_dist = srgb_to_lab(&small_dist);

    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let p1 = cfg.table.describe_pixel(small_ref.pixel(x, y));
                    let p2 = cfg.table.describe_pixel(small_dist.pixel(x, y));
                    pixel_difference(*lab_ref.get(x, y), *lab_dist.get(x, y), p1, p2, cfg)
                })
                .collect::<Result<Vec<f64>, PcdmError>>()
        })
        .collect::<Result<_, _>>()?;
    let values = Grid::from_vec(w, h, rows.concat()).expect("one value per downsampled pixel");
    Ok(DistortionMap { values })
}

pub fn pcdm_score(reference: &RgbImage, distorted: &RgbImage, cfg: &PcdmConfig) -> Result<PcdmScore, PcdmError> {
    let score = pcdm_map(reference, distorted, cfg)?.mean();
    Ok(PcdmScore {
        score,
        residual: 1.0 - score,
    })
}

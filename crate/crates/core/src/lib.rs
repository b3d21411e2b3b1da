//! Full-reference image quality assessment built around a perceptual color
//! difference metric (PCDM): CIEDE2000 fused with an earth mover's distance
//! between color-naming descriptors.
//!
//! Modules, bottom up:
//!
//! - [`imageio`]: PNG/BMP/PPM loading and saving, grayscale map export
//! - [`colorspace`]: sRGB → Lab, BT.601 YCbCr, CIEDE2000
//! - [`naming`]: color-naming tables, prototypes and ground distances
//! - [`emd`]: exact transportation solver
//! - [`pcdm`]: the metric itself
//! - [`baselines`]: PSNR, SSIM, mean CIEDE2000
//! - [`eval`]: dataset manifests, regression to DMOS, correlation reports
//! - [`synth`]: deterministic test images and distortions

pub mod baselines;
pub mod colorspace;
pub mod emd;
pub mod eval;
pub mod grid;
pub mod imageio;
pub mod naming;
pub mod pcdm;
pub mod synth;

pub use imageio::RgbImage;

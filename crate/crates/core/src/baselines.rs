//! Reference metrics: PSNR and single-scale SSIM on BT.601 luma, and the
//! mean per-pixel CIEDE2000 difference.

use crate::colorspace::{delta_e_2000, luma_plane, srgb_to_lab_pixel, De2000Params};
use crate::grid::Grid;
use crate::imageio::RgbImage;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const PEAK: f64 = 255.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image is {0}x{1}; SSIM needs both dimensions >= {SSIM_WINDOW}")]
    TooSmall(usize, usize),
}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), BaselineError> {
    if a.dimensions() != b.dimensions() {
        return Err(BaselineError::DimensionMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// PSNR in dB on luma; identical images give `f64::INFINITY`.
pub fn psnr(reference: &RgbImage, distorted: &RgbImage) -> Result<f64, BaselineError> {
    check_dims(reference, distorted)?;
    let a = luma_plane(reference);
    let b = luma_plane(distorted);
    let sse: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let mse = sse / a.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

/// SSIM score and its local map.
#[derive(Clone, Debug, PartialEq)]
pub struct Ssim {
    pub score: f64,
    /// Valid-region map, `(w − 10) × (h − 10)`.
    pub map: Grid<f64>,
}

impl Ssim {
    /// The map clamped to `[0, 1]` for export; negative similarity becomes 0.
    pub fn export_map(&self) -> Grid<f64> {
        self.map.map(|v| v.clamp(0.0, 1.0))
    }
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as f64;
    let mut w: [f64; SSIM_WINDOW] =
        std::array::from_fn(|i| (-((i as f64 - r).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable valid-region filtering with the SSIM window.
fn filter_valid(plane: &[f64], w: usize, h: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = kernel.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * horiz[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Single-scale SSIM on luma with an 11×11 Gaussian window (σ = 1.5).
pub fn ssim(reference: &RgbImage, distorted: &RgbImage) -> Result<Ssim, BaselineError> {
    check_dims(reference, distorted)?;
    let (w, h) = reference.dimensions();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(BaselineError::TooSmall(w, h));
    }
    let x = luma_plane(reference).into_vec();
    let y = luma_plane(distorted).into_vec();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();

    let k = gaussian_window();
    let mu_x = filter_valid(&x, w, h, &k);
    let mu_y = filter_valid(&y, w, h, &k);
    let e_xx = filter_valid(&xx, w, h, &k);
    let e_yy = filter_valid(&yy, w, h, &k);
    let e_xy = filter_valid(&xy, w, h, &k);

    let c1 = (SSIM_K1 * PEAK).powi(2);
    let c2 = (SSIM_K2 * PEAK).powi(2);
    let values: Vec<f64> = (0..mu_x.len())
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let sxx = e_xx[i] - mx * mx;
            let syy = e_yy[i] - my * my;
            let sxy = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))
        })
        .collect();
    let map = Grid::from_vec(w - SSIM_WINDOW + 1, h - SSIM_WINDOW + 1, values).expect("valid-region size");
    Ok(Ssim { score: map.mean(), map })
}

/// Mean CIEDE2000 difference over all pixels at full resolution.
pub fn mean_de2000(reference: &RgbImage, distorted: &RgbImage) -> Result<f64, BaselineError> {
    check_dims(reference, distorted)?;
    let params = De2000Params::default();
    let total: f64 = reference
        .pixels()
        .zip(distorted.pixels())
        .map(|(a, b)| delta_e_2000(srgb_to_lab_pixel(a), srgb_to_lab_pixel(b), params))
        .sum();
    Ok(total / reference.pixel_count() as f64)
}

/// Per-pixel CIEDE2000 map at full resolution.
pub fn de2000_map(reference: &RgbImage, distorted: &RgbImage) -> Result<Grid<f64>, BaselineError> {
    check_dims(reference, distorted)?;
    let params = De2000Params::default();
    let values = reference
        .pixels()
        .zip(distorted.pixels())
        .map(|(a, b)| delta_e_2000(srgb_to_lab_pixel(a), srgb_to_lab_pixel(b), params))
        .collect();
    Ok(Grid::from_vec(reference.width(), reference.height(), values).expect("pixel count"))
}

use std::sync::OnceLock;

use crate::grid::Grid;
use crate::imageio::RgbImage;

/// D65 reference white in XYZ, normalized so that `Y = 1`.
pub const D65_WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// A CIELAB color. `l` is lightness in `[0, 100]` for in-gamut colors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }
}

pub type LabImage = Grid<LabColor>;

/// Inverse sRGB companding of a channel value on the 0..=255 scale.
#[inline]
pub fn linearize(v: f64) -> f64 {
    let c = v / 255.0;
    if c > 0.04045 {
        ((c + 0.055) / 1.055).powf(2.4)
    } else {
        c / 12.92
    }
}

fn linear_lut() -> &'static [f64; 256] {
    static LUT: OnceLock<[f64; 256]> = OnceLock::new();
    LUT.get_or_init(|| std::array::from_fn(|i| linearize(i as f64)))
}

#[inline]
fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn linear_to_lab(rgb: [f64; 3]) -> LabColor {
    let xyz: [f64; 3] = std::array::from_fn(|row| {
        SRGB_TO_XYZ[row]
            .iter()
            .zip(rgb)
            .map(|(m, c)| m * c)
            .sum::<f64>()
    });
    let fx = lab_f(xyz[0] / D65_WHITE[0]);
    let fy = lab_f(xyz[1] / D65_WHITE[1]);
    let fz = lab_f(xyz[2] / D65_WHITE[2]);
    LabColor {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// Converts one 8-bit sRGB pixel to CIELAB.
#[inline]
pub fn srgb_to_lab_pixel(rgb: [u8; 3]) -> LabColor {
    let lut = linear_lut();
    linear_to_lab(rgb.map(|v| lut[v as usize]))
}

/// Converts a (possibly fractional) sRGB triple on the 0..=255 scale to CIELAB.
pub fn srgb_f64_to_lab(rgb: [f64; 3]) -> LabColor {
    linear_to_lab(rgb.map(linearize))
}

pub fn srgb_to_lab(img: &RgbImage) -> LabImage {
    let data = img.pixels().map(srgb_to_lab_pixel).collect();
    Grid::from_vec(img.width(), img.height(), data).expect("pixel count matches dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_is_reference_white() {
        let w = srgb_to_lab_pixel([255, 255, 255]);
        assert!((w.l - 100.0).abs() < 1e-4, "{w:?}");
        assert!(w.a.abs() < 0.01 && w.b.abs() < 0.01, "{w:?}");
    }

    #[test]
    fn black_is_origin() {
        assert_eq!(srgb_to_lab_pixel([0, 0, 0]), LabColor::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn gray_lightness_is_monotone() {
        let ls: Vec<f64> = (0..=255u8).map(|v| srgb_to_lab_pixel([v; 3]).l).collect();
        assert!(ls.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fractional_path_agrees_with_lut() {
        for v in [0u8, 17, 128, 200, 255] {
            let a = srgb_to_lab_pixel([v, 255 - v, v / 2]);
            let b = srgb_f64_to_lab([v as f64, (255 - v) as f64, (v / 2) as f64]);
            assert!((a.l - b.l).abs() < 1e-12 && (a.a - b.a).abs() < 1e-12 && (a.b - b.b).abs() < 1e-12);
        }
    }

    #[test]
    fn image_conversion_keeps_dimensions() {
        let img = RgbImage::from_fn(3, 2, |x, y| [(x * 80) as u8, (y * 120) as u8, 9]);
        let lab = srgb_to_lab(&img);
        assert_eq!((lab.width(), lab.height()), (3, 2));
        assert_eq!(*lab.get(2, 1), srgb_to_lab_pixel(img.pixel(2, 1)));
    }
}

use crate::grid::Grid;
use crate::imageio::{round_to_u8, RgbImage};

/// 8-bit BT.601 full-range YCbCr planes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YCbCrPlanes {
    pub y: Grid<u8>,
    pub cb: Grid<u8>,
    pub cr: Grid<u8>,
}

impl YCbCrPlanes {
    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }
}

/// BT.601 luma of an 8-bit RGB triple, unquantized.
#[inline]
pub fn luma(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

/// Real-valued BT.601 luma plane.
pub fn luma_plane(img: &RgbImage) -> Grid<f64> {
    Grid::from_vec(img.width(), img.height(), img.pixels().map(luma).collect())
        .expect("pixel count matches dimensions")
}

#[inline]
fn forward(rgb: [u8; 3]) -> [u8; 3] {
    let [r, g, b] = rgb.map(f64::from);
    [
        round_to_u8(luma(rgb)),
        round_to_u8(128.0 - 0.168_736 * r - 0.331_264 * g + 0.5 * b),
        round_to_u8(128.0 + 0.5 * r - 0.418_688 * g - 0.081_312 * b),
    ]
}

#[inline]
fn inverse(ycc: [u8; 3]) -> [u8; 3] {
    let y = ycc[0] as f64;
    let cb = ycc[1] as f64 - 128.0;
    let cr = ycc[2] as f64 - 128.0;
    [
        round_to_u8(y + 1.402 * cr),
        round_to_u8(y - 0.344_136 * cb - 0.714_136 * cr),
        round_to_u8(y + 1.772 * cb),
    ]
}

pub fn rgb_to_ycbcr(img: &RgbImage) -> YCbCrPlanes {
    let (w, h) = img.dimensions();
    let n = w * h;
    let (mut y, mut cb, mut cr) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for p in img.pixels() {
        let [a, b, c] = forward(p);
        y.push(a);
        cb.push(b);
        cr.push(c);
    }
    YCbCrPlanes {
        y: Grid::from_vec(w, h, y).expect("plane size"),
        cb: Grid::from_vec(w, h, cb).expect("plane size"),
        cr: Grid::from_vec(w, h, cr).expect("plane size"),
    }
}

/// # Panics
/// If the three planes do not share dimensions.
pub fn ycbcr_to_rgb(planes: &YCbCrPlanes) -> RgbImage {
    let (w, h) = (planes.width(), planes.height());
    assert!(
        (planes.cb.width(), planes.cb.height()) == (w, h) && (planes.cr.width(), planes.cr.height()) == (w, h),
        "YCbCr planes must share dimensions"
    );
    let data = planes
        .y
        .as_slice()
        .iter()
        .zip(planes.cb.as_slice())
        .zip(planes.cr.as_slice())
        .flat_map(|((&y, &cb), &cr)| inverse([y, cb, cr]))
        .collect();
    RgbImage::new(w, h, data).expect("plane dimensions are positive")
}

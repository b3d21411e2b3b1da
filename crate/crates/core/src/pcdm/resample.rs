//! Bicubic downsampling with anti-aliasing.
//!
//! Separable resampling with the Keys cubic kernel (`a = -0.5`). When
//! shrinking by a factor `s < 1` the kernel is stretched by `1 / s` so that it
//! also acts as a low-pass filter. Out-of-range taps are mirrored
//! symmetrically at the image border, and each output's weights are
//! renormalized to sum to one.

use crate::imageio::{round_to_u8, RgbImage};

const CUBIC_A: f64 = -0.5;

/// Keys cubic convolution kernel.
#[inline]
pub fn cubic(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((CUBIC_A + 2.0) * x - (CUBIC_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((CUBIC_A * x - 5.0 * CUBIC_A) * x + 8.0 * CUBIC_A) * x - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// `max(1, round(dim * rate))`, rounding half up.
pub fn output_dim(dim: usize, rate: f64) -> usize {
    ((dim as f64 * rate + 0.5).floor() as usize).max(1)
}

#[inline]
fn mirror(k: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let k = k.rem_euclid(period);
    if k < len as isize {
        k as usize
    } else {
        (period - 1 - k) as usize
    }
}

/// Per-output tap lists `(source index, weight)` for one axis.
fn axis_weights(in_len: usize, out_len: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = out_len as f64 / in_len as f64;
    let stretch = if scale < 1.0 { scale } else { 1.0 };
    let radius = 2.0 / stretch;
    (0..out_len)
        .map(|x| {
            let center = (x as f64 + 0.5) / scale - 0.5;
            let first = (center - radius).floor() as isize;
            let last = (center + radius).ceil() as isize;
            let mut taps: Vec<(usize, f64)> = (first..=last)
                .filter_map(|k| {
                    let w = cubic(stretch * (center - k as f64));
                    (w != 0.0).then(|| (mirror(k, in_len), w))
                })
                .collect();
            let sum: f64 = taps.iter().map(|t| t.1).sum();
            for t in &mut taps {
                t.1 /= sum;
            }
            taps
        })
        .collect()
}

/// Resizes `img` by `rate` (already validated to lie in `(0, 1]`).
pub(crate) fn resize(img: &RgbImage, rate: f64) -> RgbImage {
    if rate == 1.0 {
        return img.clone();
    }
    let (w, h) = img.dimensions();
    let (ow, oh) = (output_dim(w, rate), output_dim(h, rate));
    if (ow, oh) == (w, h) {
        return img.clone();
    }
    let src = img.as_bytes();

    let xw = axis_weights(w, ow);
    let mut tmp = vec![0.0f64; ow * h * 3];
    for y in 0..h {
        let row = &src[y * w * 3..(y + 1) * w * 3];
        for (x, taps) in xw.iter().enumerate() {
            let mut acc = [0.0f64; 3];
            for &(k, wt) in taps {
                for c in 0..3 {
                    acc[c] += wt * row[k * 3 + c] as f64;
                }
            }
            tmp[(y * ow + x) * 3..(y * ow + x) * 3 + 3].copy_from_slice(&acc);
        }
    }

    let yw = axis_weights(h, oh);
    let mut out = Vec::with_capacity(ow * oh * 3);
    for taps in &yw {
        for x in 0..ow {
            let mut acc = [0.0f64; 3];
            for &(k, wt) in taps {
                for c in 0..3 {
                    acc[c] += wt * tmp[(k * ow + x) * 3 + c];
                }
            }
            out.extend(acc.iter().map(|&v| round_to_u8(v)));
        }
    }
    RgbImage::new(ow, oh, out).expect("output dimensions are positive")
}

//! Deterministic synthetic images and distortions.
//!
//! Used to build fixtures for tests, benchmarks and the synthetic evaluation
//! set: colorful textured scenes, additive Gaussian noise, Gaussian blur and
//! JPEG compression. Every generator is seeded, so the same arguments always
//! produce the same pixels.

use image::codecs::jpeg::JpegEncoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::imageio::{round_to_u8, ImageError, RgbImage};

/// A scene of overlapping colored ellipses and bars over a smooth
/// two-color gradient, with mild fine-grained texture.
pub fn textured_scene(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corner_a: [f64; 3] = std::array::from_fn(|_| rng.random_range(20.0..235.0));
    let corner_b: [f64; 3] = std::array::from_fn(|_| rng.random_range(20.0..235.0));

    struct Blob {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        color: [f64; 3],
    }
    let (wf, hf) = (width as f64, height as f64);
    let blobs: Vec<Blob> = (0..12)
        .map(|_| Blob {
            cx: rng.random_range(0.0..wf),
            cy: rng.random_range(0.0..hf),
            rx: rng.random_range(0.05..0.3) * wf,
            ry: rng.random_range(0.05..0.3) * hf,
            color: std::array::from_fn(|_| rng.random_range(0.0..255.0)),
        })
        .collect();
    let freq_x = rng.random_range(0.15..0.6);
    let freq_y = rng.random_range(0.15..0.6);
    let bar_period = rng.random_range(12.0..40.0);
    let bar_color: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));

    RgbImage::from_fn(width, height, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let t = (xf / wf + yf / hf) * 0.5;
        let mut px: [f64; 3] = std::array::from_fn(|c| corner_a[c] * (1.0 - t) + corner_b[c] * t);
        if (xf / bar_period).floor() as i64 % 4 == 0 && yf > hf * 0.6 {
            px = bar_color;
        }
        for b in &blobs {
            let d = ((xf - b.cx) / b.rx).powi(2) + ((yf - b.cy) / b.ry).powi(2);
            if d < 1.0 {
                let edge = (1.0 - d).min(0.2) / 0.2;
                for c in 0..3 {
                    px[c] = px[c] * (1.0 - edge) + b.color[c] * edge;
                }
            }
        }
        let texture = 14.0 * (freq_x * xf).sin() * (freq_y * yf).cos();
        px.map(|v| round_to_u8(v + texture))
    })
}

/// Adds i.i.d. `N(0, sigma²)` noise to every channel, rounding and clamping.
pub fn add_gaussian_noise(img: &RgbImage, sigma: f64, seed: u64) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("noise sigma must be finite and nonnegative");
    let data = img
        .as_bytes()
        .iter()
        .map(|&v| round_to_u8(v as f64 + normal.sample(&mut rng)))
        .collect();
    RgbImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Separable Gaussian blur with a `ceil(3σ)` radius and mirrored borders.
pub fn gaussian_blur(img: &RgbImage, sigma: f64) -> RgbImage {
    assert!(sigma > 0.0, "blur sigma must be positive");
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let (w, h) = img.dimensions();
    let reflect = |k: isize, len: usize| -> usize {
        let period = 2 * len as isize;
        let k = k.rem_euclid(period);
        if k < len as isize {
            k as usize
        } else {
            (period - 1 - k) as usize
        }
    };
    let src = img.as_bytes();
    let mut tmp = vec![0.0f64; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            for (t, &kw) in kernel.iter().enumerate() {
                let sx = reflect(x as isize + t as isize - radius, w);
                for c in 0..3 {
                    tmp[(y * w + x) * 3 + c] += kw * src[(y * w + sx) * 3 + c] as f64;
                }
            }
        }
    }
    let mut out = vec![0u8; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (t, &kw) in kernel.iter().enumerate() {
                let sy = reflect(y as isize + t as isize - radius, h);
                for c in 0..3 {
                    acc[c] += kw * tmp[(sy * w + x) * 3 + c];
                }
            }
            for c in 0..3 {
                out[(y * w + x) * 3 + c] = round_to_u8(acc[c]);
            }
        }
    }
    RgbImage::new(w, h, out).expect("same dimensions")
}

/// Encodes with baseline JPEG at `quality` (1–100) and decodes the result.
pub fn jpeg_compress(img: &RgbImage, quality: u8) -> Result<RgbImage, ImageError> {
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality.clamp(1, 100))
        .encode(
            img.as_bytes(),
            img.width() as u32,
            img.height() as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| ImageError::CorruptData(e.to_string()))?;
    let decoded = image::load_from_memory_with_format(&buf, image::ImageFormat::Jpeg)
        .map_err(|e| ImageError::CorruptData(e.to_string()))?
        .into_rgb8();
    RgbImage::new(img.width(), img.height(), decoded.into_raw())
}

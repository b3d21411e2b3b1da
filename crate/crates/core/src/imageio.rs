//! Raster image loading and saving.
//!
//! Inputs may be PNG (8 or 16 bit, RGB or gray), 24-bit BMP or binary PPM
//! (`P6`). Outputs are PNG, BMP or PPM chosen by file extension. Images with
//! an alpha channel are rejected rather than flattened.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};

use crate::grid::Grid;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("image has an alpha channel, which is not supported")]
    AlphaChannel,
    #[error("invalid image dimensions {width}x{height} for {len} bytes")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },
    #[error("map value {0} is outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An 8-bit-per-channel RGB image stored row-major as interleaved triples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3));
        if width == 0 || height == 0 || expected != Some(data.len()) {
            return Err(ImageError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Creates an image where every pixel has the same color.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self {
            width,
            height,
            data,
        }
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Pixels in row-major order.
    pub fn pixels(&self) -> impl ExactSizeIterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }
}

/// Quantizes a real value to 8 bits with round-half-up, clamping to `[0, 255]`.
#[inline]
pub fn round_to_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Rescales a 16-bit sample to 8 bits: `round(v * 255 / 65535)`, half up.
#[inline]
pub fn rescale_u16(v: u16) -> u8 {
    ((2 * v as u32 * 255 + 65535) / 131_070) as u8
}

pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => ImageError::FileNotFound(path.to_path_buf()),
        _ => ImageError::Io(e),
    })?;
    decode_image(&bytes)
}

/// Decodes an in-memory PNG, BMP or binary PPM.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let format = image::guess_format(bytes)
        .map_err(|_| ImageError::UnsupportedFormat("unrecognized file signature".into()))?;
    match format {
        ImageFormat::Png | ImageFormat::Bmp => {}
        ImageFormat::Pnm if bytes.starts_with(b"P6") => {}
        ImageFormat::Pnm => {
            return Err(ImageError::UnsupportedFormat(
                "only binary PPM (P6) is supported".into(),
            ))
        }
        other => return Err(ImageError::UnsupportedFormat(format!("{other:?}"))),
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| ImageError::CorruptData(e.to_string()))?;
    from_dynamic(decoded)
}

fn from_dynamic(img: DynamicImage) -> Result<RgbImage, ImageError> {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageRgb8(buf) => buf.into_raw(),
        DynamicImage::ImageRgb16(buf) => buf.into_raw().into_iter().map(rescale_u16).collect(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().flat_map(|v| [v; 3]).collect(),
        DynamicImage::ImageLuma16(buf) => buf
            .into_raw()
            .into_iter()
            .flat_map(|v| [rescale_u16(v); 3])
            .collect(),
        DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgba8(_)
        | DynamicImage::ImageRgba16(_)
        | DynamicImage::ImageRgba32F(_) => return Err(ImageError::AlphaChannel),
        other => {
            return Err(ImageError::UnsupportedFormat(format!(
                "pixel layout {:?}",
                other.color()
            )))
        }
    };
    RgbImage::new(width, height, data)
}

fn output_format(path: &Path) -> Result<ImageFormat, ImageError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("ppm") => Ok(ImageFormat::Pnm),
        Some("bmp") => Ok(ImageFormat::Bmp),
        Some(other) => Err(ImageError::UnsupportedFormat(format!(".{other}"))),
        None => Err(ImageError::UnsupportedFormat("missing file extension".into())),
    }
}

/// Writes `img` as PNG, BMP or binary PPM depending on the extension of `path`.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let format = output_format(path)?;
    if format == ImageFormat::Pnm {
        let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
        out.extend_from_slice(&img.data);
        fs::write(path, out)?;
        return Ok(());
    }
    image::save_buffer_with_format(
        path,
        &img.data,
        img.width as u32,
        img.height as u32,
        image::ExtendedColorType::Rgb8,
        format,
    )
    .map_err(encode_error)
}

/// Writes a map of unit-interval values as an 8-bit grayscale PNG with
/// `gray = round(v * 255)`.
pub fn save_grayscale_map(values: &Grid<f64>, path: impl AsRef<Path>) -> Result<(), ImageError> {
    if let Some(&bad) = values
        .as_slice()
        .iter()
        .find(|v| !(0.0..=1.0).contains(*v))
    {
        return Err(ImageError::ValueOutOfRange(bad));
    }
    let gray: Vec<u8> = values.as_slice().iter().map(|&v| round_to_u8(v * 255.0)).collect();
    image::save_buffer_with_format(
        path.as_ref(),
        &gray,
        values.width() as u32,
        values.height() as u32,
        image::ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(encode_error)
}

fn encode_error(e: image::ImageError) -> ImageError {
    match e {
        image::ImageError::IoError(io) => ImageError::Io(io),
        other => ImageError::CorruptData(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_hand_written_ppm() {
        let mut bytes = b"P6 2 1 255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 0, 255]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.dimensions(), (2, 1));
        assert_eq!(img.pixel(0, 0), [255, 0, 0]);
        assert_eq!(img.pixel(1, 0), [0, 0, 255]);
    }

    #[test]
    fn truncated_ppm_is_corrupt() {
        let mut bytes = b"P6 2 2 255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert!(matches!(decode_image(&bytes), Err(ImageError::CorruptData(_))));
    }

    #[test]
    fn ascii_ppm_is_rejected() {
        let bytes = b"P3 1 1 255\n0 0 0\n";
        assert!(matches!(
            decode_image(bytes),
            Err(ImageError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn white_png_decodes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.png");
        image::save_buffer(&path, &[255, 255, 255], 1, 1, image::ExtendedColorType::Rgb8).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img, RgbImage::filled(1, 1, [255, 255, 255]));
    }

    #[test]
    fn sixteen_bit_png_is_rescaled() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let samples: [u16; 6] = [0, 65535, 32767, 32896, 257, 128];
        let bytes: Vec<u8> = samples.iter().flat_map(|v| v.to_ne_bytes()).collect();
        image::save_buffer(&path, &bytes, 2, 1, image::ExtendedColorType::Rgb16).unwrap();
        let img = load_image(&path).unwrap();
        let expected: Vec<u8> = samples
            .iter()
            .map(|&v| (v as f64 * 255.0 / 65535.0 + 0.5).floor() as u8)
            .collect();
        assert_eq!(img.as_bytes(), &expected[..]);
    }

    #[test]
    fn alpha_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgba.png");
        image::save_buffer(&path, &[1, 2, 3, 4], 1, 1, image::ExtendedColorType::Rgba8).unwrap();
        assert!(matches!(load_image(&path), Err(ImageError::AlphaChannel)));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_image("/nonexistent/definitely/not/here.png"),
            Err(ImageError::FileNotFound(_))
        ));
    }

    #[test]
    fn unknown_extension_on_save() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::filled(1, 1, [0, 0, 0]);
        assert!(matches!(
            save_image(&img, dir.path().join("out.xyz")),
            Err(ImageError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn black_pixel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("black.png");
        save_image(&RgbImage::filled(1, 1, [0, 0, 0]), &path).unwrap();
        assert_eq!(load_image(&path).unwrap().pixel(0, 0), [0, 0, 0]);
    }

    fn gray_levels(map: &Grid<f64>) -> Vec<u8> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.png");
        save_grayscale_map(map, &path).unwrap();
        image::open(&path).unwrap().into_luma8().into_raw()
    }

    #[test]
    fn grayscale_map_quantization() {
        assert_eq!(gray_levels(&Grid::filled(3, 2, 0.0)), vec![0; 6]);
        assert_eq!(gray_levels(&Grid::filled(3, 2, 1.0)), vec![255; 6]);
        assert_eq!(gray_levels(&Grid::filled(1, 1, 0.5)), vec![128]);
    }

    #[test]
    fn grayscale_map_range_check() {
        let dir = tempfile::tempdir().unwrap();
        let map = Grid::from_vec(2, 1, vec![0.2, 1.5]).unwrap();
        assert!(matches!(
            save_grayscale_map(&map, dir.path().join("m.png")),
            Err(ImageError::ValueOutOfRange(v)) if v == 1.5
        ));
        let nan = Grid::filled(1, 1, f64::NAN);
        assert!(save_grayscale_map(&nan, dir.path().join("n.png")).is_err());
    }

    #[test]
    fn missing_parent_directory_is_io_error() {
        let img = RgbImage::filled(1, 1, [0, 0, 0]);
        assert!(matches!(
            save_image(&img, "/nonexistent-dir-xyz/out.png"),
            Err(ImageError::Io(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn save_load_round_trip(
            w in 1usize..9,
            h in 1usize..9,
            seed in any::<u64>(),
            ext in prop::sample::select(vec!["png", "ppm", "bmp"]),
        ) {
            let mut state = seed;
            let img = RgbImage::from_fn(w, h, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (state >> 33).to_le_bytes();
                [b[0], b[1], b[2]]
            });
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join(format!("img.{ext}"));
            save_image(&img, &path).unwrap();
            let first = load_image(&path).unwrap();
            let second = load_image(&path).unwrap();
            prop_assert_eq!(&first, &img);
            prop_assert_eq!(first, second);
        }
    }
}

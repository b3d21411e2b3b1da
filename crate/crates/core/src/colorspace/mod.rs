//! Color space conversions and the CIEDE2000 color difference.
//!
//! sRGB input is expanded with the IEC 61966-2-1 transfer curve, mapped to
//! XYZ with the sRGB/D65 primaries matrix and then to CIELAB relative to the
//! D65 white point. YCbCr uses the BT.601 full-range matrix with a chroma
//! offset of 128.

mod ciede2000;
mod lab;
mod ycbcr;

pub use ciede2000::{delta_e_2000, De2000Params, InvalidWeights};
pub use lab::{linearize, srgb_f64_to_lab, srgb_to_lab, srgb_to_lab_pixel, LabColor, LabImage, D65_WHITE};
pub use ycbcr::{luma, luma_plane, rgb_to_ycbcr, ycbcr_to_rgb, YCbCrPlanes};

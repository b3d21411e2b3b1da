use crate::colorspace::{rgb_to_ycbcr, ycbcr_to_rgb, YCbCrPlanes};
use crate::imageio::RgbImage;
use crate::pcdm::PcdmError;

/// Splits a distortion into its luma and chroma parts by swapping YCbCr
/// planes between the two images.
///
/// Returns `(intensity_only, chroma_only)`: the first keeps the distorted Y
/// with the reference Cb/Cr, the second keeps the reference Y with the
/// distorted Cb/Cr.
pub fn decompose_distortion(reference: &RgbImage, distorted: &RgbImage) -> Result<(RgbImage, RgbImage), PcdmError> {
    if reference.dimensions() != distorted.dimensions() {
        return Err(PcdmError::DimensionMismatch(
            reference.width(),
            reference.height(),
            distorted.width(),
            distorted.height(),
        ));
    }
    let r = rgb_to_ycbcr(reference);
    let d = rgb_to_ycbcr(distorted);
    let intensity = YCbCrPlanes { y: d.y.clone(), cb: r.cb.clone(), cr: r.cr.clone() };
    let chroma = YCbCrPlanes { y: r.y, cb: d.cb, cr: d.cr };
    Ok((ycbcr_to_rgb(&intensity), ycbcr_to_rgb(&chroma)))
}

use crate::error::Result;
use crate::imgcore::{check_same_dims, luma, BinaryMask, RasterImage};

/// Keeps the foreground in color and turns the background into its luma
/// gray. With `feather > 0` the mask is box-blurred with that radius and
/// each pixel blends color and gray by the blurred weight.
pub fn desaturate_background(
    img: &RasterImage,
    mask: &BinaryMask,
    feather: usize,
) -> Result<RasterImage> {
    check_same_dims(img.dims(), mask.dims())?;
    let (w, h) = img.dims();
    if feather == 0 {
        let pixels = img
            .pixels()
            .iter()
            .zip(mask.bits())
            .map(|(&p, &fg)| if fg { p } else { [luma(p); 3] })
            .collect();
        return RasterImage::new(w, h, pixels);
    }

    // Integral image of foreground counts; the window is clipped to the
    // image, so weights near the border average fewer pixels.
    let mut integral = vec![0u64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += u64::from(mask.get(x, y));
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row;
        }
    }
    RasterImage::from_fn(w, h, |x, y| {
        let (x0, x1) = (x.saturating_sub(feather), (x + feather + 1).min(w));
        let (y0, y1) = (y.saturating_sub(feather), (y + feather + 1).min(h));
        let fg = integral[y1 * (w + 1) + x1] + integral[y0 * (w + 1) + x0]
            - integral[y0 * (w + 1) + x1]
            - integral[y1 * (w + 1) + x0];
        let area = ((x1 - x0) * (y1 - y0)) as u64;
        let p = img.pixel(x, y);
        let gray = u64::from(luma(p));
        // Rounded (fg * c + (area - fg) * gray) / area in exact integers.
        p.map(|c| ((fg * u64::from(c) + (area - fg) * gray) * 2 + area) / (2 * area))
            .map(|v| v as u8)
    })
}

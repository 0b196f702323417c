use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{normalize_unit, resize_bilinear, to_luminance, ProbabilityMap, RasterImage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastParams {
    /// Pyramid depth. Level 1 is the input resolution.
    pub levels: usize,
}

impl Default for ContrastParams {
    fn default() -> Self {
        Self { levels: 6 }
    }
}

/// Dimensions of every pyramid level actually visited. Each level halves
/// the previous one (floor) and the pyramid stops before a side drops
/// below 3.
pub fn pyramid_dims(width: usize, height: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut dims = Vec::with_capacity(levels);
    let (mut w, mut h) = (width, height);
    for _ in 0..levels {
        if w < 3 || h < 3 {
            break;
        }
        dims.push((w, h));
        w /= 2;
        h /= 2;
    }
    dims
}

/// Sum of squared differences between each interior pixel and its 3x3
/// neighborhood. Border pixels stay 0.
pub(crate) fn local_contrast(gray: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    for y in 1..height.saturating_sub(1) {
        for x in 1..width - 1 {
            let c = gray[y * width + x];
            let mut sum = 0.0;
            for ny in y - 1..=y + 1 {
                for nx in x - 1..=x + 1 {
                    let d = c - gray[ny * width + nx];
                    sum += d * d;
                }
            }
            out[y * width + x] = sum;
        }
    }
    out
}

/// Unnormalized accumulation of per-level contrast at input resolution.
pub fn multiscale_contrast_raw(img: &RasterImage, params: &ContrastParams) -> Result<Vec<f64>> {
    let (width, height) = img.dims();
    if width < 3 || height < 3 {
        return Err(Error::ImageTooSmall(format!(
            "multi-scale contrast needs at least 3x3, got {width}x{height}"
        )));
    }
    if params.levels == 0 {
        return Err(Error::Config(
            "contrast pyramid needs at least one level".into(),
        ));
    }

    let mut level: Vec<f64> = to_luminance(img)
        .values()
        .iter()
        .map(|&v| v as f64)
        .collect();
    let (mut w, mut h) = (width, height);
    let mut acc = vec![0.0; width * height];
    let dims = pyramid_dims(width, height, params.levels);
    for (i, &(lw, lh)) in dims.iter().enumerate() {
        if i > 0 {
            level = resize_bilinear(&level, w, h, 1, lw, lh)?;
            (w, h) = (lw, lh);
        }
        let contrast = local_contrast(&level, w, h);
        let up = resize_bilinear(&contrast, w, h, 1, width, height)?;
        for (a, u) in acc.iter_mut().zip(up) {
            *a += u;
        }
    }
    Ok(acc)
}

pub fn multiscale_contrast(img: &RasterImage, params: &ContrastParams) -> Result<ProbabilityMap> {
    let raw = multiscale_contrast_raw(img, params)?;
    normalize_unit(img.width(), img.height(), raw)
}

//! Pixel-buffer primitives shared by the saliency, segmentation and
//! manipulation stages.

mod histogram;
pub mod io;
mod regions;
mod resize;
mod types;

pub use histogram::{quantize_colors, IntegralHistogram};
pub use regions::{connected_components, fill_enclosed, Component, Components, Connectivity};
pub use resize::resize_bilinear;
pub(crate) use types::{check_dims, check_same_dims};
pub use types::{BinaryMask, BoundingBox, LuminanceImage, ProbabilityMap, RasterImage, MAX_SIDE};

use crate::error::{Error, Result};

/// Rec. 601 luma of one RGB triple, rounded.
pub fn luma(rgb: [u8; 3]) -> u8 {
    let y = 0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64;
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_luminance(img: &RasterImage) -> LuminanceImage {
    let values = img.pixels().iter().map(|&p| luma(p)).collect();
    LuminanceImage::new(img.width(), img.height(), values).expect("dimensions unchanged")
}

/// Global Otsu threshold over 256 levels. Foreground is `level > t`.
///
/// Ties resolve to the smallest threshold. A single-valued input returns
/// that value, so the foreground is empty.
pub fn otsu_threshold(levels: &[u8]) -> u8 {
    let mut hist = [0u64; 256];
    for &v in levels {
        hist[v as usize] += 1;
    }
    let occupied: Vec<usize> = (0..256).filter(|&i| hist[i] > 0).collect();
    match occupied.as_slice() {
        [] => return 0,
        [only] => return *only as u8,
        _ => {}
    }

    let total = levels.len() as f64;
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();
    let (mut n0, mut sum0) = (0.0, 0.0);
    let (mut best_t, mut best) = (0u8, f64::NEG_INFINITY);
    for (t, &count) in hist.iter().enumerate() {
        n0 += count as f64;
        sum0 += t as f64 * count as f64;
        let n1 = total - n0;
        let between = if n0 == 0.0 || n1 == 0.0 {
            0.0
        } else {
            let mu0 = sum0 / n0;
            let mu1 = (sum_all - sum0) / n1;
            (n0 / total) * (n1 / total) * (mu0 - mu1) * (mu0 - mu1)
        };
        if between > best {
            best = between;
            best_t = t as u8;
        }
    }
    best_t
}

/// Binarizes with the strict `level > t` rule.
pub fn threshold_mask(levels: &[u8], width: usize, height: usize, t: u8) -> Result<BinaryMask> {
    BinaryMask::new(width, height, levels.iter().map(|&v| v > t).collect())
}

/// Min-max rescale into `[0, 1]`. A constant input maps to all zeros.
pub fn normalize_unit(width: usize, height: usize, values: Vec<f64>) -> Result<ProbabilityMap> {
    check_dims(width, height)?;
    if values.len() != width * height {
        return Err(Error::InvalidDimension(format!(
            "{} values for a {width}x{height} map",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!("non-finite map value {v}")));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi <= lo {
        return ProbabilityMap::zeros(width, height);
    }
    let range = hi - lo;
    let scaled = values.into_iter().map(|v| (v - lo) / range).collect();
    Ok(ProbabilityMap::from_clamped(width, height, scaled))
}

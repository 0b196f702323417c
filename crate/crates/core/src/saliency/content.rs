//! Single-scale patch-distinctness saliency: a pixel is salient when its
//! patch differs from the patches most similar to it, with nearby patches
//! weighted as more similar.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{normalize_unit, resize_bilinear, ProbabilityMap, RasterImage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentParams {
    /// Odd patch side, at least 3.
    pub patch_size: usize,
    pub k_nearest: usize,
    /// Weight of normalized spatial distance in the dissimilarity divisor.
    pub position_weight: f64,
    /// Longest side of the internal working image.
    pub work_size: usize,
}

impl Default for ContentParams {
    fn default() -> Self {
        Self {
            patch_size: 7,
            k_nearest: 64,
            position_weight: 3.0,
            work_size: 64,
        }
    }
}

impl ContentParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.patch_size < 3 || self.patch_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "patch size must be odd and at least 3, got {}",
                self.patch_size
            )));
        }
        if self.k_nearest == 0 {
            return Err(Error::Config("k_nearest must be at least 1".into()));
        }
        if self.work_size == 0 {
            return Err(Error::Config("work_size must be at least 1".into()));
        }
        if self.position_weight.is_nan() || self.position_weight < 0.0 {
            return Err(Error::Config("position_weight must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dimensions of the working image: the input scaled so its longer side is
/// at most `work_size`.
pub fn working_dims(width: usize, height: usize, work_size: usize) -> (usize, usize) {
    let longest = width.max(height);
    if longest <= work_size {
        return (width, height);
    }
    let s = work_size as f64 / longest as f64;
    (
        ((width as f64 * s).round() as usize).max(1),
        ((height as f64 * s).round() as usize).max(1),
    )
}

/// Flattened patch around every pixel, with edge replication.
fn extract_patches(img: &RasterImage, patch: usize) -> Vec<u8> {
    let (w, h) = img.dims();
    let r = (patch / 2) as isize;
    let mut out = Vec::with_capacity(w * h * patch * patch * 3);
    for y in 0..h as isize {
        for x in 0..w as isize {
            for dy in -r..=r {
                let sy = (y + dy).clamp(0, h as isize - 1) as usize;
                for dx in -r..=r {
                    let sx = (x + dx).clamp(0, w as isize - 1) as usize;
                    out.extend_from_slice(&img.pixel(sx, sy));
                }
            }
        }
    }
    out
}

/// Sum of absolute differences. Patches are at most a few thousand bytes,
/// so the wrapping adds never wrap; they keep the loop vectorizable in
/// builds with overflow checks.
fn abs_diff_sum(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .fold(0u32, |s, (&p, &q)| s.wrapping_add(p.abs_diff(q) as u32))
}

/// Raw per-pixel saliency `1 - exp(-mean of k smallest dissimilarities)`
/// on the given image, without resampling.
pub fn patch_distinctness(img: &RasterImage, params: &ContentParams) -> Result<Vec<f64>> {
    params.validate()?;
    let (w, h) = img.dims();
    let n = w * h;
    let len = params.patch_size * params.patch_size * 3;
    let patches = extract_patches(img, params.patch_size);
    let diag = ((w * w + h * h) as f64).sqrt();
    let color_scale = 1.0 / (len as f64 * 255.0);
    let c = params.position_weight;

    // Spatial divisor depends only on the offset between two pixels.
    let inv_divisor: Vec<f64> = (0..n)
        .map(|o| {
            let (dx, dy) = ((o % w) as f64, (o / w) as f64);
            1.0 / (1.0 + c * (dx * dx + dy * dy).sqrt() / diag)
        })
        .collect();

    let out = (0..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |dissim: &mut Vec<f64>, i| {
                dissim.clear();
                let pi = &patches[i * len..(i + 1) * len];
                let (xi, yi) = (i % w, i / w);
                for yj in 0..h {
                    let row = &inv_divisor[yi.abs_diff(yj) * w..];
                    for xj in 0..w {
                        let j = yj * w + xj;
                        if j == i {
                            continue;
                        }
                        let sad = abs_diff_sum(pi, &patches[j * len..(j + 1) * len]);
                        dissim.push(sad as f64 * color_scale * row[xi.abs_diff(xj)]);
                    }
                }
                let k = params.k_nearest.min(dissim.len());
                if k == 0 {
                    return 0.0;
                }
                if k < dissim.len() {
                    dissim.select_nth_unstable_by(k - 1, f64::total_cmp);
                }
                let head = &mut dissim[..k];
                head.sort_unstable_by(f64::total_cmp);
                let mean = head.iter().sum::<f64>() / k as f64;
                1.0 - (-mean).exp()
            },
        )
        .collect();
    Ok(out)
}

pub fn content_saliency(img: &RasterImage, params: &ContentParams) -> Result<ProbabilityMap> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < params.patch_size || h < params.patch_size {
        return Err(Error::ImageTooSmall(format!(
            "content saliency needs at least {0}x{0}, got {w}x{h}",
            params.patch_size
        )));
    }
    let (ww, wh) = working_dims(w, h, params.work_size);
    let work = img.resized(ww, wh)?;
    let raw = patch_distinctness(&work, params)?;
    let up = resize_bilinear(&raw, ww, wh, 1, w, h)?;
    normalize_unit(w, h, up)
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    normalize_unit, quantize_colors, BoundingBox, IntegralHistogram, ProbabilityMap, RasterImage,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSurroundParams {
    /// Center rectangle sizes as fractions of the shorter working side.
    pub rect_fractions: Vec<f64>,
    /// Width/height ratios; each rectangle keeps the area of its square.
    pub aspect_ratios: Vec<f64>,
    pub downsample: usize,
    pub bins_per_channel: usize,
}

impl Default for CenterSurroundParams {
    fn default() -> Self {
        Self {
            rect_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            aspect_ratios: vec![0.5, 0.75, 1.0, 1.5, 2.0],
            downsample: 2,
            bins_per_channel: 4,
        }
    }
}

impl CenterSurroundParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.rect_fractions.is_empty() || self.aspect_ratios.is_empty() {
            return Err(Error::Config(
                "center-surround needs at least one rectangle shape".into(),
            ));
        }
        if let Some(f) = self
            .rect_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f < 1.0))
        {
            return Err(Error::Config(format!(
                "rectangle fraction {f} outside (0, 1)"
            )));
        }
        if let Some(a) = self
            .aspect_ratios
            .iter()
            .find(|a| !(**a > 0.0 && a.is_finite()))
        {
            return Err(Error::Config(format!("aspect ratio {a} must be positive")));
        }
        if self.downsample == 0 {
            return Err(Error::Config("downsample factor must be at least 1".into()));
        }
        if !(1..=16).contains(&self.bins_per_channel) {
            return Err(Error::Config(format!(
                "bins_per_channel {} outside 1..=16",
                self.bins_per_channel
            )));
        }
        Ok(())
    }

    /// Center rectangle sides `(width, height)` for a working image.
    pub fn rect_shapes(&self, width: usize, height: usize) -> Vec<(usize, usize)> {
        let short = width.min(height) as f64;
        let mut shapes = Vec::new();
        for &f in &self.rect_fractions {
            let side = f * short;
            for &a in &self.aspect_ratios {
                let rw = ((side * a.sqrt()).round() as usize).clamp(1, width);
                let rh = ((side / a.sqrt()).round() as usize).clamp(1, height);
                shapes.push((rw, rh));
            }
        }
        shapes
    }
}

/// Chi-squared distance between two count histograms after normalizing
/// each to unit mass. Empty histograms give 0.
pub fn chi_squared(a: &[u32], b: &[u32]) -> f64 {
    let na: u64 = a.iter().map(|&v| v as u64).sum();
    let nb: u64 = b.iter().map(|&v| v as u64).sum();
    if na == 0 || nb == 0 {
        return 0.0;
    }
    // (ca/na - cb/nb)^2 / (ca/na + cb/nb) with an exact integer numerator,
    // so proportional histograms give exactly 0.
    let mut d = 0.0;
    for (&ca, &cb) in a.iter().zip(b) {
        if ca == 0 && cb == 0 {
            continue;
        }
        let (ca, cb) = (ca as i128, cb as i128);
        let diff = (ca * nb as i128 - cb * na as i128) as f64;
        let sum = (ca * nb as i128 + cb * na as i128) as f64;
        d += diff * diff / (sum * na as f64 * nb as f64);
    }
    0.5 * d
}

/// Rectangle of `len` pixels along one axis around `c`, before clipping:
/// starts `len / 2` before the center.
fn span(c: usize, len: usize, limit: usize) -> (usize, usize) {
    let lo = c as isize - (len / 2) as isize;
    let hi = lo + len as isize - 1;
    (lo.max(0) as usize, (hi.min(limit as isize - 1)) as usize)
}

/// Center rectangle and its concentric double-size surround, clipped.
pub fn center_and_surround(
    x: usize,
    y: usize,
    rw: usize,
    rh: usize,
    width: usize,
    height: usize,
) -> (BoundingBox, BoundingBox) {
    let (cx0, cx1) = span(x, rw, width);
    let (cy0, cy1) = span(y, rh, height);
    let (sx0, sx1) = span(x, 2 * rw, width);
    let (sy0, sy1) = span(y, 2 * rh, height);
    (
        BoundingBox {
            x_min: cx0,
            y_min: cy0,
            x_max: cx1,
            y_max: cy1,
        },
        BoundingBox {
            x_min: sx0,
            y_min: sy0,
            x_max: sx1,
            y_max: sy1,
        },
    )
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Per-pixel best rectangle on the working image.
#[derive(Clone, Debug)]
pub struct CenterSurroundField {
    pub width: usize,
    pub height: usize,
    /// Maximum chi-squared distance per pixel.
    pub distance: Vec<f64>,
    /// Center rectangle attaining it.
    pub best_rect: Vec<BoundingBox>,
}

pub fn best_rectangles(
    img: &RasterImage,
    params: &CenterSurroundParams,
) -> Result<CenterSurroundField> {
    params.validate()?;
    let (w, h) = img.dims();
    let bins = params.bins_per_channel.pow(3);
    let ih = IntegralHistogram::new(&quantize_colors(img, params.bins_per_channel), w, h, bins)?;
    let shapes = params.rect_shapes(w, h);

    let best: Vec<(f64, BoundingBox)> = (0..w * h)
        .into_par_iter()
        .map_init(
            || (vec![0u32; bins], vec![0u32; bins]),
            |(center, outer), i| {
                let (x, y) = (i % w, i / w);
                let mut best: Option<(f64, BoundingBox)> = None;
                for &(rw, rh) in &shapes {
                    let (c, s) = center_and_surround(x, y, rw, rh, w, h);
                    ih.region_counts_into(&c, center);
                    ih.region_counts_into(&s, outer);
                    for (o, c) in outer.iter_mut().zip(center.iter()) {
                        *o -= *c;
                    }
                    let d = chi_squared(center, outer);
                    // Summation order makes equal distances differ in the
                    // last bits; only a clear improvement replaces the
                    // earlier shape.
                    if best.is_none_or(|(bd, _)| d > bd + TIE_TOLERANCE) {
                        best = Some((d, c));
                    }
                }
                best.expect("at least one shape")
            },
        )
        .collect();

    let (distance, best_rect) = best.into_iter().unzip();
    Ok(CenterSurroundField {
        width: w,
        height: h,
        distance,
        best_rect,
    })
}

/// Gaussian-weighted gather: each pixel sums the distances of every pixel
/// whose best rectangle covers it, weighted by spatial proximity with
/// sigma one third of that rectangle's shorter side.
pub fn aggregate_field(field: &CenterSurroundField) -> Vec<f64> {
    let (w, h) = (field.width, field.height);
    // Sources whose rectangle spans each row, in source order, so every
    // row sums its contributions in a fixed order.
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); h];
    for (j, r) in field.best_rect.iter().enumerate() {
        if field.distance[j] == 0.0 {
            continue;
        }
        for row in &mut by_row[r.y_min..=r.y_max] {
            row.push(j);
        }
    }

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for &j in &by_row[y] {
            let r = &field.best_rect[j];
            let (sx, sy) = ((j % w) as f64, (j / w) as f64);
            let sigma = r.width().min(r.height()) as f64 / 3.0;
            let inv = 1.0 / (2.0 * sigma * sigma);
            let dy = y as f64 - sy;
            let d = field.distance[j];
            for (x, v) in row.iter_mut().enumerate().take(r.x_max + 1).skip(r.x_min) {
                let dx = x as f64 - sx;
                *v += (-(dx * dx + dy * dy) * inv).exp() * d;
            }
        }
    });
    out
}

pub fn working_dims(width: usize, height: usize, downsample: usize) -> (usize, usize) {
    (width.div_ceil(downsample), height.div_ceil(downsample))
}

pub fn center_surround_map(
    img: &RasterImage,
    params: &CenterSurroundParams,
) -> Result<ProbabilityMap> {
    params.validate()?;
    let (w, h) = img.dims();
    if w < 8 || h < 8 {
        return Err(Error::ImageTooSmall(format!(
            "center-surround needs at least 8x8, got {w}x{h}"
        )));
    }
    let (dw, dh) = working_dims(w, h, params.downsample);
    let work = img.resized(dw, dh)?;
    let field = best_rectangles(&work, params)?;
    let map = normalize_unit(dw, dh, aggregate_field(&field))?;
    map.resized(w, h)
}

//! Region-level rewrites of a base map: edge-closure filling for the
//! contrast and content maps, single-blob selection for the color
//! distribution map.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imgcore::{
    check_same_dims, connected_components, fill_enclosed, otsu_threshold, threshold_mask,
    BinaryMask, Connectivity, ProbabilityMap, RasterImage,
};

use super::hull::hull_volume;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRefineParams {
    /// Added to the local mean before comparing.
    pub offset: f64,
    /// Window side as a fraction of the shorter image side (minimum 3 px).
    pub window_fraction: f64,
}

impl Default for EdgeRefineParams {
    fn default() -> Self {
        Self {
            offset: 0.05,
            window_fraction: 1.0 / 8.0,
        }
    }
}

impl EdgeRefineParams {
    pub fn window_side(&self, width: usize, height: usize) -> usize {
        ((width.min(height) as f64 * self.window_fraction).round() as usize).max(3)
    }
}

/// Local adaptive threshold: a pixel is an edge when it exceeds the mean of
/// its `side x side` neighborhood (clipped to the image) by more than
/// `offset`.
pub fn adaptive_edges(map: &ProbabilityMap, side: usize, offset: f64) -> BinaryMask {
    let (w, h) = map.dims();
    let v = map.values();
    let mut integral = vec![0.0f64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += v[y * w + x];
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row;
        }
    }
    let half = side / 2;
    let bits = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let x0 = x.saturating_sub(half);
            let y0 = y.saturating_sub(half);
            let x1 = (x0 + side).min(w);
            let y1 = (y0 + side).min(h);
            let sum = integral[y1 * (w + 1) + x1]
                - integral[y0 * (w + 1) + x1]
                - integral[y1 * (w + 1) + x0]
                + integral[y0 * (w + 1) + x0];
            let mean = sum / ((x1 - x0) * (y1 - y0)) as f64;
            v[i] > mean + offset
        })
        .collect();
    BinaryMask::new(w, h, bits).expect("dimensions unchanged")
}

/// Edge closure: threshold, fill enclosed background, then give every
/// 8-connected region of the filled mask the maximum of `base` over it.
pub fn refine_by_edges(
    base: &ProbabilityMap,
    img: &RasterImage,
    params: &EdgeRefineParams,
) -> Result<ProbabilityMap> {
    check_same_dims(img.dims(), base.dims())?;
    let (w, h) = base.dims();
    let edges = adaptive_edges(base, params.window_side(w, h), params.offset);
    let filled = fill_enclosed(&edges);
    let cc = connected_components(&filled, Connectivity::Eight);

    let values = base.values();
    let mut out = vec![0.0; w * h];
    for comp in &cc.components {
        let peak = comp
            .pixels
            .iter()
            .map(|&p| values[p])
            .fold(0.0f64, f64::max);
        for &p in &comp.pixels {
            out[p] = peak;
        }
    }
    ProbabilityMap::new(w, h, out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobSelectParams {
    /// Colors per component fed to the hull, after deduplication.
    pub max_hull_points: usize,
    /// Volume assigned to flat or empty color hulls.
    pub min_volume: f64,
}

impl Default for BlobSelectParams {
    fn default() -> Self {
        Self {
            max_hull_points: 1024,
            min_volume: 1.0,
        }
    }
}

/// Distinct colors of a region, stride-subsampled to at most `limit`.
fn region_colors(img: &RasterImage, pixels: &[usize], limit: usize) -> Vec<[u8; 3]> {
    let mut colors: Vec<[u8; 3]> = pixels.iter().map(|&p| img.pixels()[p]).collect();
    colors.sort_unstable();
    colors.dedup();
    if colors.len() <= limit || limit == 0 {
        return colors;
    }
    let n = colors.len();
    (0..limit).map(|i| colors[i * n / limit]).collect()
}

pub fn color_volume(img: &RasterImage, pixels: &[usize], params: &BlobSelectParams) -> f64 {
    let colors = region_colors(img, pixels, params.max_hull_points);
    hull_volume(&colors).unwrap_or(0.0).max(params.min_volume)
}

/// Keeps the single connected part of the Otsu-thresholded map with the
/// largest `area * color hull volume` and paints it with the mean of
/// `base` over that part.
pub fn refine_spatial_distribution(
    base: &ProbabilityMap,
    img: &RasterImage,
    params: &BlobSelectParams,
) -> Result<ProbabilityMap> {
    check_same_dims(img.dims(), base.dims())?;
    let (w, h) = base.dims();
    let levels = base.to_levels();
    let t = otsu_threshold(&levels);
    let fg = fill_enclosed(&threshold_mask(&levels, w, h, t)?);
    let cc = connected_components(&fg, Connectivity::Eight);

    // (score, area, id): higher score, then larger area, then smaller id.
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, comp) in cc.components.iter().enumerate() {
        let score = comp.area as f64 * color_volume(img, &comp.pixels, params);
        let better = match best {
            None => true,
            Some((s, a, _)) => score > s || (score == s && comp.area > a),
        };
        if better {
            best = Some((score, comp.area, i));
        }
    }

    let mut out = vec![0.0; w * h];
    if let Some((_, _, i)) = best {
        let comp = &cc.components[i];
        let mean = comp.pixels.iter().map(|&p| base.values()[p]).sum::<f64>() / comp.area as f64;
        for &p in &comp.pixels {
            out[p] = mean;
        }
    }
    Ok(ProbabilityMap::from_clamped(w, h, out))
}

use crate::error::{Error, Result};

use super::types::{check_dims, BoundingBox, RasterImage};

/// Cumulative per-bin counts: entry `(x, y, b)` holds the number of pixels
/// of bin `b` inside `[0, x) x [0, y)`.
#[derive(Clone, Debug)]
pub struct IntegralHistogram {
    width: usize,
    height: usize,
    bins: usize,
    table: Vec<u32>,
}

impl IntegralHistogram {
    pub fn new(bin_of_pixel: &[u16], width: usize, height: usize, bins: usize) -> Result<Self> {
        check_dims(width, height)?;
        if bin_of_pixel.len() != width * height {
            return Err(Error::InvalidDimension(format!(
                "{} bin indices for a {width}x{height} image",
                bin_of_pixel.len()
            )));
        }
        if bins == 0 {
            return Err(Error::InvalidValue(
                "histogram needs at least one bin".into(),
            ));
        }
        if let Some(b) = bin_of_pixel.iter().find(|&&b| b as usize >= bins) {
            return Err(Error::InvalidValue(format!(
                "bin {b} out of range 0..{bins}"
            )));
        }

        let stride = (width + 1) * bins;
        let mut table = vec![0u32; (height + 1) * stride];
        let mut row_counts = vec![0u32; bins];
        for y in 0..height {
            row_counts.iter_mut().for_each(|c| *c = 0);
            let (above, current) = table.split_at_mut((y + 1) * stride);
            let above = &above[y * stride..];
            let current = &mut current[..stride];
            for x in 0..width {
                row_counts[bin_of_pixel[y * width + x] as usize] += 1;
                let at = (x + 1) * bins;
                for b in 0..bins {
                    current[at + b] = above[at + b] + row_counts[b];
                }
            }
        }
        Ok(Self {
            width,
            height,
            bins,
            table,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Cumulative count for bin `b` over `[0, x) x [0, y)`.
    pub fn cumulative(&self, x: usize, y: usize, b: usize) -> u32 {
        self.table[(y * (self.width + 1) + x) * self.bins + b]
    }

    /// Writes per-bin counts of `region` into `out` without validation.
    pub(crate) fn region_counts_into(&self, region: &BoundingBox, out: &mut [u32]) {
        let stride = (self.width + 1) * self.bins;
        let (x0, x1) = (region.x_min * self.bins, (region.x_max + 1) * self.bins);
        let (r0, r1) = (region.y_min * stride, (region.y_max + 1) * stride);
        let t = &self.table;
        for (b, slot) in out.iter_mut().enumerate().take(self.bins) {
            *slot = (t[r1 + x1 + b] + t[r0 + x0 + b]) - (t[r1 + x0 + b] + t[r0 + x1 + b]);
        }
    }

    pub fn region_histogram(&self, region: &BoundingBox) -> Result<Vec<u32>> {
        if !region.fits_within(self.width, self.height) {
            return Err(Error::InvalidRegion(format!(
                "{region} in a {}x{} image",
                self.width, self.height
            )));
        }
        let mut out = vec![0; self.bins];
        self.region_counts_into(region, &mut out);
        Ok(out)
    }
}

/// Uniform color quantization into `bins_per_channel^3` bins.
pub fn quantize_colors(img: &RasterImage, bins_per_channel: usize) -> Vec<u16> {
    let q = bins_per_channel;
    img.pixels()
        .iter()
        .map(|p| {
            let level = |v: u8| v as usize * q / 256;
            (level(p[0]) * q * q + level(p[1]) * q + level(p[2])) as u16
        })
        .collect()
}

use crate::error::{Error, Result};

use super::types::{LuminanceImage, ProbabilityMap, RasterImage};

struct Taps {
    lo: usize,
    hi: usize,
    frac: f64,
}

fn taps(src_len: usize, dst_len: usize) -> Vec<Taps> {
    let scale = src_len as f64 / dst_len as f64;
    let last = (src_len - 1) as f64;
    (0..dst_len)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, last);
            let lo = s.floor() as usize;
            Taps {
                lo,
                hi: (lo + 1).min(src_len - 1),
                frac: s - lo as f64,
            }
        })
        .collect()
}

/// Bilinear resampling of an interleaved buffer with `channels` values per
/// pixel. Pixel centers sit at half-integer positions and samples outside
/// the source clamp to the edge.
pub fn resize_bilinear(
    src: &[f64],
    width: usize,
    height: usize,
    channels: usize,
    new_width: usize,
    new_height: usize,
) -> Result<Vec<f64>> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::InvalidDimension(format!(
            "cannot resize to {new_width}x{new_height}"
        )));
    }
    if width == 0 || height == 0 || channels == 0 || src.len() != width * height * channels {
        return Err(Error::InvalidDimension(format!(
            "source buffer of {} values does not match {width}x{height}x{channels}",
            src.len()
        )));
    }
    if (width, height) == (new_width, new_height) {
        return Ok(src.to_vec());
    }

    let xs = taps(width, new_width);
    let ys = taps(height, new_height);
    let mut out = Vec::with_capacity(new_width * new_height * channels);
    for ty in &ys {
        let row0 = ty.lo * width;
        let row1 = ty.hi * width;
        for tx in &xs {
            for c in 0..channels {
                let at = |row: usize, col: usize| src[(row + col) * channels + c];
                let top = at(row0, tx.lo) * (1.0 - tx.frac) + at(row0, tx.hi) * tx.frac;
                let bottom = at(row1, tx.lo) * (1.0 - tx.frac) + at(row1, tx.hi) * tx.frac;
                out.push(top * (1.0 - ty.frac) + bottom * ty.frac);
            }
        }
    }
    Ok(out)
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

impl RasterImage {
    pub fn resized(&self, new_width: usize, new_height: usize) -> Result<RasterImage> {
        let src: Vec<f64> = self.pixels().iter().flatten().map(|&v| v as f64).collect();
        let out = resize_bilinear(&src, self.width(), self.height(), 3, new_width, new_height)?;
        let pixels = out
            .chunks_exact(3)
            .map(|c| [to_u8(c[0]), to_u8(c[1]), to_u8(c[2])])
            .collect();
        RasterImage::new(new_width, new_height, pixels)
    }
}

impl LuminanceImage {
    pub fn resized(&self, new_width: usize, new_height: usize) -> Result<LuminanceImage> {
        let src: Vec<f64> = self.values().iter().map(|&v| v as f64).collect();
        let out = resize_bilinear(&src, self.width(), self.height(), 1, new_width, new_height)?;
        LuminanceImage::new(new_width, new_height, out.into_iter().map(to_u8).collect())
    }
}

impl ProbabilityMap {
    pub fn resized(&self, new_width: usize, new_height: usize) -> Result<ProbabilityMap> {
        let out = resize_bilinear(
            self.values(),
            self.width(),
            self.height(),
            1,
            new_width,
            new_height,
        )?;
        super::types::check_dims(new_width, new_height)?;
        Ok(ProbabilityMap::from_clamped(new_width, new_height, out))
    }
}

use std::borrow::Cow;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{check_same_dims, BinaryMask, RasterImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiggleParams {
    pub frames: usize,
    /// Peak horizontal displacement of the foreground, in pixels.
    pub shift: usize,
    /// Frame delay in centiseconds.
    pub delay: u16,
}

impl Default for WiggleParams {
    fn default() -> Self {
        Self {
            frames: 2,
            shift: 4,
            delay: 10,
        }
    }
}

/// Gray used for rows with no background pixel to copy from.
const HOLE_GRAY: [u8; 3] = [128; 3];

/// Horizontal foreground offset of frame `f`.
pub fn frame_offset(p: &WiggleParams, f: usize) -> isize {
    (p.shift as f64 * (2.0 * PI * f as f64 / p.frames as f64).cos()).round() as isize
}

/// The image with every foreground pixel replaced by the nearest
/// background pixel of its row (left wins ties).
fn background_layer(img: &RasterImage, mask: &BinaryMask) -> RasterImage {
    let (w, h) = img.dims();
    let mut out = img.clone();
    for y in 0..h {
        let mut left = vec![None; w];
        let mut last = None;
        for (x, slot) in left.iter_mut().enumerate() {
            if !mask.get(x, y) {
                last = Some(x);
            }
            *slot = last;
        }
        let mut right = None;
        for x in (0..w).rev() {
            if !mask.get(x, y) {
                right = Some(x);
                continue;
            }
            let source = match (left[x], right) {
                (Some(l), Some(r)) => Some(if x - l <= r - x { l } else { r }),
                (l, r) => l.or(r),
            };
            let color = source.map_or(HOLE_GRAY, |s| img.pixel(s, y));
            out.set_pixel(x, y, color);
        }
    }
    out
}

fn validate(img: &RasterImage, mask: &BinaryMask, p: &WiggleParams) -> Result<()> {
    check_same_dims(img.dims(), mask.dims())?;
    if p.frames < 2 {
        return Err(Error::Config(format!(
            "a wiggle needs at least 2 frames, got {}",
            p.frames
        )));
    }
    if p.shift >= img.width() {
        return Err(Error::InvalidShift {
            shift: p.shift,
            width: img.width(),
        });
    }
    Ok(())
}

/// Frames of the parallax animation: the foreground layer displaced
/// horizontally over the hole-filled background.
pub fn wiggle_frames(
    img: &RasterImage,
    mask: &BinaryMask,
    p: &WiggleParams,
) -> Result<Vec<RasterImage>> {
    validate(img, mask, p)?;
    let (w, h) = img.dims();
    let background = background_layer(img, mask);
    Ok((0..p.frames)
        .into_par_iter()
        .map(|f| {
            let dx = frame_offset(p, f);
            let mut frame = background.clone();
            for y in 0..h {
                for x in 0..w {
                    if !mask.get(x, y) {
                        continue;
                    }
                    let tx = x as isize + dx;
                    if (0..w as isize).contains(&tx) {
                        frame.set_pixel(tx as usize, y, img.pixel(x, y));
                    }
                }
            }
            frame
        })
        .collect())
}

const LEVELS: [usize; 3] = [6, 7, 6];

fn level(v: u8, n: usize) -> usize {
    (v as usize * (n - 1) + 127) / 255
}

/// Uniform 6x7x6 palette padded with black to 256 entries.
pub fn uniform_palette() -> Vec<u8> {
    let mut palette = Vec::with_capacity(256 * 3);
    for r in 0..LEVELS[0] {
        for g in 0..LEVELS[1] {
            for b in 0..LEVELS[2] {
                for (v, n) in [(r, LEVELS[0]), (g, LEVELS[1]), (b, LEVELS[2])] {
                    palette.push(((v * 255 + (n - 1) / 2) / (n - 1)) as u8);
                }
            }
        }
    }
    palette.resize(256 * 3, 0);
    palette
}

pub fn palette_index(c: [u8; 3]) -> u8 {
    let (r, g, b) = (
        level(c[0], LEVELS[0]),
        level(c[1], LEVELS[1]),
        level(c[2], LEVELS[2]),
    );
    (r * LEVELS[1] * LEVELS[2] + g * LEVELS[2] + b) as u8
}

/// Encodes frames as a looping GIF with the uniform global palette.
pub fn encode_gif(frames: &[RasterImage], delay: u16) -> Result<Vec<u8>> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidValue("no frames to encode".into()))?;
    let (w, h) = first.dims();
    let (gw, gh) = match (u16::try_from(w), u16::try_from(h)) {
        (Ok(gw), Ok(gh)) => (gw, gh),
        _ => {
            return Err(Error::InvalidDimension(format!(
                "{w}x{h} exceeds the GIF size limit"
            )))
        }
    };
    let indexed: Vec<Vec<u8>> = frames
        .par_iter()
        .map(|f| {
            check_same_dims((w, h), f.dims())?;
            Ok(f.pixels().iter().map(|&c| palette_index(c)).collect())
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    {
        let mut encoder = gif::Encoder::new(&mut out, gw, gh, &uniform_palette())?;
        encoder.set_repeat(gif::Repeat::Infinite)?;
        for buffer in &indexed {
            let frame = gif::Frame {
                width: gw,
                height: gh,
                delay,
                buffer: Cow::Borrowed(buffer),
                ..gif::Frame::default()
            };
            encoder.write_frame(&frame)?;
        }
    }
    Ok(out)
}

/// Simulated-stereo wiggle of the masked object, as GIF bytes.
pub fn wiggle_gif(img: &RasterImage, mask: &BinaryMask, p: &WiggleParams) -> Result<Vec<u8>> {
    let frames = wiggle_frames(img, mask, p)?;
    encode_gif(&frames, p.delay)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(bytes: &[u8]) -> Vec<(u16, u16, u16, Vec<u8>)> {
        let mut opts = gif::DecodeOptions::new();
        opts.set_color_output(gif::ColorOutput::RGBA);
        let mut dec = opts.read_info(bytes).unwrap();
        let mut frames = Vec::new();
        while let Some(f) = dec.read_next_frame().unwrap() {
            frames.push((f.width, f.height, f.delay, f.buffer.to_vec()));
        }
        frames
    }

    fn disc_scene() -> (RasterImage, BinaryMask) {
        let inside =
            |x: usize, y: usize| (x as f64 - 30.0).powi(2) + (y as f64 - 20.0).powi(2) < 100.0;
        let img = RasterImage::from_fn(60, 40, |x, y| {
            if inside(x, y) {
                [255, 0, 0]
            } else {
                [0, 0, 255]
            }
        })
        .unwrap();
        (img, BinaryMask::from_fn(60, 40, inside).unwrap())
    }

    #[test]
    fn palette_reproduces_its_own_colors() {
        let pal = uniform_palette();
        assert_eq!(pal.len(), 768);
        for i in 0..252 {
            let c = [pal[3 * i], pal[3 * i + 1], pal[3 * i + 2]];
            assert_eq!(palette_index(c) as usize, i);
        }
        assert_eq!(palette_index([255, 255, 255]), 251);
    }

    #[test]
    fn offsets_alternate() {
        let p = WiggleParams::default();
        assert_eq!((frame_offset(&p, 0), frame_offset(&p, 1)), (4, -4));
    }

    #[test]
    fn centroids_move_by_twice_the_shift() {
        let (img, mask) = disc_scene();
        let p = WiggleParams::default();
        let frames = decode(&wiggle_gif(&img, &mask, &p).unwrap());
        assert_eq!(frames.len(), 2);
        let centroid = |rgba: &[u8]| {
            let (mut sum, mut n) = (0.0, 0.0);
            for (i, px) in rgba.chunks(4).enumerate() {
                if px[0] > 128 && px[2] < 128 {
                    sum += (i % 60) as f64;
                    n += 1.0;
                }
            }
            sum / n
        };
        for f in &frames {
            assert_eq!((f.0, f.1, f.2), (60, 40, 10));
        }
        let diff = centroid(&frames[0].3) - centroid(&frames[1].3);
        assert!((diff - 8.0).abs() <= 1.0, "centroid difference {diff}");
    }

    #[test]
    fn zero_shift_and_empty_mask_give_static_frames() {
        let (img, mask) = disc_scene();
        let still = WiggleParams {
            frames: 3,
            shift: 0,
            delay: 5,
        };
        let frames = wiggle_frames(&img, &mask, &still).unwrap();
        assert!(frames.iter().all(|f| *f == img));

        let empty = BinaryMask::empty(60, 40).unwrap();
        let frames = wiggle_frames(&img, &empty, &WiggleParams::default()).unwrap();
        assert!(frames.iter().all(|f| *f == img));
    }

    #[test]
    fn holes_take_the_nearest_row_background() {
        let img = RasterImage::new(
            5,
            2,
            vec![
                [1; 3], [50; 3], [50; 3], [50; 3], [9; 3], [50; 3], [50; 3], [50; 3], [50; 3],
                [50; 3],
            ],
        )
        .unwrap();
        let mask = BinaryMask::from_fn(5, 2, |x, y| y == 1 || (1..4).contains(&x)).unwrap();
        let bg = background_layer(&img, &mask);
        assert_eq!(bg.pixel(1, 0), [1; 3]);
        assert_eq!(bg.pixel(2, 0), [1; 3], "left wins ties");
        assert_eq!(bg.pixel(3, 0), [9; 3]);
        assert_eq!(bg.pixel(2, 1), HOLE_GRAY);
    }

    #[test]
    fn invalid_parameters() {
        let (img, mask) = disc_scene();
        let p = WiggleParams {
            shift: 60,
            ..Default::default()
        };
        assert!(matches!(
            wiggle_gif(&img, &mask, &p),
            Err(Error::InvalidShift {
                shift: 60,
                width: 60
            })
        ));
        let p = WiggleParams {
            frames: 1,
            ..Default::default()
        };
        assert!(wiggle_gif(&img, &mask, &p).is_err());
    }
}

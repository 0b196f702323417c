//! PNG/JPEG decoding and PNG encoding of images, maps and masks.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, ImageReader, Limits};

use crate::error::{Error, Result};

use super::types::{BinaryMask, ProbabilityMap, RasterImage, MAX_SIDE};

fn limits() -> Limits {
    let mut limits = Limits::default();
    limits.max_image_width = Some(MAX_SIDE as u32);
    limits.max_image_height = Some(MAX_SIDE as u32);
    limits.max_alloc = Some(1 << 30);
    limits
}

fn codec(path: Option<&Path>) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Codec {
        path: path.map(Path::to_path_buf),
        source,
    }
}

fn from_dynamic(img: image::DynamicImage) -> Result<RasterImage> {
    let rgb = img.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RasterImage::new(w, h, pixels)
}

/// Decodes PNG or JPEG bytes into RGB. Alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    let mut reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Codec {
            path: None,
            source: image::ImageError::IoError(e),
        })?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Jpeg) => {}
        _ => {
            return Err(Error::Codec {
                path: None,
                source: image::ImageError::Unsupported(
                    image::error::UnsupportedError::from_format_and_kind(
                        image::error::ImageFormatHint::Unknown,
                        image::error::UnsupportedErrorKind::Format(
                            image::error::ImageFormatHint::Unknown,
                        ),
                    ),
                ),
            })
        }
    }
    reader.limits(limits());
    from_dynamic(reader.decode().map_err(codec(None))?)
}

pub fn load_image(path: &Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Codec { source, .. } => Error::Codec {
            path: Some(path.to_path_buf()),
            source,
        },
        other => other,
    })
}

fn encode_png(
    bytes: &[u8],
    width: usize,
    height: usize,
    color: image::ExtendedColorType,
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    image::ImageEncoder::write_image(
        image::codecs::png::PngEncoder::new(&mut out),
        bytes,
        width as u32,
        height as u32,
        color,
    )
    .map_err(codec(None))?;
    Ok(out)
}

pub fn encode_rgb_png(img: &RasterImage) -> Result<Vec<u8>> {
    encode_png(
        &img.as_bytes(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgb8,
    )
}

/// 8-bit grayscale PNG with value `round(255 p)`.
pub fn encode_map_png(map: &ProbabilityMap) -> Result<Vec<u8>> {
    encode_png(
        &map.to_levels(),
        map.width(),
        map.height(),
        image::ExtendedColorType::L8,
    )
}

/// 8-bit grayscale PNG, 255 for foreground and 0 for background.
pub fn encode_mask_png(mask: &BinaryMask) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    encode_png(
        &bytes,
        mask.width(),
        mask.height(),
        image::ExtendedColorType::L8,
    )
}

/// Reads a mask PNG; any nonzero luminance counts as foreground.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = decode_image(bytes)?;
    BinaryMask::new(
        img.width(),
        img.height(),
        img.pixels()
            .iter()
            .map(|p| p.iter().any(|&c| c > 0))
            .collect(),
    )
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

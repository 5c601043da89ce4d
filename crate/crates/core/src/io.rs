//! PNG loading and saving.
//!
//! Accepted inputs are 8-bit gray and 8-bit RGB; anything carrying alpha or
//! more than 8 bits per sample is rejected rather than silently converted.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::entropy::{rgb_interleaved_to_gray, GrayImage, GrayMode};
use crate::error::{Error, Result};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Decodes a PNG file into a gray image, collapsing RGB with `mode`.
pub fn load_gray(path: &Path, mode: GrayMode) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(&bytes, mode).map_err(|e| match e {
        DecodeError::Unsupported(message) => Error::UnsupportedFormat {
            path: path.to_owned(),
            message,
        },
        DecodeError::Corrupt(message) => Error::Decode {
            path: path.to_owned(),
            message,
        },
    })
}

enum DecodeError {
    Unsupported(String),
    Corrupt(String),
}

fn decode_png(bytes: &[u8], mode: GrayMode) -> Result<GrayImage, DecodeError> {
    if !bytes.starts_with(PNG_SIGNATURE) {
        return Err(DecodeError::Unsupported("not a PNG file".into()));
    }
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| DecodeError::Corrupt(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = match img {
        DynamicImage::ImageLuma8(buf) => GrayImage::new(w, h, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => rgb_interleaved_to_gray(w, h, buf.as_raw(), mode),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
            return Err(DecodeError::Unsupported(
                "alpha channels are not supported".into(),
            ))
        }
        other => {
            return Err(DecodeError::Unsupported(format!(
                "only 8-bit samples are supported, found {:?}",
                other.color()
            )))
        }
    };
    gray.map_err(|e| DecodeError::Corrupt(e.to_string()))
}

/// Writes `img` as an 8-bit grayscale PNG.
pub fn save_gray(img: &GrayImage, path: &Path) -> Result<()> {
    image::save_buffer_with_format(
        path,
        img.pixels(),
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Output(format!("{}: {other}", path.display())),
    })
}

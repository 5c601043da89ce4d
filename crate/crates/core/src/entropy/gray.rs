use serde::Serialize;

use crate::error::{Error, Result};

/// Single-plane 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} has an empty dimension"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels do not fill {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub(crate) fn ensure_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }
}

/// How three color planes collapse to one gray plane.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrayMode {
    /// `0.299 R + 0.587 G + 0.114 B`
    #[default]
    Luma,
    /// `(R + G + B) / 3`
    ChannelMean,
}

#[inline]
pub(crate) fn gray_value(r: u8, g: u8, b: u8, mode: GrayMode) -> u8 {
    let v = match mode {
        GrayMode::Luma => 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b),
        GrayMode::ChannelMean => (f64::from(r) + f64::from(g) + f64::from(b)) / 3.0,
    };
    v.round().clamp(0.0, 255.0) as u8
}

/// Collapses separate red, green and blue planes into one gray plane.
pub fn to_grayscale(
    red: &GrayImage,
    green: &GrayImage,
    blue: &GrayImage,
    mode: GrayMode,
) -> Result<GrayImage> {
    red.ensure_same_dims(green)?;
    red.ensure_same_dims(blue)?;
    let pixels = red
        .pixels
        .iter()
        .zip(&green.pixels)
        .zip(&blue.pixels)
        .map(|((&r, &g), &b)| gray_value(r, g, b, mode))
        .collect();
    GrayImage::new(red.width, red.height, pixels)
}

/// Same as [`to_grayscale`] for interleaved `RGBRGB...` data.
pub fn rgb_interleaved_to_gray(
    width: usize,
    height: usize,
    rgb: &[u8],
    mode: GrayMode,
) -> Result<GrayImage> {
    if rgb.len() != width * height * 3 {
        return Err(Error::InvalidImage(format!(
            "{} bytes do not fill a {width}x{height} RGB image",
            rgb.len()
        )));
    }
    let pixels = rgb
        .chunks_exact(3)
        .map(|px| gray_value(px[0], px[1], px[2], mode))
        .collect();
    GrayImage::new(width, height, pixels)
}

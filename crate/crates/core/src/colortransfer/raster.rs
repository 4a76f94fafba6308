use std::path::Path;

use image::{ImageBuffer, Rgb, Rgba};

use crate::error::{OtError, Result};

/// An RGB image with float channels in `[0, 1]`, row-major. An alpha
/// channel read from disk is carried along untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[f64; 3]>,
    pub alpha: Option<Vec<u8>>,
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

impl Raster {
    pub fn new(width: u32, height: u32, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(OtError::InvalidParameter("image must be non-empty".into()));
        }
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(OtError::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if pixels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(OtError::NonFiniteInput("pixel values".into()));
        }
        Ok(Self { width, height, pixels, alpha: None })
    }

    /// From interleaved 8-bit RGB bytes.
    pub fn from_rgb8(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 3 * (width as usize) * (height as usize) {
            return Err(OtError::DimensionMismatch(format!("{} bytes for a {width}x{height} RGB image", bytes.len())));
        }
        let pixels = bytes.chunks_exact(3).map(|p| [0, 1, 2].map(|d| p[d] as f64 / 255.0)).collect();
        Self::new(width, height, pixels)
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| p.map(to_u8)).collect()
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Reads an 8-bit RGB or RGBA PNG (other layouts are converted).
    pub fn read_png(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::open(path)?;
        let (width, height) = (img.width(), img.height());
        if img.color().has_alpha() {
            let rgba = img.to_rgba8();
            let mut rgb = Vec::with_capacity(3 * rgba.len() / 4);
            let mut alpha = Vec::with_capacity(rgba.len() / 4);
            for p in rgba.pixels() {
                rgb.extend_from_slice(&p.0[..3]);
                alpha.push(p.0[3]);
            }
            let mut r = Self::from_rgb8(width, height, &rgb)?;
            r.alpha = Some(alpha);
            Ok(r)
        } else {
            Self::from_rgb8(width, height, img.to_rgb8().as_raw())
        }
    }

    /// Writes an 8-bit PNG, RGBA when an alpha channel is present.
    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let rgb = self.to_rgb8();
        match &self.alpha {
            Some(alpha) => {
                let data: Vec<u8> = rgb.chunks_exact(3).zip(alpha).flat_map(|(p, &a)| [p[0], p[1], p[2], a]).collect();
                let buf: ImageBuffer<Rgba<u8>, _> =
                    ImageBuffer::from_raw(self.width, self.height, data).expect("buffer size matches");
                buf.save_with_format(path, image::ImageFormat::Png)?;
            }
            None => {
                let buf: ImageBuffer<Rgb<u8>, _> =
                    ImageBuffer::from_raw(self.width, self.height, rgb).expect("buffer size matches");
                buf.save_with_format(path, image::ImageFormat::Png)?;
            }
        }
        Ok(())
    }
}

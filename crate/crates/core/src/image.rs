//! Grayscale image container and the two image-level distances used
//! throughout the crate: PSNR and the l0 (pixel mismatch count) distance.

use std::ops::{Add, Sub};

use crate::error::{Error, Result};

/// Row-major grayscale image with real-valued intensities.
///
/// The nominal range is `[0, 255]`, but iterates of the solvers are allowed
/// to leave it; only non-finite values are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant image. Panics on zero dimensions or a non-finite value.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert!(value.is_finite(), "fill value must be finite");
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds an image by evaluating `f(row, col)` in raster order.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_same_shape(&self, other: &GrayImage) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            })
        }
    }

    /// Applies `f` pixelwise to `self` and `other`. Shapes must agree.
    pub fn zip_map(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> Result<GrayImage> {
        self.check_same_shape(other)?;
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GrayImage::new(self.width, self.height, pixels)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GrayImage> {
        GrayImage::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Copies the `width`x`height` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Result<GrayImage> {
        if width == 0 || height == 0 || row + height > self.height || col + width > self.width {
            return Err(Error::InvalidImage(format!(
                "crop {width}x{height} at ({row}, {col}) does not fit a {}x{} image",
                self.width, self.height
            )));
        }
        GrayImage::from_fn(width, height, |r, c| self.get(row + r, col + c))
    }

    /// Centered crop of at most `side`x`side`; smaller images are returned whole.
    pub fn center_crop(&self, side: usize) -> Result<GrayImage> {
        let w = side.min(self.width);
        let h = side.min(self.height);
        self.crop((self.height - h) / 2, (self.width - w) / 2, w, h)
    }

    pub fn min_value(&self) -> f64 {
        self.pixels.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.pixels
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Add for &GrayImage {
    type Output = GrayImage;

    /// Panics on shape mismatch.
    fn add(self, rhs: &GrayImage) -> GrayImage {
        self.zip_map(rhs, |a, b| a + b)
            .expect("image shapes must agree")
    }
}

impl Sub for &GrayImage {
    type Output = GrayImage;

    /// Panics on shape mismatch.
    fn sub(self, rhs: &GrayImage) -> GrayImage {
        self.zip_map(rhs, |a, b| a - b)
            .expect("image shapes must agree")
    }
}

/// Peak signal-to-noise ratio in dB, `20 log10(255 r / ||estimate - reference||_F)`
/// with `r` the square root of the pixel count.
///
/// A zero error yields `f64::INFINITY`, which is the sentinel for an exact
/// reconstruction.
pub fn psnr(estimate: &GrayImage, reference: &GrayImage) -> Result<f64> {
    estimate.check_same_shape(reference)?;
    let err_sq: f64 = estimate
        .pixels
        .iter()
        .zip(&reference.pixels)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if err_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    let r = (estimate.len() as f64).sqrt();
    Ok(20.0 * (255.0 * r / err_sq.sqrt()).log10())
}

/// Number of pixels where the two images differ exactly.
pub fn l0_distance(a: &GrayImage, b: &GrayImage) -> Result<usize> {
    a.check_same_shape(b)?;
    Ok(a.pixels
        .iter()
        .zip(&b.pixels)
        .filter(|(x, y)| x != y)
        .count())
}

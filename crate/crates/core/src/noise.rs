//! Seeded noise synthesis: random-valued impulse noise on the discrete
//! intensity set `0..=255` and additive Gaussian noise.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    ImpulseUniform,
    Gaussian,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::ImpulseUniform => "impulse",
            NoiseKind::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Proportion of corrupted pixels (impulse kind).
    pub p: f64,
    /// Standard deviation in intensity units (Gaussian kind).
    pub sigma: f64,
    pub range: (f64, f64),
    pub seed: u64,
}

impl NoiseSpec {
    pub fn impulse(p: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::ImpulseUniform,
            p,
            sigma: 0.0,
            range: (0.0, 255.0),
            seed,
        }
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            p: 0.0,
            sigma,
            range: (0.0, 255.0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NoiseKind::ImpulseUniform if !(0.0..=1.0).contains(&self.p) => {
                return Err(Error::InvalidParameter(format!(
                    "impulse proportion p = {} is outside [0, 1]",
                    self.p
                )))
            }
            NoiseKind::Gaussian if !(self.sigma >= 0.0 && self.sigma.is_finite()) => {
                return Err(Error::InvalidParameter(format!(
                    "gaussian sigma = {} must be finite and non-negative",
                    self.sigma
                )))
            }
            _ => {}
        }
        if self.range.0.partial_cmp(&self.range.1) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidParameter(format!(
                "noise range [{}, {}] is empty",
                self.range.0, self.range.1
            )));
        }
        Ok(())
    }
}

/// Dispatches on `spec.kind`.
pub fn add_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    match spec.kind {
        NoiseKind::ImpulseUniform => add_impulse_noise(img, spec),
        NoiseKind::Gaussian => add_gaussian_noise(img, spec),
    }
}

/// Replaces each pixel, with probability `p`, by an integer drawn uniformly
/// from `0..=255`.
///
/// Pixels are visited in raster order. Each visit draws one uniform `u1`; only
/// when `u1 < p` is a second uniform drawn for the replacement value.
pub fn add_impulse_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    if spec.kind != NoiseKind::ImpulseUniform {
        return Err(Error::InvalidParameter(
            "expected an impulse noise spec".into(),
        ));
    }
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            if rng.next_f64() < spec.p {
                (rng.next_f64() * 256.0).floor().clamp(0.0, 255.0)
            } else {
                v
            }
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

/// Adds `sigma`-scaled Box-Muller deviates, one per pixel in raster order.
/// The result is not clamped.
pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    if spec.kind != NoiseKind::Gaussian {
        return Err(Error::InvalidParameter(
            "expected a gaussian noise spec".into(),
        ));
    }
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            // 1 - [0,1) keeps the log argument in (0, 1].
            let u1 = 1.0 - rng.next_f64();
            let u2 = rng.next_f64();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
            v + spec.sigma * z
        })
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

//! PSNR benchmark over a corpus of clean images and impulse noise levels.
//!
//! Every (image, p) cell synthesizes its noisy input from a seed that only
//! depends on the image file name and the decimal form of `p`, then scores
//! the initializer and the full ADMM pipeline against the clean image.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::image::{psnr, GrayImage};
use crate::noise::{add_impulse_noise, NoiseSpec};
use crate::pipeline::{denoise_from_init, DenoiseSettings, Method};
use crate::pwmf::pwmf;
use crate::rng::hash_bytes;

/// Side of the center crops used by the reduced desk-scale protocol.
pub const DESK_CROP: usize = 128;
pub const DESK_ITERATIONS: usize = 20;
pub const DESK_STRIDE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub p: f64,
    pub method: Method,
    /// `f64::INFINITY` for an exact reconstruction.
    pub psnr_db: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub settings: DenoiseSettings,
    /// Center-crop side applied before noise synthesis.
    pub crop: Option<usize>,
}

impl BenchOptions {
    /// Full images, default settings (50 iterations).
    pub fn full() -> Self {
        Self {
            settings: DenoiseSettings::default(),
            crop: None,
        }
    }

    /// 128x128 center crops, stride 4, 20 iterations.
    pub fn desk() -> Self {
        let mut settings = DenoiseSettings::default();
        settings.geometry.stride = DESK_STRIDE;
        settings.iterations = DESK_ITERATIONS;
        Self {
            settings,
            crop: Some(DESK_CROP),
        }
    }
}

/// Seed of one benchmark cell: hash of the file name followed by `p` printed
/// in shortest decimal form.
pub fn cell_seed(image_name: &str, p: f64) -> u64 {
    hash_bytes(format!("{image_name}{p}").as_bytes())
}

/// Noisy input of one cell, together with the (possibly cropped) clean image.
pub fn cell_input(
    image_name: &str,
    clean: &GrayImage,
    p: f64,
    crop: Option<usize>,
) -> Result<(GrayImage, GrayImage)> {
    let clean = match crop {
        Some(side) => clean.center_crop(side)?,
        None => clean.clone(),
    };
    let noisy = add_impulse_noise(&clean, &NoiseSpec::impulse(p, cell_seed(image_name, p)))?;
    Ok((clean, noisy))
}

/// Scores the initializer and ADMM on one (image, p) cell.
pub fn run_cell(
    image_name: &str,
    clean: &GrayImage,
    p: f64,
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>> {
    let (clean, noisy) = cell_input(image_name, clean, p, opts.crop)?;
    opts.settings
        .check_feasible(noisy.width(), noisy.height())?;

    let start = Instant::now();
    let init = pwmf(&noisy, &opts.settings.pwmf)?;
    let init_seconds = start.elapsed().as_secs_f64();
    let restored = denoise_from_init(&noisy, &init, &opts.settings)?;
    let admm_seconds = start.elapsed().as_secs_f64();

    let row = |method, estimate: &GrayImage, seconds| -> Result<BenchRow> {
        Ok(BenchRow {
            image: image_name.to_string(),
            p,
            method,
            psnr_db: psnr(estimate, &clean)?,
            seconds,
        })
    };
    Ok(vec![
        row(Method::Pwmf, &init, init_seconds)?,
        row(Method::Admm, &restored, admm_seconds)?,
    ])
}

/// Runs every (image, p) cell; rows come back sorted by (image, p, method).
pub fn run_bench(
    images: &[(String, GrayImage)],
    levels: &[f64],
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>> {
    if images.is_empty() {
        return Err(Error::InvalidParameter("benchmark corpus is empty".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidParameter("no noise levels given".into()));
    }
    let mut rows = Vec::with_capacity(images.len() * levels.len() * 2);
    for (name, clean) in images {
        for &p in levels {
            rows.extend(run_cell(name, clean, p, opts)?);
        }
    }
    rows.sort_by(|a, b| {
        a.image
            .cmp(&b.image)
            .then(a.p.total_cmp(&b.p))
            .then(a.method.cmp(&b.method))
    });
    Ok(rows)
}

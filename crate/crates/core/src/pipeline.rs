//! End-to-end denoising entry points shared by the CLI, the manifest replay
//! path and the benchmark harness.

use std::fmt;
use std::str::FromStr;

use crate::admm::{run_admm_state, AdmmConfig};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lowrank::{plr_denoise, PlrConfig};
use crate::patch::PatchGeometry;
use crate::pwmf::{pwmf, PwmfParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Pwmf,
    Plr,
    Admm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pwmf => "pwmf",
            Method::Plr => "plr",
            Method::Admm => "admm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pwmf" => Ok(Method::Pwmf),
            "plr" => Ok(Method::Plr),
            "admm" => Ok(Method::Admm),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Which ADMM iterate is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    U,
    V,
}

impl Emit {
    pub fn as_str(self) -> &'static str {
        match self {
            Emit::U => "u",
            Emit::V => "v",
        }
    }
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(Emit::U),
            "v" => Ok(Emit::V),
            other => Err(Error::InvalidParameter(format!(
                "emit must be u or v, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseSettings {
    pub method: Method,
    pub geometry: PatchGeometry,
    pub t: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub emit: Emit,
    pub pwmf: PwmfParams,
}

impl Default for DenoiseSettings {
    fn default() -> Self {
        let admm = AdmmConfig::default();
        Self {
            method: Method::Admm,
            geometry: admm.geometry,
            t: admm.t,
            alpha: admm.alpha,
            iterations: admm.iterations,
            emit: Emit::V,
            pwmf: PwmfParams::default(),
        }
    }
}

impl DenoiseSettings {
    pub fn admm_config(&self) -> Result<AdmmConfig> {
        AdmmConfig::new(self.alpha, self.t, self.geometry, self.iterations)
    }

    /// Checks that the configured method can run on a `width`x`height` image.
    pub fn check_feasible(&self, width: usize, height: usize) -> Result<()> {
        self.geometry.validate()?;
        self.pwmf.validate()?;
        let needs_plr = match self.method {
            Method::Pwmf => false,
            Method::Plr => true,
            Method::Admm => self.iterations > 0,
        };
        if needs_plr {
            self.geometry.check_feasible(width, height)?;
        }
        if self.method != Method::Plr
            && (width < self.pwmf.search_side || height < self.pwmf.search_side)
        {
            return Err(Error::InfeasibleGeometry(format!(
                "image {width}x{height} is smaller than the {s}x{s} initializer search window",
                s = self.pwmf.search_side
            )));
        }
        Ok(())
    }
}

/// Runs the configured method on `noisy`.
pub fn denoise(noisy: &GrayImage, settings: &DenoiseSettings) -> Result<GrayImage> {
    settings.check_feasible(noisy.width(), noisy.height())?;
    match settings.method {
        Method::Pwmf => pwmf(noisy, &settings.pwmf),
        Method::Plr => plr_denoise(noisy, &PlrConfig::new(settings.geometry, settings.t)?),
        Method::Admm => {
            let init = pwmf(noisy, &settings.pwmf)?;
            denoise_from_init(noisy, &init, settings)
        }
    }
}

/// ADMM from a precomputed initial image.
pub fn denoise_from_init(
    noisy: &GrayImage,
    init: &GrayImage,
    settings: &DenoiseSettings,
) -> Result<GrayImage> {
    let state = run_admm_state(noisy, &settings.admm_config()?, init)?;
    Ok(match settings.emit {
        Emit::U if settings.iterations > 0 => state.u,
        _ => state.v,
    })
}

//! Flat `key=value` run manifests written next to every output image.
//!
//! A manifest records everything needed to regenerate its output: the input
//! path, the operation and every numeric parameter. Floats are written in
//! Rust's shortest round-trip form, so parsing restores them bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, PnmError, Result};
use crate::image::GrayImage;
use crate::noise::{add_noise, NoiseKind, NoiseSpec};
use crate::patch::PatchGeometry;
use crate::pipeline::{denoise, DenoiseSettings};
use crate::pwmf::PwmfParams;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    AddNoise(NoiseSpec),
    Denoise(DenoiseSettings),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub operation: Operation,
    pub input: PathBuf,
    pub output: PathBuf,
    pub version: String,
}

impl RunManifest {
    pub fn new(
        operation: Operation,
        input: impl Into<PathBuf>,
        output: impl Into<PathBuf>,
    ) -> Self {
        Self {
            operation,
            input: input.into(),
            output: output.into(),
            version: VERSION.to_string(),
        }
    }

    /// Conventional location: the output path with `.manifest` appended.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.operation {
            Operation::AddNoise(spec) => Some(spec.seed),
            Operation::Denoise(_) => None,
        }
    }

    /// Applies the recorded operation to `input`.
    pub fn execute(&self, input: &GrayImage) -> Result<GrayImage> {
        match &self.operation {
            Operation::AddNoise(spec) => add_noise(input, spec),
            Operation::Denoise(settings) => denoise(input, settings),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("version", &self.version);
        match &self.operation {
            Operation::AddNoise(spec) => {
                kv("command", &"add-noise");
                kv("kind", &spec.kind.as_str());
                kv("p", &spec.p);
                kv("sigma", &spec.sigma);
                kv("range_lo", &spec.range.0);
                kv("range_hi", &spec.range.1);
                kv("seed", &spec.seed);
            }
            Operation::Denoise(s) => {
                kv("command", &"denoise");
                kv("method", &s.method);
                kv("d", &s.geometry.patch);
                kv("M", &s.geometry.window);
                kv("m", &s.geometry.group);
                kv("stride", &s.geometry.stride);
                kv("t", &s.t);
                kv("alpha", &s.alpha);
                kv("iters", &s.iterations);
                kv("emit", &s.emit.as_str());
                kv("pwmf_road_neighbors", &s.pwmf.road_neighbors);
                kv("pwmf_road_scale", &s.pwmf.road_scale);
                kv("pwmf_patch_side", &s.pwmf.patch_side);
                kv("pwmf_search_side", &s.pwmf.search_side);
                kv("pwmf_patch_scale", &s.pwmf.patch_scale);
                kv("pwmf_passes", &s.pwmf.passes);
            }
        }
        kv("input", &self.input.display());
        kv("output", &self.output.display());
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("manifest line {} has no '=': {line:?}", n + 1))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let fields = Fields(&map);
        let operation = match fields.str("command")? {
            "add-noise" => {
                let kind = match fields.str("kind")? {
                    "impulse" => NoiseKind::ImpulseUniform,
                    "gaussian" => NoiseKind::Gaussian,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown noise kind {other:?}"
                        )))
                    }
                };
                let spec = NoiseSpec {
                    kind,
                    p: fields.num("p")?,
                    sigma: fields.num("sigma")?,
                    range: (fields.num("range_lo")?, fields.num("range_hi")?),
                    seed: fields.num("seed")?,
                };
                spec.validate()?;
                Operation::AddNoise(spec)
            }
            "denoise" => Operation::Denoise(DenoiseSettings {
                method: fields.str("method")?.parse()?,
                geometry: PatchGeometry::new(
                    fields.num("d")?,
                    fields.num("M")?,
                    fields.num("m")?,
                    fields.num("stride")?,
                )?,
                t: fields.num("t")?,
                alpha: fields.num("alpha")?,
                iterations: fields.num("iters")?,
                emit: fields.str("emit")?.parse()?,
                pwmf: PwmfParams {
                    road_neighbors: fields.num("pwmf_road_neighbors")?,
                    road_scale: fields.num("pwmf_road_scale")?,
                    patch_side: fields.num("pwmf_patch_side")?,
                    search_side: fields.num("pwmf_search_side")?,
                    patch_scale: fields.num("pwmf_patch_scale")?,
                    passes: fields.num("pwmf_passes")?,
                },
            }),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown manifest command {other:?}"
                )))
            }
        };
        Ok(Self {
            operation,
            input: PathBuf::from(fields.str("input")?),
            output: PathBuf::from(fields.str("output")?),
            version: fields.str("version")?.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|source| PnmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| PnmError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

struct Fields<'a>(&'a BTreeMap<String, String>);

impl Fields<'_> {
    fn str(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidParameter(format!("manifest is missing {key:?}")))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.str(key)?;
        raw.parse().map_err(|_| {
            Error::InvalidParameter(format!("manifest value {key}={raw:?} is not a number"))
        })
    }
}

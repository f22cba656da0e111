//! Random-valued impulse noise removal with an exact patch low-rank prior
//! and an l0 data term.
//!
//! The solver alternates between a closed-form l0 fidelity step and a patch
//! low-rank (PLR) denoising step inside a Plug-and-Play ADMM loop, seeded by a
//! ROAD-weighted patch mean filter.

pub mod admm;
pub mod bench;
pub mod error;
pub mod image;
pub mod likelihood;
pub mod lowrank;
pub mod manifest;
pub mod noise;
pub mod patch;
pub mod pipeline;
pub mod pnm;
pub mod pwmf;
pub mod rng;

pub use admm::{run_admm, AdmmConfig, AdmmState};
pub use error::{Error, PnmError, Result};
pub use image::{l0_distance, psnr, GrayImage};
pub use lowrank::{hard_threshold_rank, plr_denoise, PlrConfig, RankPenalty};
pub use manifest::RunManifest;
pub use noise::{add_gaussian_noise, add_impulse_noise, NoiseKind, NoiseSpec};
pub use patch::PatchGeometry;
pub use pipeline::{denoise, DenoiseSettings, Emit, Method};
pub use pwmf::{pwmf, PwmfParams};

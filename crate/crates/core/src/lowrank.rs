//! Exact rank-penalized denoising of similarity matrices and the full
//! patch low-rank (PLR) pass over an image.
//!
//! For a group matrix `S` (`d² × m`) the problem
//!
//! ```text
//! min_X ||S - X||_F² + m t² rank(X)
//! ```
//!
//! is solved in closed form by keeping the singular values of `S` that are
//! strictly larger than `τ = t √m` and discarding the rest.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::patch::{block_match, build_similarity_matrix, finalize, Position};
use crate::patch::{reference_grid, scatter_members, AggregationBuffer, PatchGeometry};

/// Number of reference patches whose groups are held in memory at once.
const GROUP_BATCH: usize = 256;

/// Threshold `t` together with the group size it is scaled by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPenalty {
    pub t: f64,
    pub group: usize,
}

impl RankPenalty {
    pub fn new(t: f64, group: usize) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold t = {t} must be finite and non-negative"
            )));
        }
        if group == 0 {
            return Err(Error::InvalidParameter(
                "group size must be positive".into(),
            ));
        }
        Ok(Self { t, group })
    }

    /// Gaussian calibration `t = 1.5 σ`.
    pub fn for_gaussian_sigma(sigma: f64, group: usize) -> Result<Self> {
        Self::new(1.5 * sigma, group)
    }

    /// Singular value cutoff `τ = t √m`.
    pub fn cutoff(&self) -> f64 {
        self.t * (self.group as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Thresholded {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

/// Global minimizer of `||S - X||_F² + τ² rank(X)`.
///
/// Singular values are obtained from the eigendecomposition of the smaller
/// Gram matrix (`S Sᵀ` or `Sᵀ S`); the estimate is the projection of `S`
/// onto the retained singular subspace. When every singular value survives,
/// `S` is returned unchanged.
pub fn hard_threshold_rank(s: &DMatrix<f64>, tau: f64) -> Result<Thresholded> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cutoff tau = {tau} must be finite and non-negative"
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = s.shape();
    if rows == 0 || cols == 0 {
        return Ok(Thresholded {
            matrix: s.clone(),
            rank: 0,
        });
    }

    let wide = rows <= cols;
    let st = s.transpose();
    let gram = if wide { s * &st } else { &st * s };
    let n = gram.nrows();
    let eig = SymmetricEigen::new(gram);

    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    // eigenvalues of the Gram matrix below this level are indistinguishable from 0
    let noise_floor = 8.0 * n as f64 * f64::EPSILON * lambda_max;
    let cut = (tau * tau).max(noise_floor);
    let kept: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > cut).collect();
    let rank = kept.len();

    if rank == n || tau == 0.0 {
        return Ok(Thresholded {
            matrix: s.clone(),
            rank,
        });
    }
    if rank == 0 {
        return Ok(Thresholded {
            matrix: DMatrix::zeros(rows, cols),
            rank,
        });
    }

    let basis = eig.eigenvectors.select_columns(&kept);
    let matrix = if wide {
        // P_k P_kᵀ S
        &basis * basis.tr_mul(s)
    } else {
        // S Q_k Q_kᵀ
        (s * &basis) * basis.transpose()
    };
    Ok(Thresholded { matrix, rank })
}

#[derive(Debug, Clone)]
pub struct PlrConfig {
    pub geometry: PatchGeometry,
    pub penalty: RankPenalty,
    /// Image used for block matching; the denoised image itself when `None`.
    pub guide: Option<GrayImage>,
}

impl PlrConfig {
    pub fn new(geometry: PatchGeometry, t: f64) -> Result<Self> {
        geometry.validate()?;
        Ok(Self {
            geometry,
            penalty: RankPenalty::new(t, geometry.group)?,
            guide: None,
        })
    }

    pub fn with_guide(mut self, guide: GrayImage) -> Self {
        self.guide = Some(guide);
        self
    }
}

/// Denoises `img` group by group and averages the overlapping estimates.
pub fn plr_denoise(img: &GrayImage, cfg: &PlrConfig) -> Result<GrayImage> {
    let guide = cfg.guide.as_ref().unwrap_or(img);
    plr_denoise_guided(img, guide, &cfg.geometry, cfg.penalty.t)
}

/// PLR with an explicit matching guide.
///
/// Groups are denoised in parallel batches but always accumulated in
/// reference-grid order, so the result does not depend on the thread count.
pub fn plr_denoise_guided(
    img: &GrayImage,
    guide: &GrayImage,
    geometry: &PatchGeometry,
    t: f64,
) -> Result<GrayImage> {
    guide.check_same_shape(img)?;
    geometry.check_feasible(img.width(), img.height())?;
    let tau = RankPenalty::new(t, geometry.group)?.cutoff();
    let refs = reference_grid(img.width(), img.height(), geometry)?;

    let denoise_group = |&reference: &Position| -> Result<(Vec<Position>, DMatrix<f64>)> {
        let members = block_match(guide, reference, geometry)?;
        let s = build_similarity_matrix(img, &members, geometry.patch)?;
        let x = hard_threshold_rank(&s, tau)?;
        Ok((members, x.matrix))
    };

    let mut buf = AggregationBuffer::new(img.width(), img.height());
    for batch in refs.chunks(GROUP_BATCH) {
        let results: Vec<_> = batch.par_iter().map(denoise_group).collect::<Result<_>>()?;
        for (members, x) in &results {
            scatter_members(members, x, &mut buf)?;
        }
    }
    finalize(&buf)
}

//! ROAD-guided patch weighted mean filter, used to produce the starting image
//! of the ADMM iteration.
//!
//! ROAD (rank-ordered absolute differences) is the sum of the smallest
//! absolute differences between a pixel and its 8 neighbors. It is close to
//! zero for clean pixels and large for impulses, so `exp(-ROAD²/(2 s²))`
//! serves as a per-pixel reliability weight.
//!
//! Each output pixel is a weighted mean over its search window. A candidate
//! `y` contributes with its own reliability times a patch similarity term
//! whose squared differences are themselves reliability-weighted, so
//! corrupted pixels influence neither factor.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwmfParams {
    /// Number of smallest neighbor differences summed by ROAD.
    pub road_neighbors: usize,
    /// Bandwidth of the ROAD reliability weight.
    pub road_scale: f64,
    pub patch_side: usize,
    pub search_side: usize,
    /// Bandwidth of the patch similarity weight.
    pub patch_scale: f64,
    pub passes: usize,
}

impl Default for PwmfParams {
    fn default() -> Self {
        Self {
            road_neighbors: 4,
            road_scale: 40.0,
            patch_side: 3,
            search_side: 11,
            patch_scale: 5.0,
            passes: 2,
        }
    }
}

impl PwmfParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.road_neighbors == 0 || self.road_neighbors > 8 {
            return bad(format!(
                "road_neighbors = {} must be in 1..=8",
                self.road_neighbors
            ));
        }
        if !(self.road_scale > 0.0 && self.road_scale.is_finite()) {
            return bad(format!("road_scale = {} must be positive", self.road_scale));
        }
        if !(self.patch_scale > 0.0 && self.patch_scale.is_finite()) {
            return bad(format!(
                "patch_scale = {} must be positive",
                self.patch_scale
            ));
        }
        if self.patch_side == 0 || self.search_side == 0 || self.passes == 0 {
            return bad("patch_side, search_side and passes must be positive".into());
        }
        if self.search_side < self.patch_side {
            return bad(format!(
                "search_side = {} is smaller than patch_side = {}",
                self.search_side, self.patch_side
            ));
        }
        Ok(())
    }
}

/// Mirror reflection without repeating the edge sample (`-1 -> 1`).
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// ROAD statistic at `pos` using the `neighbors` smallest of the 8 absolute
/// differences. Borders are mirror-reflected.
pub fn road(img: &GrayImage, pos: (usize, usize), neighbors: usize) -> f64 {
    let (h, w) = (img.height(), img.width());
    let center = img.get(pos.0, pos.1);
    let mut diffs = [0.0f64; 8];
    for (slot, (dr, dc)) in diffs.iter_mut().zip(NEIGHBORS) {
        let r = reflect(pos.0 as isize + dr, h);
        let c = reflect(pos.1 as isize + dc, w);
        *slot = (center - img.get(r, c)).abs();
    }
    diffs.sort_unstable_by(f64::total_cmp);
    diffs[..neighbors.min(8)].iter().sum()
}

/// ROAD at every pixel, row-major.
pub fn road_map(img: &GrayImage, neighbors: usize) -> Vec<f64> {
    let w = img.width();
    (0..img.len())
        .into_par_iter()
        .map(|i| road(img, (i / w, i % w), neighbors))
        .collect()
}

/// Image padded by `pad` mirrored pixels on every side.
struct Padded {
    stride: usize,
    pad: usize,
    values: Vec<f64>,
}

impl Padded {
    fn new(values: &[f64], width: usize, height: usize, pad: usize) -> Self {
        let stride = width + 2 * pad;
        let mut out = Vec::with_capacity(stride * (height + 2 * pad));
        for r in 0..height + 2 * pad {
            let sr = reflect(r as isize - pad as isize, height);
            for c in 0..stride {
                let sc = reflect(c as isize - pad as isize, width);
                out.push(values[sr * width + sc]);
            }
        }
        Self {
            stride,
            pad,
            values: out,
        }
    }

    /// Index of image pixel `(r, c)` shifted by `(dr, dc)`, `|d| <= pad`.
    #[inline]
    fn at(&self, r: usize, c: usize, dr: isize, dc: isize) -> f64 {
        let pr = (r + self.pad) as isize + dr;
        let pc = (c + self.pad) as isize + dc;
        self.values[pr as usize * self.stride + pc as usize]
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn filter_pass(img: &GrayImage, params: &PwmfParams) -> Result<GrayImage> {
    let (w, h) = (img.width(), img.height());
    let rel_denom = 2.0 * params.road_scale * params.road_scale;
    let sim_denom = 2.0 * params.patch_scale * params.patch_scale;
    let reliability: Vec<f64> = road_map(img, params.road_neighbors)
        .into_iter()
        .map(|r| (-(r * r) / rel_denom).exp())
        .collect();

    let half_patch = (params.patch_side / 2) as isize;
    let lo_patch = -half_patch;
    let hi_patch = params.patch_side as isize - 1 - half_patch;
    let half_search = params.search_side / 2;
    let search_hi = params.search_side - 1 - half_search;
    let pad = half_patch.max(hi_patch) as usize;
    let values = Padded::new(img.pixels(), w, h, pad);
    let rel = Padded::new(&reliability, w, h, pad);

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        let mut window = Vec::with_capacity(params.search_side * params.search_side);
        for (c, slot) in row.iter_mut().enumerate() {
            let (r0, r1) = (r.saturating_sub(half_search), (r + search_hi).min(h - 1));
            let (c0, c1) = (c.saturating_sub(half_search), (c + search_hi).min(w - 1));
            let mut num = 0.0;
            let mut den = 0.0;
            for yr in r0..=r1 {
                for yc in c0..=c1 {
                    let mut wsum = 0.0;
                    let mut wdist = 0.0;
                    let mut plain = 0.0;
                    for dr in lo_patch..=hi_patch {
                        for dc in lo_patch..=hi_patch {
                            let diff = values.at(r, c, dr, dc) - values.at(yr, yc, dr, dc);
                            let wt = rel.at(r, c, dr, dc) * rel.at(yr, yc, dr, dc);
                            wsum += wt;
                            wdist += wt * diff * diff;
                            plain += diff * diff;
                        }
                    }
                    let dist = if wsum > 1e-12 {
                        wdist / wsum
                    } else {
                        plain / (params.patch_side * params.patch_side) as f64
                    };
                    let weight = reliability[yr * w + yc] * (-dist / sim_denom).exp();
                    num += weight * img.get(yr, yc);
                    den += weight;
                }
            }
            *slot = if den >= 1e-12 {
                num / den
            } else {
                window.clear();
                for yr in r0..=r1 {
                    window.extend_from_slice(&img.pixels()[yr * w + c0..=yr * w + c1]);
                }
                median(&mut window)
            };
        }
    });
    GrayImage::new(w, h, out)
}

/// Runs `params.passes` filtering passes, recomputing ROAD before each.
pub fn pwmf(img: &GrayImage, params: &PwmfParams) -> Result<GrayImage> {
    params.validate()?;
    if img.width() < params.search_side || img.height() < params.search_side {
        return Err(Error::InfeasibleGeometry(format!(
            "image {}x{} is smaller than the {s}x{s} search window",
            img.width(),
            img.height(),
            s = params.search_side
        )));
    }
    let mut current = img.clone();
    for _ in 0..params.passes {
        current = filter_pass(&current, params)?;
    }
    Ok(current)
}

//! Patch geometry, block matching, similarity matrices and overlapping
//! aggregation.
//!
//! Positions are `(row, col)` of a patch's top-left corner. A patch of side
//! `d` is vectorized column by column, so entry `k` of a column holds pixel
//! `(row + k % d, col + k / d)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub type Position = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGeometry {
    /// Patch side.
    pub patch: usize,
    /// Search window side.
    pub window: usize,
    /// Number of patches per group.
    pub group: usize,
    /// Step between reference patches.
    pub stride: usize,
}

impl Default for PatchGeometry {
    fn default() -> Self {
        Self {
            patch: 7,
            window: 43,
            group: 245,
            stride: 4,
        }
    }
}

impl PatchGeometry {
    pub fn new(patch: usize, window: usize, group: usize, stride: usize) -> Result<Self> {
        let g = Self {
            patch,
            window,
            group,
            stride,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch == 0 || self.window == 0 || self.group == 0 || self.stride == 0 {
            return Err(Error::InvalidParameter(format!(
                "patch geometry fields must be positive: {self:?}"
            )));
        }
        if self.window < self.patch {
            return Err(Error::InvalidParameter(format!(
                "search window {} is smaller than patch side {}",
                self.window, self.patch
            )));
        }
        let per_axis = self.window - self.patch + 1;
        if self.group > per_axis * per_axis {
            return Err(Error::InvalidParameter(format!(
                "group size {} exceeds the {} candidates of a {}x{} window",
                self.group,
                per_axis * per_axis,
                self.window,
                self.window
            )));
        }
        Ok(())
    }

    /// Rows of a similarity matrix (`d²`).
    pub fn patch_len(&self) -> usize {
        self.patch * self.patch
    }

    /// Inclusive range of top-left coordinates whose patch fits in the
    /// search window around a reference at `start` on an axis of length `len`.
    fn candidate_range(&self, start: usize, len: usize) -> (usize, usize) {
        let center = start + (self.patch - 1) / 2;
        let lo = center.saturating_sub((self.window - 1) / 2);
        let hi = (center + self.window / 2).min(len - 1);
        (lo, hi + 1 - self.patch)
    }

    /// Checks that every reference of an image of this size can gather a
    /// full group.
    pub fn check_feasible(&self, width: usize, height: usize) -> Result<()> {
        self.validate()?;
        if width < self.patch || height < self.patch {
            return Err(Error::InfeasibleGeometry(format!(
                "image {width}x{height} is smaller than the {0}x{0} patch",
                self.patch
            )));
        }
        let fewest = |len: usize| {
            axis_starts(len, self.patch, self.stride)
                .into_iter()
                .map(|s| {
                    let (lo, hi) = self.candidate_range(s, len);
                    hi - lo + 1
                })
                .min()
                .unwrap_or(0)
        };
        let available = fewest(height) * fewest(width);
        if available < self.group {
            return Err(Error::InfeasibleGeometry(format!(
                "group size m = {} needs at least that many candidate patches, but a \
                 {width}x{height} image offers only {available} inside the {w}x{w} window \
                 with patch side d = {}",
                self.group,
                self.patch,
                w = self.window
            )));
        }
        Ok(())
    }
}

fn axis_starts(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    let last = len - patch;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Top-left corners of the reference patches in row-major order.
///
/// Each axis is sampled at `0, stride, 2·stride, …` and always includes the
/// last position `len - d`, so the patches cover every pixel.
pub fn reference_grid(width: usize, height: usize, geom: &PatchGeometry) -> Result<Vec<Position>> {
    if geom.patch == 0 || geom.stride == 0 {
        return Err(Error::InvalidParameter(
            "patch side and stride must be positive".into(),
        ));
    }
    if width < geom.patch || height < geom.patch {
        return Err(Error::InfeasibleGeometry(format!(
            "image {width}x{height} is smaller than the {0}x{0} patch",
            geom.patch
        )));
    }
    let rows = axis_starts(height, geom.patch, geom.stride);
    let cols = axis_starts(width, geom.patch, geom.stride);
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect())
}

fn check_position(img: &GrayImage, pos: Position, d: usize) -> Result<()> {
    if pos.0 + d > img.height() || pos.1 + d > img.width() {
        return Err(Error::OutOfBounds {
            row: pos.0,
            col: pos.1,
            side: d,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(())
}

#[inline]
fn patch_distance(img: &GrayImage, a: Position, b: Position, d: usize) -> f64 {
    let w = img.width();
    let px = img.pixels();
    let mut acc = 0.0;
    for i in 0..d {
        let ra = &px[(a.0 + i) * w + a.1..][..d];
        let rb = &px[(b.0 + i) * w + b.1..][..d];
        for (x, y) in ra.iter().zip(rb) {
            let diff = x - y;
            acc += diff * diff;
        }
    }
    acc
}

/// Finds the `m` patches closest to the reference within its search window.
///
/// The window is `M×M`, centered on the reference patch center and clipped to
/// the image. The reference itself is always first; the remaining `m - 1`
/// members are the other candidates sorted by squared Euclidean distance,
/// ties broken by raster order.
pub fn block_match(
    guide: &GrayImage,
    reference: Position,
    geom: &PatchGeometry,
) -> Result<Vec<Position>> {
    geom.validate()?;
    let d = geom.patch;
    check_position(guide, reference, d)?;
    let (r0, r1) = geom.candidate_range(reference.0, guide.height());
    let (c0, c1) = geom.candidate_range(reference.1, guide.width());
    let available = (r1 - r0 + 1) * (c1 - c0 + 1);
    if available < geom.group {
        return Err(Error::InfeasibleGeometry(format!(
            "reference ({}, {}) has {available} candidates, fewer than m = {}",
            reference.0, reference.1, geom.group
        )));
    }

    let mut candidates: Vec<(f64, Position)> = Vec::with_capacity(available - 1);
    for r in r0..=r1 {
        for c in c0..=c1 {
            if (r, c) != reference {
                candidates.push((patch_distance(guide, reference, (r, c), d), (r, c)));
            }
        }
    }
    let order = |a: &(f64, Position), b: &(f64, Position)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let keep = geom.group - 1;
    if keep > 0 && keep < candidates.len() {
        candidates.select_nth_unstable_by(keep - 1, order);
        candidates.truncate(keep);
    }
    candidates.truncate(keep);
    candidates.sort_unstable_by(order);

    let mut members = Vec::with_capacity(geom.group);
    members.push(reference);
    members.extend(candidates.into_iter().map(|(_, p)| p));
    Ok(members)
}

/// Stacks the column-major vectorized patches at `members` into a
/// `d² × members.len()` matrix.
pub fn build_similarity_matrix(
    img: &GrayImage,
    members: &[Position],
    d: usize,
) -> Result<DMatrix<f64>> {
    for &p in members {
        check_position(img, p, d)?;
    }
    let w = img.width();
    let px = img.pixels();
    let mut data = Vec::with_capacity(d * d * members.len());
    for &(r, c) in members {
        for j in 0..d {
            for i in 0..d {
                data.push(px[(r + i) * w + c + j]);
            }
        }
    }
    Ok(DMatrix::from_vec(d * d, members.len(), data))
}

/// A reference patch, its matched positions and their stacked pixel values.
#[derive(Debug, Clone)]
pub struct SimilarityGroup {
    pub reference: Position,
    pub members: Vec<Position>,
    pub matrix: DMatrix<f64>,
}

impl SimilarityGroup {
    /// Matches on `guide`, reads values from `img`.
    pub fn gather(
        guide: &GrayImage,
        img: &GrayImage,
        reference: Position,
        geom: &PatchGeometry,
    ) -> Result<Self> {
        guide.check_same_shape(img)?;
        let members = block_match(guide, reference, geom)?;
        let matrix = build_similarity_matrix(img, &members, geom.patch)?;
        Ok(Self {
            reference,
            members,
            matrix,
        })
    }

    pub fn patch_side(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize
    }
}

/// Per-pixel running sums of patch estimates.
///
/// Each pixel stores its first contribution and the sum of later
/// contributions' offsets from it, so averaging identical estimates returns
/// that value bit-exactly.
#[derive(Debug, Clone)]
pub struct AggregationBuffer {
    width: usize,
    height: usize,
    base: Vec<f64>,
    offset: Vec<f64>,
    count: Vec<u32>,
}

impl AggregationBuffer {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            base: vec![0.0; width * height],
            offset: vec![0.0; width * height],
            count: vec![0; width * height],
        }
    }

    /// Total of all contributions per pixel.
    pub fn sum(&self) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.offset)
            .zip(&self.count)
            .map(|((b, o), &c)| b * f64::from(c) + o)
            .collect()
    }

    pub fn count(&self) -> &[u32] {
        &self.count
    }

    #[inline]
    fn add(&mut self, idx: usize, value: f64) {
        if self.count[idx] == 0 {
            self.base[idx] = value;
        } else {
            self.offset[idx] += value - self.base[idx];
        }
        self.count[idx] += 1;
    }

    /// Adds one `d×d` patch estimate, given as a column-major vector.
    pub fn add_patch(&mut self, pos: Position, d: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), d * d);
        for j in 0..d {
            for i in 0..d {
                self.add((pos.0 + i) * self.width + pos.1 + j, values[j * d + i]);
            }
        }
    }
}

/// Accumulates every column of `denoised` at the position of the matching
/// group member.
pub fn scatter_group(
    group: &SimilarityGroup,
    denoised: &DMatrix<f64>,
    buf: &mut AggregationBuffer,
) -> Result<()> {
    scatter_members(&group.members, denoised, buf)
}

pub(crate) fn scatter_members(
    members: &[Position],
    denoised: &DMatrix<f64>,
    buf: &mut AggregationBuffer,
) -> Result<()> {
    let d = (denoised.nrows() as f64).sqrt().round() as usize;
    if d * d != denoised.nrows() || denoised.ncols() != members.len() {
        return Err(Error::InvalidParameter(format!(
            "denoised matrix is {}x{} but the group has {} members",
            denoised.nrows(),
            denoised.ncols(),
            members.len()
        )));
    }
    for (j, &pos) in members.iter().enumerate() {
        if pos.0 + d > buf.height || pos.1 + d > buf.width {
            return Err(Error::OutOfBounds {
                row: pos.0,
                col: pos.1,
                side: d,
                width: buf.width,
                height: buf.height,
            });
        }
        buf.add_patch(pos, d, denoised.column(j).as_slice());
    }
    Ok(())
}

/// Per-pixel mean of the accumulated estimates.
pub fn finalize(buf: &AggregationBuffer) -> Result<GrayImage> {
    if let Some(i) = buf.count.iter().position(|&c| c == 0) {
        return Err(Error::Coverage {
            row: i / buf.width,
            col: i % buf.width,
        });
    }
    let pixels = buf
        .base
        .iter()
        .zip(&buf.offset)
        .zip(&buf.count)
        .map(|((b, o), &c)| b + o / f64::from(c))
        .collect();
    GrayImage::new(buf.width, buf.height, pixels)
}

//! Block-matching motion estimation under the mean-absolute-difference
//! criterion with a two-parameter (translational) motion model.
//!
//! Blocks are laid on the reference frame. A vector `v` for the block at
//! `p` says that the block's pixels are found at `p + v` in the target, which
//! is also where the writing predictor puts them. Candidates whose displaced
//! footprint leaves the target are never considered; frames are not padded.
//!
//! Two searches are provided. [`full_search`] scans every candidate and is the
//! reference answer. [`conjugate_direction_search`] is a one-axis-at-a-time
//! descent from the zero vector: it walks `dx` in unit steps while the error
//! strictly drops, then `dy`, and repeats that pair of line searches a bounded
//! number of times. It can stop in a local minimum, so its error is never below
//! the full search's.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{validate_geometry, Frame, GridGeometry};

/// Integer displacement of a block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        MotionVector { dx, dy }
    }

    /// Largest absolute component.
    pub fn magnitude(self) -> u32 {
        self.dx.unsigned_abs().max(self.dy.unsigned_abs())
    }

    /// Chebyshev distance.
    pub fn distance(self, other: MotionVector) -> u32 {
        (self.dx - other.dx)
            .unsigned_abs()
            .max((self.dy - other.dy).unsigned_abs())
    }

    pub fn within(self, d_max: u32) -> bool {
        self.magnitude() <= d_max
    }
}

impl std::fmt::Display for MotionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.dx, self.dy)
    }
}

/// One vector per base block, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotionField {
    geom: GridGeometry,
    d_max: u32,
    vectors: Vec<MotionVector>,
}

impl MotionField {
    pub fn new(geom: GridGeometry, d_max: u32, vectors: Vec<MotionVector>) -> Result<Self> {
        if vectors.len() != geom.base_blocks() {
            return Err(Error::GeometryMismatch(format!(
                "{} vectors for {} base blocks",
                vectors.len(),
                geom.base_blocks()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| !v.within(d_max)) {
            return Err(Error::InvalidParameter(format!("vector {v} exceeds d_max {d_max}")));
        }
        Ok(MotionField { geom, d_max, vectors })
    }

    pub fn uniform(geom: GridGeometry, d_max: u32, v: MotionVector) -> Result<Self> {
        MotionField::new(geom, d_max, vec![v; geom.base_blocks()])
    }

    pub fn zero(geom: GridGeometry, d_max: u32) -> Self {
        MotionField {
            geom,
            d_max,
            vectors: vec![MotionVector::ZERO; geom.base_blocks()],
        }
    }

    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn vectors(&self) -> &[MotionVector] {
        &self.vectors
    }

    /// Vector of the base block in column `bx`, row `by`.
    pub fn at(&self, bx: usize, by: usize) -> MotionVector {
        self.vectors[by * self.geom.blocks_x() + bx]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    ConjugateDirection,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub d_max: u32,
    pub mode: SearchMode,
    pub max_refinement_passes: u32,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            d_max: 7,
            mode: SearchMode::ConjugateDirection,
            max_refinement_passes: 2,
        }
    }
}

impl SearchParams {
    pub fn full(d_max: u32) -> Self {
        SearchParams {
            d_max,
            mode: SearchMode::Full,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_refinement_passes == 0 {
            return Err(Error::InvalidParameter("max_refinement_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of a block search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockMatch {
    pub vector: MotionVector,
    /// Sum of absolute differences at `vector`.
    pub sad: u64,
    pub mad: f64,
}

/// A square block of `reference` at `origin` compared against `target`.
#[derive(Clone, Copy)]
struct BlockProbe<'a> {
    reference: &'a Frame,
    target: &'a Frame,
    x: usize,
    y: usize,
    size: usize,
}

impl<'a> BlockProbe<'a> {
    fn new(reference: &'a Frame, target: &'a Frame, origin: (usize, usize), size: usize) -> Result<Self> {
        reference.same_dims(target)?;
        let (x, y) = origin;
        if size == 0 || x + size > reference.width() || y + size > reference.height() {
            return Err(Error::OutOfBounds);
        }
        Ok(BlockProbe {
            reference,
            target,
            x,
            y,
            size,
        })
    }

    fn fits(&self, v: MotionVector) -> bool {
        let tx = self.x as i64 + v.dx as i64;
        let ty = self.y as i64 + v.dy as i64;
        tx >= 0
            && ty >= 0
            && tx as usize + self.size <= self.target.width()
            && ty as usize + self.size <= self.target.height()
    }

    /// SAD at `v`, or `None` when the footprint leaves the target.
    fn sad(&self, v: MotionVector) -> Option<u64> {
        if !self.fits(v) {
            return None;
        }
        let tx = (self.x as i64 + v.dx as i64) as usize;
        let ty = (self.y as i64 + v.dy as i64) as usize;
        let mut sum = 0u64;
        for row in 0..self.size {
            let r = &self.reference.row(self.y + row)[self.x..self.x + self.size];
            let t = &self.target.row(ty + row)[tx..tx + self.size];
            sum += r
                .iter()
                .zip(t)
                .map(|(&a, &b)| a.abs_diff(b) as u64)
                .sum::<u64>();
        }
        Some(sum)
    }

    fn area(&self) -> f64 {
        (self.size * self.size) as f64
    }

    fn result(&self, vector: MotionVector, sad: u64) -> BlockMatch {
        BlockMatch {
            vector,
            sad,
            mad: sad as f64 / self.area(),
        }
    }
}

/// Mean absolute difference between the `size`×`size` reference block at
/// `origin` and the target block displaced by `v`.
pub fn block_mad(reference: &Frame, target: &Frame, origin: (usize, usize), size: usize, v: MotionVector) -> Result<f64> {
    let probe = BlockProbe::new(reference, target, origin, size)?;
    let sad = probe.sad(v).ok_or(Error::OutOfBounds)?;
    Ok(sad as f64 / probe.area())
}

/// Ordering key for the exhaustive search: error, then magnitude, then
/// `dy`, then `dx`.
fn tie_key(sad: u64, v: MotionVector) -> (u64, u32, i32, i32) {
    (sad, v.dx.unsigned_abs() + v.dy.unsigned_abs(), v.dy, v.dx)
}

/// Exhaustive search over every in-bounds candidate with both components in
/// `[-d_max, d_max]`.
pub fn full_search(
    reference: &Frame,
    target: &Frame,
    origin: (usize, usize),
    size: usize,
    params: &SearchParams,
) -> Result<BlockMatch> {
    let probe = BlockProbe::new(reference, target, origin, size)?;
    let d = params.d_max as i32;
    let mut best: Option<(u64, MotionVector)> = None;
    for dy in -d..=d {
        for dx in -d..=d {
            let v = MotionVector::new(dx, dy);
            let Some(sad) = probe.sad(v) else { continue };
            if best.is_none_or(|(bs, bv)| tie_key(sad, v) < tie_key(bs, bv)) {
                best = Some((sad, v));
            }
        }
    }
    // The zero vector is always in bounds, so there is at least one candidate.
    let (sad, v) = best.expect("zero vector is always a candidate");
    Ok(probe.result(v, sad))
}

/// Axis-wise descent starting from the zero vector.
pub fn conjugate_direction_search(
    reference: &Frame,
    target: &Frame,
    origin: (usize, usize),
    size: usize,
    params: &SearchParams,
) -> Result<BlockMatch> {
    params.validate()?;
    let probe = BlockProbe::new(reference, target, origin, size)?;
    let d = params.d_max as i32;
    let eval = |v: MotionVector| {
        if v.dx.abs() > d || v.dy.abs() > d {
            None
        } else {
            probe.sad(v)
        }
    };

    let mut cur = MotionVector::ZERO;
    let mut cur_sad = eval(cur).expect("zero vector is always a candidate");

    for _ in 0..params.max_refinement_passes {
        let start = cur;
        for axis in [Axis::X, Axis::Y] {
            // Pick the better of the two unit steps, if either improves.
            let mut dir = None;
            for step in [1, -1] {
                let cand = axis.step(cur, step);
                if let Some(s) = eval(cand) {
                    if s < cur_sad && dir.is_none_or(|(_, ds)| s < ds) {
                        dir = Some((step, s));
                    }
                }
            }
            let Some((step, s)) = dir else { continue };
            cur = axis.step(cur, step);
            cur_sad = s;
            loop {
                let cand = axis.step(cur, step);
                match eval(cand) {
                    Some(s) if s < cur_sad => {
                        cur = cand;
                        cur_sad = s;
                    }
                    _ => break,
                }
            }
        }
        if cur == start {
            break;
        }
    }
    Ok(probe.result(cur, cur_sad))
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

impl Axis {
    fn step(self, v: MotionVector, by: i32) -> MotionVector {
        match self {
            Axis::X => MotionVector::new(v.dx + by, v.dy),
            Axis::Y => MotionVector::new(v.dx, v.dy + by),
        }
    }
}

pub fn search_block(
    reference: &Frame,
    target: &Frame,
    origin: (usize, usize),
    size: usize,
    params: &SearchParams,
) -> Result<BlockMatch> {
    match params.mode {
        SearchMode::Full => full_search(reference, target, origin, size, params),
        SearchMode::ConjugateDirection => conjugate_direction_search(reference, target, origin, size, params),
    }
}

/// Estimates one vector per `min_block` square of the reference grid.
///
/// Blocks are searched in parallel; the result is ordered by block index.
pub fn estimate_field(reference: &Frame, target: &Frame, geom: &GridGeometry, params: &SearchParams) -> Result<MotionField> {
    validate_geometry(reference, geom)?;
    validate_geometry(target, geom)?;
    params.validate()?;
    let origins: Vec<_> = geom.block_origins().collect();
    let vectors = origins
        .par_iter()
        .map(|&o| search_block(reference, target, o, geom.min_block(), params).map(|m| m.vector))
        .collect::<Result<Vec<_>>>()?;
    MotionField::new(*geom, params.d_max, vectors)
}

/// Per-block matches (vector and error) for every base block.
pub fn estimate_matches(
    reference: &Frame,
    target: &Frame,
    geom: &GridGeometry,
    params: &SearchParams,
) -> Result<Vec<BlockMatch>> {
    validate_geometry(reference, geom)?;
    validate_geometry(target, geom)?;
    params.validate()?;
    let origins: Vec<_> = geom.block_origins().collect();
    origins
        .par_iter()
        .map(|&o| search_block(reference, target, o, geom.min_block(), params))
        .collect()
}

//! Inter/intra decisions coded jointly with block shape.
//!
//! Each base block is predicted either from the previous frame (inter,
//! carrying a vector) or from the current frame alone (intra). Blocks are
//! grouped bottom-up when four siblings share a predictor, and for inter
//! siblings also pass the vector merge policy.
//!
//! # Stream layout
//!
//! ```text
//! [flag]  `1` = quadtree follows, `0` = flat decision list follows
//! quadtree per root, preorder, children TL TR BL BR:
//!           above the base level: `1` split, `00` inter, `01` intra
//!           at the base level:    `0` inter, `1` intra
//! flat    one bit per base block in row-major order, `0` inter, `1` intra
//! vectors per inter terminal (or inter base block), dx dy, 4+4 bits
//! pad     zero bits up to the next byte
//! ```

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bits::{BitReader, BitWriter, Bitstream};
use crate::cost::CostReport;
use crate::error::{Error, Result};
use crate::frame::{validate_geometry, Frame, GridGeometry};
use crate::motion::{block_mad, MotionField, MotionVector};
use crate::quadtree::{get_vector, put_vector, quadrants, root_origins, MergePolicy, Spread};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    Inter,
    Intra,
}

/// Coding choice for a block or a merged cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Inter(MotionVector),
    Intra,
}

impl Mode {
    pub fn kind(self) -> PredictorKind {
        match self {
            Mode::Inter(_) => PredictorKind::Inter,
            Mode::Intra => PredictorKind::Intra,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub kind: PredictorKind,
    /// Present exactly for inter decisions.
    pub vector: Option<MotionVector>,
    pub inter_error: f64,
    pub intra_error: f64,
}

impl Decision {
    pub fn mode(&self) -> Mode {
        match self.vector {
            Some(v) => Mode::Inter(v),
            None => Mode::Intra,
        }
    }
}

/// Penalty applied to the intra error before comparing it with the inter
/// error: inter wins when `inter < P * intra`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyPolicy {
    base_p: f64,
    adaptive: bool,
    neighbor_bias: f64,
}

impl Default for PenaltyPolicy {
    fn default() -> Self {
        PenaltyPolicy {
            base_p: 1.2,
            adaptive: false,
            neighbor_bias: 1.25,
        }
    }
}

impl PenaltyPolicy {
    pub fn new(base_p: f64, adaptive: bool, neighbor_bias: f64) -> Result<Self> {
        if !base_p.is_finite() || base_p <= 1.0 {
            return Err(Error::InvalidParameter(format!("penalty must exceed 1, got {base_p}")));
        }
        if !neighbor_bias.is_finite() || neighbor_bias < 1.0 {
            return Err(Error::InvalidParameter(format!("neighbor bias must be >= 1, got {neighbor_bias}")));
        }
        Ok(PenaltyPolicy {
            base_p,
            adaptive,
            neighbor_bias,
        })
    }

    pub fn fixed(base_p: f64) -> Result<Self> {
        PenaltyPolicy::new(base_p, false, 1.25)
    }

    pub fn base_p(&self) -> f64 {
        self.base_p
    }

    pub fn adaptive(&self) -> bool {
        self.adaptive
    }

    pub fn neighbor_bias(&self) -> f64 {
        self.neighbor_bias
    }
}

/// MAD of a block against its own rounded mean.
pub fn intra_error_dc(target: &Frame, origin: (usize, usize), size: usize) -> Result<f64> {
    let (x0, y0) = origin;
    if size == 0 || x0 + size > target.width() || y0 + size > target.height() {
        return Err(Error::OutOfBounds);
    }
    let n = (size * size) as u64;
    let rows = || (y0..y0 + size).flat_map(|y| target.row(y)[x0..x0 + size].iter().copied());
    let sum: u64 = rows().map(u64::from).sum();
    let mean = ((sum + n / 2) / n) as u8;
    let sad: u64 = rows().map(|p| p.abs_diff(mean) as u64).sum();
    Ok(sad as f64 / n as f64)
}

pub fn decide_block(inter_error: f64, intra_error: f64, p: f64) -> Result<PredictorKind> {
    if p.is_nan() || p <= 1.0 {
        return Err(Error::InvalidParameter(format!("penalty must exceed 1, got {p}")));
    }
    Ok(if inter_error < p * intra_error {
        PredictorKind::Inter
    } else {
        PredictorKind::Intra
    })
}

/// Penalty for the next block of a sibling quad given the kinds already
/// chosen for earlier siblings.
///
/// A unanimous inter quad raises the penalty by `neighbor_bias`; a
/// unanimous intra quad lowers it by the same factor, never reaching 1.
pub fn effective_penalty(policy: &PenaltyPolicy, decided_siblings: &[PredictorKind]) -> f64 {
    if !policy.adaptive || decided_siblings.is_empty() {
        return policy.base_p;
    }
    if decided_siblings.iter().all(|k| *k == PredictorKind::Inter) {
        policy.base_p * policy.neighbor_bias
    } else if decided_siblings.iter().all(|k| *k == PredictorKind::Intra) {
        (policy.base_p / policy.neighbor_bias).max(1.0 + f64::EPSILON)
    } else {
        policy.base_p
    }
}

/// Decides every base block. Errors are computed in parallel; decisions
/// run in TL, TR, BL, BR order inside each 2×2 sibling quad.
pub fn decide_field(field: &MotionField, reference: &Frame, target: &Frame, policy: &PenaltyPolicy) -> Result<Vec<Decision>> {
    let geom = field.geom();
    validate_geometry(reference, geom)?;
    validate_geometry(target, geom)?;
    let size = geom.min_block();
    let origins: Vec<_> = geom.block_origins().collect();
    let errors = origins
        .par_iter()
        .zip(field.vectors().par_iter())
        .map(|(&o, &v)| Ok((block_mad(reference, target, o, size, v)?, intra_error_dc(target, o, size)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let bw = geom.blocks_x();
    let mut decisions: Vec<Option<Decision>> = vec![None; errors.len()];
    let groups: Vec<Vec<usize>> = if geom.levels() > 1 {
        (0..geom.blocks_y() / 2)
            .flat_map(|qy| (0..bw / 2).map(move |qx| (qx, qy)))
            .map(|(qx, qy)| {
                quadrants(2 * qx, 2 * qy, 1)
                    .iter()
                    .map(|&(x, y)| y * bw + x)
                    .collect()
            })
            .collect()
    } else {
        (0..errors.len()).map(|i| vec![i]).collect()
    };

    for group in groups {
        let mut kinds = Vec::with_capacity(4);
        for i in group {
            let (inter_error, intra_error) = errors[i];
            let p = effective_penalty(policy, &kinds);
            let kind = decide_block(inter_error, intra_error, p)?;
            kinds.push(kind);
            decisions[i] = Some(Decision {
                kind,
                vector: (kind == PredictorKind::Inter).then(|| field.vectors()[i]),
                inter_error,
                intra_error,
            });
        }
    }
    Ok(decisions.into_iter().map(|d| d.expect("every block decided")).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedNode {
    Split(Box<[MixedNode; 4]>),
    Leaf(Mode),
}

impl MixedNode {
    pub fn split(children: [MixedNode; 4]) -> Self {
        MixedNode::Split(Box::new(children))
    }

    fn leaf(&self) -> Option<Mode> {
        match self {
            MixedNode::Leaf(m) => Some(*m),
            MixedNode::Split(_) => None,
        }
    }

    fn for_each_leaf(&self, bx: usize, by: usize, span: usize, f: &mut impl FnMut(usize, usize, usize, Mode)) {
        match self {
            MixedNode::Leaf(m) => f(bx, by, span, *m),
            MixedNode::Split(children) => {
                let h = span / 2;
                for (c, (x, y)) in children.iter().zip(quadrants(bx, by, h)) {
                    c.for_each_leaf(x, y, h, f);
                }
            }
        }
    }

    fn is_well_formed(&self, span: usize) -> bool {
        match self {
            MixedNode::Leaf(_) => true,
            MixedNode::Split(c) => span > 1 && c.iter().all(|n| n.is_well_formed(span / 2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedForest {
    geom: GridGeometry,
    d_max: u32,
    roots: Vec<MixedNode>,
}

impl MixedForest {
    pub fn new(geom: GridGeometry, d_max: u32, roots: Vec<MixedNode>) -> Result<Self> {
        if roots.len() != geom.root_count() {
            return Err(Error::GeometryMismatch(format!(
                "{} roots for a {}-root grid",
                roots.len(),
                geom.root_count()
            )));
        }
        if !roots.iter().all(|r| r.is_well_formed(geom.root_span())) {
            return Err(Error::InvalidParameter("split below the base block level".into()));
        }
        Ok(MixedForest { geom, d_max, roots })
    }

    /// Groups per-block modes bottom-up.
    pub fn from_modes(geom: &GridGeometry, d_max: u32, modes: &[Mode], merge: MergePolicy) -> Result<Self> {
        if modes.len() != geom.base_blocks() {
            return Err(Error::GeometryMismatch(format!(
                "{} decisions for {} base blocks",
                modes.len(),
                geom.base_blocks()
            )));
        }
        let spread = |m: &Mode| match m {
            Mode::Inter(v) => Some(Spread::point(*v)),
            Mode::Intra => None,
        };
        let mut w = geom.blocks_x();
        let mut cells: Vec<Option<(MixedNode, Option<Spread>)>> =
            modes.iter().map(|m| Some((MixedNode::Leaf(*m), spread(m)))).collect();
        for _ in 1..geom.levels() {
            let nw = w / 2;
            let nh = cells.len() / w / 2;
            let mut next = Vec::with_capacity(nw * nh);
            for y in 0..nh {
                for x in 0..nw {
                    let group = [
                        2 * y * w + 2 * x,
                        2 * y * w + 2 * x + 1,
                        (2 * y + 1) * w + 2 * x,
                        (2 * y + 1) * w + 2 * x + 1,
                    ]
                    .map(|i| cells[i].take().expect("each cell used once"));
                    next.push(Some(merge_mixed(group, merge, d_max)));
                }
            }
            cells = next;
            w = nw;
        }
        MixedForest::new(*geom, d_max, cells.into_iter().map(|c| c.expect("root").0).collect())
    }

    /// A forest with one leaf per base block.
    pub fn unmerged(geom: &GridGeometry, d_max: u32, modes: &[Mode]) -> Result<Self> {
        if modes.len() != geom.base_blocks() {
            return Err(Error::GeometryMismatch(format!(
                "{} decisions for {} base blocks",
                modes.len(),
                geom.base_blocks()
            )));
        }
        let bw = geom.blocks_x();
        fn build(modes: &[Mode], bw: usize, bx: usize, by: usize, span: usize) -> MixedNode {
            if span == 1 {
                return MixedNode::Leaf(modes[by * bw + bx]);
            }
            let h = span / 2;
            MixedNode::split(quadrants(bx, by, h).map(|(x, y)| build(modes, bw, x, y, h)))
        }
        let span = geom.root_span();
        let roots = root_origins(geom).map(|(x, y)| build(modes, bw, x, y, span)).collect();
        MixedForest::new(*geom, d_max, roots)
    }

    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn roots(&self) -> &[MixedNode] {
        &self.roots
    }

    pub fn for_each_leaf(&self, mut f: impl FnMut(usize, usize, usize, Mode)) {
        let span = self.geom.root_span();
        for (root, (x, y)) in self.roots.iter().zip(root_origins(&self.geom)) {
            root.for_each_leaf(x, y, span, &mut f);
        }
    }

    /// Per-base-block modes, row-major.
    pub fn flatten(&self) -> Vec<Mode> {
        let bw = self.geom.blocks_x();
        let mut out = vec![Mode::Intra; self.geom.base_blocks()];
        self.for_each_leaf(|bx, by, span, m| {
            for y in by..by + span {
                out[y * bw + bx..y * bw + bx + span].fill(m);
            }
        });
        out
    }
}

fn merge_mixed(
    group: [(MixedNode, Option<Spread>); 4],
    merge: MergePolicy,
    d_max: u32,
) -> (MixedNode, Option<Spread>) {
    let leaves: Option<Vec<Mode>> = group.iter().map(|c| c.0.leaf()).collect();
    if let Some(leaves) = leaves {
        if leaves.iter().all(|m| *m == Mode::Intra) {
            return (MixedNode::Leaf(Mode::Intra), None);
        }
        let reps: Option<Vec<MotionVector>> = leaves
            .iter()
            .map(|m| match m {
                Mode::Inter(v) => Some(*v),
                Mode::Intra => None,
            })
            .collect();
        if let Some(reps) = reps {
            let spreads: Vec<Spread> = group.iter().map(|c| c.1.expect("inter cells carry a spread")).collect();
            if let Some((v, s)) = merge.merge(&reps, &spreads, d_max) {
                return (MixedNode::Leaf(Mode::Inter(v)), Some(s));
            }
        }
    }
    let union = group.iter().filter_map(|c| c.1).reduce(Spread::union);
    (MixedNode::split(group.map(|c| c.0)), union)
}

/// Decides every base block and groups the decisions.
pub fn build_mixed(
    field: &MotionField,
    reference: &Frame,
    target: &Frame,
    geom: &GridGeometry,
    policy: &PenaltyPolicy,
    merge: MergePolicy,
) -> Result<MixedForest> {
    if field.geom() != geom {
        return Err(Error::GeometryMismatch("field grid differs from requested grid".into()));
    }
    let decisions = decide_field(field, reference, target, policy)?;
    let modes: Vec<Mode> = decisions.iter().map(Decision::mode).collect();
    MixedForest::from_modes(geom, field.d_max(), &modes, merge)
}

fn put_mixed_tree(w: &mut BitWriter, node: &MixedNode, span: usize) {
    match node {
        MixedNode::Leaf(m) => {
            if span > 1 {
                w.put_bit(false);
            }
            w.put_bit(*m == Mode::Intra);
        }
        MixedNode::Split(children) => {
            w.put_bit(true);
            for c in children.iter() {
                put_mixed_tree(w, c, span / 2);
            }
        }
    }
}

fn mixed_tree_bits(node: &MixedNode, span: usize) -> usize {
    match node {
        MixedNode::Leaf(_) if span == 1 => 1,
        MixedNode::Leaf(_) => 2,
        MixedNode::Split(c) => 1 + c.iter().map(|n| mixed_tree_bits(n, span / 2)).sum::<usize>(),
    }
}

fn put_inter_vectors(w: &mut BitWriter, modes: impl IntoIterator<Item = Mode>) -> Result<()> {
    for m in modes {
        if let Mode::Inter(v) = m {
            put_vector(w, v)?;
        }
    }
    Ok(())
}

/// Quadtree form. With `with_flag` a leading `1` marks the quadtree path.
pub fn encode_mixed(forest: &MixedForest, with_flag: bool) -> Result<Bitstream> {
    let mut w = BitWriter::new();
    if with_flag {
        w.put_bit(true);
    }
    let span = forest.geom.root_span();
    for root in &forest.roots {
        put_mixed_tree(&mut w, root, span);
    }
    let mut leaves = Vec::new();
    forest.for_each_leaf(|_, _, _, m| leaves.push(m));
    put_inter_vectors(&mut w, leaves)?;
    Ok(w.finish())
}

/// Flat form: flag `0`, one decision bit per base block, then one vector
/// per inter base block. Decodes to the unmerged forest.
pub fn encode_mixed_flat(forest: &MixedForest) -> Result<Bitstream> {
    let modes = forest.flatten();
    let mut w = BitWriter::new();
    w.put_bit(false);
    for m in &modes {
        w.put_bit(*m == Mode::Intra);
    }
    put_inter_vectors(&mut w, modes)?;
    Ok(w.finish())
}

/// Flagged stream using whichever of the quadtree and flat forms is
/// shorter; ties keep the quadtree.
pub fn encode_mixed_auto(forest: &MixedForest) -> Result<Bitstream> {
    let tree = encode_mixed(forest, true)?;
    let flat = encode_mixed_flat(forest)?;
    Ok(if flat.bit_len() < tree.bit_len() { flat } else { tree })
}

fn get_mixed_tree(r: &mut BitReader<'_>, span: usize) -> Result<MixedNode> {
    if span > 1 && r.bit()? {
        let h = span / 2;
        return Ok(MixedNode::split([
            get_mixed_tree(r, h)?,
            get_mixed_tree(r, h)?,
            get_mixed_tree(r, h)?,
            get_mixed_tree(r, h)?,
        ]));
    }
    Ok(MixedNode::Leaf(if r.bit()? {
        Mode::Intra
    } else {
        Mode::Inter(MotionVector::ZERO)
    }))
}

fn fill_mixed(node: &mut MixedNode, r: &mut BitReader<'_>, d_max: u32) -> Result<()> {
    match node {
        MixedNode::Leaf(Mode::Inter(v)) => *v = get_vector(r, d_max)?,
        MixedNode::Leaf(Mode::Intra) => {}
        MixedNode::Split(children) => {
            for c in children.iter_mut() {
                fill_mixed(c, r, d_max)?;
            }
        }
    }
    Ok(())
}

pub fn decode_mixed(bits: &Bitstream, geom: &GridGeometry, d_max: u32, with_flag: bool) -> Result<MixedForest> {
    let mut r = BitReader::new(bits.bytes());
    if with_flag && !r.bit()? {
        let mut modes = (0..geom.base_blocks())
            .map(|_| Ok(if r.bit()? { Mode::Intra } else { Mode::Inter(MotionVector::ZERO) }))
            .collect::<Result<Vec<_>>>()?;
        for m in &mut modes {
            if let Mode::Inter(v) = m {
                *v = get_vector(&mut r, d_max)?;
            }
        }
        r.finish()?;
        return MixedForest::unmerged(geom, d_max, &modes);
    }
    let span = geom.root_span();
    let mut roots = (0..geom.root_count())
        .map(|_| get_mixed_tree(&mut r, span))
        .collect::<Result<Vec<_>>>()?;
    for root in &mut roots {
        fill_mixed(root, &mut r, d_max)?;
    }
    r.finish()?;
    MixedForest::new(*geom, d_max, roots)
}

/// Overhead accounting: flag and tree bits against one decision bit per
/// base block. Vector bytes are reported but do not enter the ratio.
pub fn mixed_cost_report(forest: &MixedForest, with_flag: bool) -> CostReport {
    let geom = forest.geom;
    let mut counts = BTreeMap::new();
    let mut inter = 0;
    forest.for_each_leaf(|_, _, span, m| {
        *counts.entry(span * geom.min_block()).or_insert(0) += 1;
        inter += matches!(m, Mode::Inter(_)) as usize;
    });
    let span = geom.root_span();
    let tree = forest.roots.iter().map(|r| mixed_tree_bits(r, span)).sum();
    CostReport::decisions(geom.min_block(), counts, tree, inter, with_flag as usize, geom.base_blocks())
}

/// Best case: every root one terminal. Worst case: every root split to the
/// base level.
pub fn mixed_bounds(geom: &GridGeometry, with_flag: bool) -> (CostReport, CostReport) {
    let modes = vec![Mode::Inter(MotionVector::ZERO); geom.base_blocks()];
    let best = MixedForest::from_modes(geom, 7, &modes, MergePolicy::Exact).expect("matching geometry");
    let worst = MixedForest::unmerged(geom, 7, &modes).expect("matching geometry");
    (mixed_cost_report(&best, with_flag), mixed_cost_report(&worst, with_flag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g64() -> GridGeometry {
        GridGeometry::new(64, 64, 16, 64).unwrap()
    }

    #[test]
    fn dc_error_examples() {
        let f = Frame::new(2, 2, vec![0, 0, 255, 255]).unwrap();
        assert_eq!(intra_error_dc(&f, (0, 0), 2).unwrap(), 127.5);
        let c = Frame::filled(4, 4, 77).unwrap();
        assert_eq!(intra_error_dc(&c, (0, 0), 4).unwrap(), 0.0);
        assert_eq!(intra_error_dc(&f, (1, 1), 1).unwrap(), 0.0);
        assert!(intra_error_dc(&f, (1, 1), 2).is_err());
    }

    #[test]
    fn decision_examples() {
        assert_eq!(decide_block(5.0, 4.0, 1.5).unwrap(), PredictorKind::Inter);
        assert_eq!(decide_block(6.0, 4.0, 1.5).unwrap(), PredictorKind::Intra);
        assert_eq!(decide_block(0.0, 0.0, 1.5).unwrap(), PredictorKind::Intra);
        assert!(decide_block(1.0, 1.0, 1.0).is_err());
        assert!(decide_block(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn penalty_rules() {
        use PredictorKind::*;
        let off = PenaltyPolicy::default();
        assert_eq!(effective_penalty(&off, &[Inter, Inter, Inter]), 1.2);
        let on = PenaltyPolicy::new(1.2, true, 1.25).unwrap();
        assert_eq!(effective_penalty(&on, &[]), 1.2);
        assert!((effective_penalty(&on, &[Inter, Inter, Inter]) - 1.5).abs() < 1e-12);
        assert_eq!(effective_penalty(&on, &[Inter, Intra]), 1.2);
        assert!((effective_penalty(&on, &[Intra]) - 0.96f64.max(1.0 + f64::EPSILON)).abs() < 1e-12);
        let big = PenaltyPolicy::new(2.0, true, 1.25).unwrap();
        assert!((effective_penalty(&big, &[Intra, Intra]) - 1.6).abs() < 1e-12);
        assert!(PenaltyPolicy::new(1.0, false, 1.25).is_err());
        assert!(PenaltyPolicy::new(1.5, false, 0.5).is_err());
    }

    #[test]
    fn best_and_worst_over_one_root() {
        let (best, worst) = mixed_bounds(&g64(), false);
        assert_eq!((best.tree_bits, best.coded_units()), (2, 2));
        assert_eq!(worst.tree_bits, 21);
        assert_eq!(best.ratio_percent, 12.5);
        assert_eq!(worst.ratio_percent, 131.25);
        let (best, worst) = mixed_bounds(&g64(), true);
        assert_eq!(best.coded_units(), 3);
        assert_eq!(best.ratio_percent, 18.75);
        assert_eq!(worst.coded_units(), 22);
    }

    #[test]
    fn hand_decoded_inter_root() {
        // `00`, then (3, -1) as 0011 1111.
        let bits = Bitstream::from_bytes(vec![0b0000_1111, 0b1100_0000]);
        let f = decode_mixed(&bits, &g64(), 7, false).unwrap();
        assert_eq!(f.roots(), &[MixedNode::Leaf(Mode::Inter(MotionVector::new(3, -1)))]);
        let again = encode_mixed(&f, false).unwrap();
        assert_eq!(again.bytes(), bits.bytes());
    }

    #[test]
    fn flat_path_decodes_unmerged() {
        let modes: Vec<Mode> = (0..16)
            .map(|i| if i % 3 == 0 { Mode::Intra } else { Mode::Inter(MotionVector::new(i % 5 - 2, 1)) })
            .collect();
        let forest = MixedForest::unmerged(&g64(), 7, &modes).unwrap();
        let bits = encode_mixed_flat(&forest).unwrap();
        assert_eq!(bits.bit_len(), 1 + 16 + 8 * 10);
        assert_eq!(decode_mixed(&bits, &g64(), 7, true).unwrap(), forest);
        // A merged forest comes back unmerged but covers the same blocks.
        let merged = MixedForest::from_modes(&g64(), 7, &[Mode::Intra; 16], MergePolicy::Exact).unwrap();
        let back = decode_mixed(&encode_mixed_flat(&merged).unwrap(), &g64(), 7, true).unwrap();
        assert_eq!(back.flatten(), merged.flatten());
        assert_eq!(back, MixedForest::unmerged(&g64(), 7, &[Mode::Intra; 16]).unwrap());
    }

    #[test]
    fn auto_picks_shorter() {
        let all_intra = MixedForest::from_modes(&g64(), 7, &[Mode::Intra; 16], MergePolicy::Exact).unwrap();
        assert_eq!(encode_mixed_auto(&all_intra).unwrap().to_bit_string(), "101");
        let split = MixedForest::unmerged(&g64(), 7, &[Mode::Intra; 16]).unwrap();
        let bits = encode_mixed_auto(&split).unwrap();
        assert_eq!(bits.bit_len(), 17);
        assert_eq!(decode_mixed(&bits, &g64(), 7, true).unwrap(), split);
    }

    #[test]
    fn intra_siblings_merge_inter_need_policy() {
        let g = GridGeometry::new(32, 32, 16, 32).unwrap();
        let inter = |dx| Mode::Inter(MotionVector::new(dx, 0));
        let f = MixedForest::from_modes(&g, 7, &[inter(1), inter(2), inter(1), inter(1)], MergePolicy::Exact).unwrap();
        assert!(matches!(f.roots()[0], MixedNode::Split(_)));
        let f = MixedForest::from_modes(&g, 7, &[inter(1), inter(2), inter(1), inter(1)], MergePolicy::relaxed(1)).unwrap();
        assert_eq!(f.roots()[0], MixedNode::Leaf(inter(1)));
        let f = MixedForest::from_modes(&g, 7, &[inter(1), Mode::Intra, inter(1), inter(1)], MergePolicy::relaxed(3)).unwrap();
        assert!(matches!(f.roots()[0], MixedNode::Split(_)));
    }

    #[test]
    fn identical_frames_go_inter() {
        let g = g64();
        let f = Frame::from_fn(64, 64, |x, y| ((x * 31 + y * 17) % 251) as u8).unwrap();
        let field = MotionField::zero(g, 7);
        let forest = build_mixed(&field, &f, &f, &g, &PenaltyPolicy::default(), MergePolicy::Exact).unwrap();
        assert_eq!(forest.roots(), &[MixedNode::Leaf(Mode::Inter(MotionVector::ZERO))]);
    }

    #[test]
    fn flat_target_goes_intra() {
        let g = g64();
        let reference = Frame::from_fn(64, 64, |x, y| ((x * 31 + y * 17) % 251) as u8).unwrap();
        // Each 16x16 target block is constant.
        let target = Frame::from_fn(64, 64, |x, y| ((x / 16) * 40 + (y / 16) * 9) as u8).unwrap();
        let field = MotionField::zero(g, 7);
        let forest = build_mixed(&field, &reference, &target, &g, &PenaltyPolicy::default(), MergePolicy::Exact).unwrap();
        assert_eq!(forest.roots(), &[MixedNode::Leaf(Mode::Intra)]);
    }
}

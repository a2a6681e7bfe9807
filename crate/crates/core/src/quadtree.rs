//! Variable-block-size grouping of a motion field into a forest of
//! quadtrees, and the bit-exact interframe stream for it.
//!
//! # Stream layout
//!
//! ```text
//! [flag]  one bit `1`, only when the caller asks for a flagged stream
//! tree    per root (row-major), depth-first preorder, children TL TR BL BR:
//!           node above the base level: `1` split, `0` terminal
//!           node at the base level:    nothing (always terminal)
//! vectors per terminal, same order: dx then dy, 4-bit two's complement
//! pad     zero bits up to the next byte
//! ```
//!
//! Geometry travels out of band.

use std::collections::BTreeMap;

use crate::bits::{BitReader, BitWriter, Bitstream};
use crate::cost::CostReport;
use crate::error::{Error, Result};
use crate::frame::GridGeometry;
use crate::motion::{MotionField, MotionVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuadNode {
    /// Children in TL, TR, BL, BR order.
    Split(Box<[QuadNode; 4]>),
    Terminal(MotionVector),
}

impl QuadNode {
    pub fn split(children: [QuadNode; 4]) -> Self {
        QuadNode::Split(Box::new(children))
    }

    pub fn terminal(&self) -> Option<MotionVector> {
        match self {
            QuadNode::Terminal(v) => Some(*v),
            QuadNode::Split(_) => None,
        }
    }

    /// Calls `f(bx, by, span, vector)` for every terminal in preorder;
    /// `span` is the side in base blocks.
    pub fn for_each_terminal(&self, bx: usize, by: usize, span: usize, f: &mut impl FnMut(usize, usize, usize, MotionVector)) {
        match self {
            QuadNode::Terminal(v) => f(bx, by, span, *v),
            QuadNode::Split(children) => {
                let h = span / 2;
                for (child, (cx, cy)) in children.iter().zip(quadrants(bx, by, h)) {
                    child.for_each_terminal(cx, cy, h, f);
                }
            }
        }
    }

    fn is_well_formed(&self, span: usize) -> bool {
        match self {
            QuadNode::Terminal(_) => true,
            QuadNode::Split(c) => span > 1 && c.iter().all(|n| n.is_well_formed(span / 2)),
        }
    }
}

/// Origins of the four children of the cell at `(bx, by)` whose children
/// have side `h`.
pub(crate) fn quadrants(bx: usize, by: usize, h: usize) -> [(usize, usize); 4] {
    [(bx, by), (bx + h, by), (bx, by + h), (bx + h, by + h)]
}

/// Roots of a forest in row-major order with their base-block origins.
pub(crate) fn root_origins(geom: &GridGeometry) -> impl Iterator<Item = (usize, usize)> {
    let (rx, span) = (geom.roots_x(), geom.root_span());
    (0..geom.root_count()).map(move |i| ((i % rx) * span, (i / rx) * span))
}

/// When four sibling vectors may be replaced by one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MergePolicy {
    /// All four identical.
    #[default]
    Exact,
    /// Pairwise Chebyshev distance at most `threshold`. With
    /// `against_leaves` the test covers every original base-block vector
    /// under the merged cell instead of the four current representatives.
    Relaxed { threshold: u32, against_leaves: bool },
}

impl MergePolicy {
    /// `threshold == 0` is the exact policy.
    pub fn relaxed(threshold: u32) -> Self {
        if threshold == 0 {
            MergePolicy::Exact
        } else {
            MergePolicy::Relaxed {
                threshold,
                against_leaves: false,
            }
        }
    }

    pub fn relaxed_against_leaves(threshold: u32) -> Self {
        if threshold == 0 {
            MergePolicy::Exact
        } else {
            MergePolicy::Relaxed {
                threshold,
                against_leaves: true,
            }
        }
    }

    pub fn threshold(&self) -> u32 {
        match self {
            MergePolicy::Exact => 0,
            MergePolicy::Relaxed { threshold, .. } => *threshold,
        }
    }

    /// Decides whether `reps` (with the leaf spreads they cover) merge, and
    /// into which representative.
    pub(crate) fn merge(&self, reps: &[MotionVector], spreads: &[Spread], d_max: u32) -> Option<(MotionVector, Spread)> {
        let union = spreads.iter().copied().reduce(Spread::union)?;
        match *self {
            MergePolicy::Exact => reps.iter().all(|v| *v == reps[0]).then_some((reps[0], union)),
            MergePolicy::Relaxed {
                threshold,
                against_leaves,
            } => {
                let test = if against_leaves { union } else { Spread::of(reps) };
                (test.width() <= threshold).then(|| (mean_toward_zero(reps, d_max), union))
            }
        }
    }
}

/// Component-wise mean truncated toward zero, clamped to the window.
pub(crate) fn mean_toward_zero(vs: &[MotionVector], d_max: u32) -> MotionVector {
    let n = vs.len() as i32;
    let sx: i32 = vs.iter().map(|v| v.dx).sum();
    let sy: i32 = vs.iter().map(|v| v.dy).sum();
    let d = d_max as i32;
    MotionVector::new((sx / n).clamp(-d, d), (sy / n).clamp(-d, d))
}

/// Bounding box of a set of vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Spread {
    lo: MotionVector,
    hi: MotionVector,
}

impl Spread {
    pub(crate) fn point(v: MotionVector) -> Self {
        Spread { lo: v, hi: v }
    }

    pub(crate) fn of(vs: &[MotionVector]) -> Self {
        vs.iter().copied().map(Spread::point).reduce(Spread::union).expect("non-empty")
    }

    pub(crate) fn union(self, o: Spread) -> Self {
        Spread {
            lo: MotionVector::new(self.lo.dx.min(o.lo.dx), self.lo.dy.min(o.lo.dy)),
            hi: MotionVector::new(self.hi.dx.max(o.hi.dx), self.hi.dy.max(o.hi.dy)),
        }
    }

    /// Largest pairwise Chebyshev distance inside the box.
    pub(crate) fn width(&self) -> u32 {
        self.lo.distance(self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForest {
    geom: GridGeometry,
    d_max: u32,
    roots: Vec<QuadNode>,
}

impl QuadForest {
    pub fn new(geom: GridGeometry, d_max: u32, roots: Vec<QuadNode>) -> Result<Self> {
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
        let forest = QuadForest { geom, d_max, roots };
        let mut over = None;
        forest.for_each_terminal(|_, _, _, v| {
            if !v.within(d_max) {
                over = Some(v);
            }
        });
        if let Some(v) = over {
            return Err(Error::InvalidParameter(format!("vector {v} exceeds d_max {d_max}")));
        }
        Ok(forest)
    }

    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn roots(&self) -> &[QuadNode] {
        &self.roots
    }

    /// Calls `f(bx, by, span, vector)` for every terminal in stream order.
    pub fn for_each_terminal(&self, mut f: impl FnMut(usize, usize, usize, MotionVector)) {
        let span = self.geom.root_span();
        for (root, (bx, by)) in self.roots.iter().zip(root_origins(&self.geom)) {
            root.for_each_terminal(bx, by, span, &mut f);
        }
    }

    pub fn terminal_count(&self) -> usize {
        let mut n = 0;
        self.for_each_terminal(|_, _, _, _| n += 1);
        n
    }
}

/// Merges aligned 2×2 sibling groups level by level, starting from one
/// terminal per base block.
pub fn build_bottom_up(field: &MotionField, geom: &GridGeometry, policy: MergePolicy) -> Result<QuadForest> {
    check_field(field, geom)?;
    let d_max = field.d_max();
    let mut w = geom.blocks_x();
    let mut h = geom.blocks_y();
    let mut cells: Vec<(QuadNode, Spread)> = field
        .vectors()
        .iter()
        .map(|&v| (QuadNode::Terminal(v), Spread::point(v)))
        .collect();

    for _ in 1..geom.levels() {
        let (nw, nh) = (w / 2, h / 2);
        let mut next = Vec::with_capacity(nw * nh);
        let mut taken: Vec<Option<(QuadNode, Spread)>> = cells.into_iter().map(Some).collect();
        for y in 0..nh {
            for x in 0..nw {
                let idx = [
                    2 * y * w + 2 * x,
                    2 * y * w + 2 * x + 1,
                    (2 * y + 1) * w + 2 * x,
                    (2 * y + 1) * w + 2 * x + 1,
                ];
                let group = idx.map(|i| taken[i].take().expect("each cell used once"));
                next.push(merge_group(group, policy, d_max));
            }
        }
        cells = next;
        w = nw;
        h = nh;
    }
    QuadForest::new(*geom, d_max, cells.into_iter().map(|c| c.0).collect())
}

fn merge_group(group: [(QuadNode, Spread); 4], policy: MergePolicy, d_max: u32) -> (QuadNode, Spread) {
    let spreads = group.each_ref().map(|c| c.1);
    let union = spreads.into_iter().reduce(Spread::union).expect("four cells");
    let reps: Option<Vec<MotionVector>> = group.iter().map(|c| c.0.terminal()).collect();
    if let Some(reps) = reps {
        if let Some((v, s)) = policy.merge(&reps, &spreads, d_max) {
            return (QuadNode::Terminal(v), s);
        }
    }
    (QuadNode::split(group.map(|c| c.0)), union)
}

/// Bottom-up grouping restricted to the `span`-sided cell at `(bx, by)`.
/// On a root cell this matches what [`build_bottom_up`] produces there.
pub(crate) fn bottom_up_region(field: &MotionField, bx: usize, by: usize, span: usize, policy: MergePolicy) -> (QuadNode, Spread) {
    if span == 1 {
        let v = field.at(bx, by);
        return (QuadNode::Terminal(v), Spread::point(v));
    }
    let h = span / 2;
    let group = quadrants(bx, by, h).map(|(x, y)| bottom_up_region(field, x, y, h, policy));
    merge_group(group, policy, field.d_max())
}

/// Splits each root recursively while the covered vectors differ.
pub fn build_top_down(field: &MotionField, geom: &GridGeometry) -> Result<QuadForest> {
    check_field(field, geom)?;
    let span = geom.root_span();
    let roots = root_origins(geom).map(|(bx, by)| split_region(field, bx, by, span)).collect();
    QuadForest::new(*geom, field.d_max(), roots)
}

fn split_region(field: &MotionField, bx: usize, by: usize, span: usize) -> QuadNode {
    let first = field.at(bx, by);
    let uniform = (by..by + span).all(|y| (bx..bx + span).all(|x| field.at(x, y) == first));
    if uniform {
        return QuadNode::Terminal(first);
    }
    let h = span / 2;
    QuadNode::split(quadrants(bx, by, h).map(|(cx, cy)| split_region(field, cx, cy, h)))
}

fn check_field(field: &MotionField, geom: &GridGeometry) -> Result<()> {
    let fg = field.geom();
    if fg.width() != geom.width() || fg.height() != geom.height() || fg.min_block() != geom.min_block() {
        return Err(Error::GeometryMismatch(format!(
            "field {}x{}/{} vs grid {}x{}/{}",
            fg.width(),
            fg.height(),
            fg.min_block(),
            geom.width(),
            geom.height(),
            geom.min_block()
        )));
    }
    Ok(())
}

/// Expands every terminal back to its base blocks.
pub fn flatten(forest: &QuadForest) -> MotionField {
    let geom = *forest.geom();
    let bw = geom.blocks_x();
    let mut vectors = vec![MotionVector::ZERO; geom.base_blocks()];
    forest.for_each_terminal(|bx, by, span, v| {
        for y in by..by + span {
            vectors[y * bw + bx..y * bw + bx + span].fill(v);
        }
    });
    MotionField::new(geom, forest.d_max(), vectors).expect("forest vectors respect d_max")
}

pub(crate) fn put_vector(w: &mut BitWriter, v: MotionVector) -> Result<()> {
    if !(-8..=7).contains(&v.dx) || !(-8..=7).contains(&v.dy) {
        return Err(Error::VectorRange { dx: v.dx, dy: v.dy });
    }
    w.put_bits(v.dx as u32 & 0xf, 4);
    w.put_bits(v.dy as u32 & 0xf, 4);
    Ok(())
}

pub(crate) fn get_vector(r: &mut BitReader<'_>, d_max: u32) -> Result<MotionVector> {
    let sx = |n: u32| ((n as i32) << 28) >> 28;
    let v = MotionVector::new(sx(r.bits(4)?), sx(r.bits(4)?));
    if !v.within(d_max) {
        return Err(Error::InvalidParameter(format!("decoded vector {v} exceeds d_max {d_max}")));
    }
    Ok(v)
}

/// Emits the split/terminal bits for one node of side `span`.
pub(crate) fn put_tree(w: &mut BitWriter, node: &QuadNode, span: usize) {
    if span == 1 {
        return;
    }
    match node {
        QuadNode::Terminal(_) => w.put_bit(false),
        QuadNode::Split(children) => {
            w.put_bit(true);
            for c in children.iter() {
                put_tree(w, c, span / 2);
            }
        }
    }
}

/// Parses a tree shape; terminals carry placeholder vectors.
pub(crate) fn get_tree(r: &mut BitReader<'_>, span: usize) -> Result<QuadNode> {
    if span == 1 || !r.bit()? {
        return Ok(QuadNode::Terminal(MotionVector::ZERO));
    }
    let h = span / 2;
    Ok(QuadNode::split([
        get_tree(r, h)?,
        get_tree(r, h)?,
        get_tree(r, h)?,
        get_tree(r, h)?,
    ]))
}

pub(crate) fn fill_vectors(node: &mut QuadNode, r: &mut BitReader<'_>, d_max: u32) -> Result<()> {
    match node {
        QuadNode::Terminal(v) => *v = get_vector(r, d_max)?,
        QuadNode::Split(children) => {
            for c in children.iter_mut() {
                fill_vectors(c, r, d_max)?;
            }
        }
    }
    Ok(())
}

pub fn encode_interframe(forest: &QuadForest, with_flag: bool) -> Result<Bitstream> {
    let mut w = BitWriter::new();
    write_interframe(&mut w, forest, with_flag)?;
    Ok(w.finish())
}

pub(crate) fn write_interframe(w: &mut BitWriter, forest: &QuadForest, with_flag: bool) -> Result<()> {
    if with_flag {
        w.put_bit(true);
    }
    let span = forest.geom.root_span();
    for root in &forest.roots {
        put_tree(w, root, span);
    }
    let mut result = Ok(());
    forest.for_each_terminal(|_, _, _, v| {
        if result.is_ok() {
            result = put_vector(w, v);
        }
    });
    result
}

/// Inverse of [`encode_interframe`]. Vectors beyond `d_max` are rejected.
pub fn decode_interframe(bits: &Bitstream, geom: &GridGeometry, d_max: u32, with_flag: bool) -> Result<QuadForest> {
    let mut r = BitReader::new(bits.bytes());
    if with_flag && !r.bit()? {
        return Err(Error::QuadtreeNotUsed);
    }
    let span = geom.root_span();
    let mut roots = (0..geom.root_count())
        .map(|_| get_tree(&mut r, span))
        .collect::<Result<Vec<_>>>()?;
    for root in &mut roots {
        fill_vectors(root, &mut r, d_max)?;
    }
    r.finish()?;
    QuadForest::new(*geom, d_max, roots)
}

pub(crate) fn tree_bits(node: &QuadNode, span: usize) -> usize {
    match node {
        _ if span == 1 => 0,
        QuadNode::Terminal(_) => 1,
        QuadNode::Split(c) => 1 + c.iter().map(|n| tree_bits(n, span / 2)).sum::<usize>(),
    }
}

pub fn cost_report(forest: &QuadForest, with_flag: bool) -> CostReport {
    let geom = forest.geom;
    let mut counts = BTreeMap::new();
    forest.for_each_terminal(|_, _, span, _| *counts.entry(span * geom.min_block()).or_insert(0) += 1);
    let span = geom.root_span();
    let tree: usize = forest.roots.iter().map(|r| tree_bits(r, span)).sum();
    let vectors = counts.values().sum();
    CostReport::interframe(geom.min_block(), counts, tree, vectors, with_flag as usize, geom.base_blocks())
}

/// A forest with every base block as its own terminal.
pub fn fully_split(geom: &GridGeometry, field: &MotionField) -> Result<QuadForest> {
    check_field(field, geom)?;
    fn build(field: &MotionField, bx: usize, by: usize, span: usize) -> QuadNode {
        if span == 1 {
            return QuadNode::Terminal(field.at(bx, by));
        }
        let h = span / 2;
        QuadNode::split(quadrants(bx, by, h).map(|(x, y)| build(field, x, y, h)))
    }
    let span = geom.root_span();
    let roots = root_origins(geom).map(|(x, y)| build(field, x, y, span)).collect();
    QuadForest::new(*geom, field.d_max(), roots)
}

/// Costs of the most and least compressible forests for `geom`: every root
/// a single terminal, and every root split down to the base level.
pub fn theoretical_bounds(geom: &GridGeometry, with_flag: bool) -> (CostReport, CostReport) {
    let zero = MotionField::zero(*geom, 7);
    let best = build_bottom_up(&zero, geom, MergePolicy::Exact).expect("matching geometry");
    let worst = fully_split(geom, &zero).expect("matching geometry");
    (cost_report(&best, with_flag), cost_report(&worst, with_flag))
}

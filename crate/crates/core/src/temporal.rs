//! Quadtree grouping across two consecutive motion fields.
//!
//! Co-located vectors of the earlier and later field are first tested
//! against each other; a pair that merges becomes one span-2 terminal
//! shared by both frames. Span-2 cells then merge spatially 2×2 at a time
//! like the planar tree. A cell that cannot stay shared is coded either as
//! a spatial split of its children or as a *pair*: two independent planar
//! subtrees, one per frame. The cheaper of the two (in bits) is kept, split
//! winning ties, so a pair of uncorrelated fields costs what the two planar
//! forests cost plus two bits per root.
//!
//! # Stream layout
//!
//! ```text
//! [flag]  one bit `1` when requested
//! tree    per root, preorder, children TL TR BL BR:
//!           above the base level: `1` split, `01` shared, `00` pair
//!           at the base level:    `1` shared, `0` pair
//!         a pair is followed by the planar tree bits of the earlier and
//!         then the later subtree
//! vectors shared terminals carry one vector; a pair carries the earlier
//!         subtree's vectors then the later's; 4+4 bits each
//! pad     zero bits up to the next byte
//! ```

use std::collections::BTreeMap;

use crate::bits::{BitReader, BitWriter, Bitstream};
use crate::cost::CostReport;
use crate::error::{Error, Result};
use crate::frame::GridGeometry;
use crate::motion::{MotionField, MotionVector};
use crate::quadtree::{
    bottom_up_region, fill_vectors, get_tree, get_vector, put_tree, put_vector, quadrants, root_origins, tree_bits,
    MergePolicy, QuadNode, Spread,
};

/// Motion of `I_{k-1}` and `I_k` on the same grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldPair {
    pub earlier: MotionField,
    pub later: MotionField,
}

impl FieldPair {
    pub fn new(earlier: MotionField, later: MotionField) -> Result<Self> {
        if earlier.geom() != later.geom() || earlier.d_max() != later.d_max() {
            return Err(Error::GeometryMismatch("field pair grids differ".into()));
        }
        Ok(FieldPair { earlier, later })
    }

    pub fn geom(&self) -> &GridGeometry {
        self.earlier.geom()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node3D {
    Split(Box<[Node3D; 4]>),
    /// One vector for the cell in both frames (temporal span 2).
    Shared(MotionVector),
    /// Independent planar subtrees for the earlier and later frame
    /// (temporal span 1).
    Pair(QuadNode, QuadNode),
}

impl Node3D {
    fn bits(&self, span: usize) -> usize {
        match self {
            Node3D::Split(c) => 1 + c.iter().map(|n| n.bits(span / 2)).sum::<usize>(),
            Node3D::Shared(_) => 8 + if span > 1 { 2 } else { 1 },
            Node3D::Pair(e, l) => {
                let mut vectors = 0;
                e.for_each_terminal(0, 0, span, &mut |_, _, _, _| vectors += 1);
                l.for_each_terminal(0, 0, span, &mut |_, _, _, _| vectors += 1);
                (if span > 1 { 2 } else { 1 }) + tree_bits(e, span) + tree_bits(l, span) + 8 * vectors
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest3D {
    geom: GridGeometry,
    d_max: u32,
    roots: Vec<Node3D>,
}

impl Forest3D {
    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn roots(&self) -> &[Node3D] {
        &self.roots
    }

    /// Visits every vector-bearing terminal as
    /// `(bx, by, span, vector, temporal_span, frame)` where `frame` is
    /// `None` for shared terminals and `Some(0 | 1)` inside a pair.
    pub fn for_each_terminal(&self, mut f: impl FnMut(usize, usize, usize, MotionVector, u8, Option<u8>)) {
        fn walk(
            node: &Node3D,
            bx: usize,
            by: usize,
            span: usize,
            f: &mut impl FnMut(usize, usize, usize, MotionVector, u8, Option<u8>),
        ) {
            match node {
                Node3D::Shared(v) => f(bx, by, span, *v, 2, None),
                Node3D::Pair(e, l) => {
                    e.for_each_terminal(bx, by, span, &mut |x, y, s, v| f(x, y, s, v, 1, Some(0)));
                    l.for_each_terminal(bx, by, span, &mut |x, y, s, v| f(x, y, s, v, 1, Some(1)));
                }
                Node3D::Split(children) => {
                    let h = span / 2;
                    for (c, (x, y)) in children.iter().zip(quadrants(bx, by, h)) {
                        walk(c, x, y, h, f);
                    }
                }
            }
        }
        let span = self.geom.root_span();
        for (root, (x, y)) in self.roots.iter().zip(root_origins(&self.geom)) {
            walk(root, x, y, span, &mut f);
        }
    }
}

struct Cell {
    node: Node3D,
    shared: Option<(MotionVector, Spread)>,
    bits: usize,
}

pub fn build_3d(pair: &FieldPair, geom: &GridGeometry, policy: MergePolicy) -> Result<Forest3D> {
    let fg = pair.geom();
    if fg.width() != geom.width() || fg.height() != geom.height() || fg.min_block() != geom.min_block() {
        return Err(Error::GeometryMismatch("field pair grid differs from requested grid".into()));
    }
    let span = geom.root_span();
    let roots = root_origins(geom)
        .map(|(x, y)| build_cell(pair, x, y, span, policy).node)
        .collect();
    Ok(Forest3D {
        geom: *geom,
        d_max: pair.earlier.d_max(),
        roots,
    })
}

fn build_cell(pair: &FieldPair, bx: usize, by: usize, span: usize, policy: MergePolicy) -> Cell {
    let d_max = pair.earlier.d_max();
    let shared = |v: MotionVector, s: Spread, span: usize| {
        let node = Node3D::Shared(v);
        Cell {
            bits: node.bits(span),
            node,
            shared: Some((v, s)),
        }
    };

    if span == 1 {
        let (e, l) = (pair.earlier.at(bx, by), pair.later.at(bx, by));
        if let Some((v, s)) = policy.merge(&[e, l], &[Spread::point(e), Spread::point(l)], d_max) {
            return shared(v, s, 1);
        }
        let node = Node3D::Pair(QuadNode::Terminal(e), QuadNode::Terminal(l));
        return Cell {
            bits: node.bits(1),
            node,
            shared: None,
        };
    }

    let h = span / 2;
    let children = quadrants(bx, by, h).map(|(x, y)| build_cell(pair, x, y, h, policy));
    if children.iter().all(|c| c.shared.is_some()) {
        let reps: Vec<_> = children.iter().map(|c| c.shared.unwrap().0).collect();
        let spreads: Vec<_> = children.iter().map(|c| c.shared.unwrap().1).collect();
        if let Some((v, s)) = policy.merge(&reps, &spreads, d_max) {
            return shared(v, s, span);
        }
    }

    let split_bits = 1 + children.iter().map(|c| c.bits).sum::<usize>();
    let pair_node = Node3D::Pair(
        bottom_up_region(&pair.earlier, bx, by, span, policy).0,
        bottom_up_region(&pair.later, bx, by, span, policy).0,
    );
    let pair_bits = pair_node.bits(span);
    if split_bits <= pair_bits {
        Cell {
            node: Node3D::Split(Box::new(children.map(|c| c.node))),
            shared: None,
            bits: split_bits,
        }
    } else {
        Cell {
            node: pair_node,
            shared: None,
            bits: pair_bits,
        }
    }
}

pub fn flatten_3d(forest: &Forest3D) -> FieldPair {
    let geom = forest.geom;
    let bw = geom.blocks_x();
    let mut out = [vec![MotionVector::ZERO; geom.base_blocks()], vec![MotionVector::ZERO; geom.base_blocks()]];
    forest.for_each_terminal(|bx, by, span, v, _, frame| {
        let targets: &[usize] = match frame {
            None => &[0, 1],
            Some(0) => &[0],
            Some(_) => &[1],
        };
        for &t in targets {
            for y in by..by + span {
                out[t][y * bw + bx..y * bw + bx + span].fill(v);
            }
        }
    });
    let [e, l] = out;
    let field = |vs| MotionField::new(geom, forest.d_max, vs).expect("forest vectors respect d_max");
    FieldPair {
        earlier: field(e),
        later: field(l),
    }
}

fn put_node(w: &mut BitWriter, node: &Node3D, span: usize) {
    match node {
        Node3D::Split(children) => {
            w.put_bit(true);
            for c in children.iter() {
                put_node(w, c, span / 2);
            }
        }
        Node3D::Shared(_) => {
            if span > 1 {
                w.put_bit(false);
            }
            w.put_bit(true);
        }
        Node3D::Pair(e, l) => {
            if span > 1 {
                w.put_bit(false);
            }
            w.put_bit(false);
            put_tree(w, e, span);
            put_tree(w, l, span);
        }
    }
}

pub fn encode_3d(forest: &Forest3D, with_flag: bool) -> Result<Bitstream> {
    let mut w = BitWriter::new();
    if with_flag {
        w.put_bit(true);
    }
    let span = forest.geom.root_span();
    for root in &forest.roots {
        put_node(&mut w, root, span);
    }
    let mut result = Ok(());
    forest.for_each_terminal(|_, _, _, v, _, _| {
        if result.is_ok() {
            result = put_vector(&mut w, v);
        }
    });
    result?;
    Ok(w.finish())
}

fn get_node(r: &mut BitReader<'_>, span: usize) -> Result<Node3D> {
    if span > 1 && r.bit()? {
        let h = span / 2;
        return Ok(Node3D::Split(Box::new([
            get_node(r, h)?,
            get_node(r, h)?,
            get_node(r, h)?,
            get_node(r, h)?,
        ])));
    }
    if r.bit()? {
        return Ok(Node3D::Shared(MotionVector::ZERO));
    }
    Ok(Node3D::Pair(get_tree(r, span)?, get_tree(r, span)?))
}

fn fill_node(node: &mut Node3D, r: &mut BitReader<'_>, d_max: u32) -> Result<()> {
    match node {
        Node3D::Split(children) => {
            for c in children.iter_mut() {
                fill_node(c, r, d_max)?;
            }
        }
        Node3D::Shared(v) => *v = get_vector(r, d_max)?,
        Node3D::Pair(e, l) => {
            fill_vectors(e, r, d_max)?;
            fill_vectors(l, r, d_max)?;
        }
    }
    Ok(())
}

pub fn decode_3d(bits: &Bitstream, geom: &GridGeometry, d_max: u32, with_flag: bool) -> Result<Forest3D> {
    let mut r = BitReader::new(bits.bytes());
    if with_flag && !r.bit()? {
        return Err(Error::QuadtreeNotUsed);
    }
    let span = geom.root_span();
    let mut roots = (0..geom.root_count())
        .map(|_| get_node(&mut r, span))
        .collect::<Result<Vec<_>>>()?;
    for root in &mut roots {
        fill_node(root, &mut r, d_max)?;
    }
    r.finish()?;
    Ok(Forest3D {
        geom: *geom,
        d_max,
        roots,
    })
}

/// Costs against two uncoded fields (one byte per base block per frame).
/// Counts include shared and per-frame terminals alike.
pub fn cost_report_3d(forest: &Forest3D) -> CostReport {
    let geom = forest.geom;
    let span = geom.root_span();
    let mut counts = BTreeMap::new();
    let mut vectors = 0;
    forest.for_each_terminal(|_, _, s, _, _, _| {
        *counts.entry(s * geom.min_block()).or_insert(0) += 1;
        vectors += 1;
    });
    let total: usize = forest.roots.iter().map(|r| r.bits(span)).sum();
    let tree = total - 8 * vectors;
    CostReport::interframe(geom.min_block(), counts, tree, vectors, 0, 2 * geom.base_blocks())
}

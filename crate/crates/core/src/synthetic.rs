//! Seeded motion fields with a prescribed quadtree composition.
//!
//! [`field_with_composition`] picks a random forest shape with exactly the
//! requested number of terminals per block size, then assigns vectors so
//! that exact bottom-up grouping reproduces that shape: the four children of
//! a split whose children are all terminals never share one vector.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::GridGeometry;
use crate::motion::{MotionField, MotionVector};
use crate::quadtree::{flatten, QuadForest, QuadNode};

/// Terminals per block side, `(side, count)`, over a 256×256 frame with
/// 16×16 base blocks.
pub const COARSE: [(usize, usize); 3] = [(16, 68), (32, 15), (64, 8)];
/// The same frame with 8×8 base blocks.
pub const FINE: [(usize, usize); 4] = [(8, 412), (16, 89), (32, 12), (64, 1)];

pub fn coarse_geometry() -> GridGeometry {
    GridGeometry::new(256, 256, 16, 64).expect("valid")
}

pub fn fine_geometry() -> GridGeometry {
    GridGeometry::new(256, 256, 8, 64).expect("valid")
}

pub fn coarse_field(seed: u64) -> MotionField {
    field_with_composition(&coarse_geometry(), 7, &COARSE, seed).expect("consistent composition")
}

pub fn fine_field(seed: u64) -> MotionField {
    field_with_composition(&fine_geometry(), 7, &FINE, seed).expect("consistent composition")
}

/// Builds a forest whose terminal counts per side equal `composition`.
pub fn forest_with_composition(
    geom: &GridGeometry,
    d_max: u32,
    composition: &[(usize, usize)],
    seed: u64,
) -> Result<QuadForest> {
    if d_max == 0 && geom.levels() > 1 {
        return Err(Error::InvalidParameter("a split needs at least two distinct vectors".into()));
    }
    let wanted: BTreeMap<usize, usize> = composition.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Decide, level by level from the roots down, which nodes are terminal.
    let mut terminal_flags: Vec<Vec<bool>> = Vec::new();
    let mut nodes = geom.root_count();
    let mut side = geom.max_block();
    loop {
        let t = wanted.get(&side).copied().unwrap_or(0);
        let at_base = side == geom.min_block();
        if t > nodes || (at_base && t != nodes) {
            return Err(Error::InvalidParameter(format!(
                "{t} terminals of side {side} cannot fill {nodes} cells"
            )));
        }
        let mut flags = vec![false; nodes];
        flags[..t].fill(true);
        flags.shuffle(&mut rng);
        terminal_flags.push(flags);
        if at_base {
            break;
        }
        nodes = 4 * (nodes - t);
        side /= 2;
    }
    if let Some((&s, _)) = wanted.iter().find(|(&s, &n)| n > 0 && (s < geom.min_block() || s > geom.max_block() || !s.is_power_of_two())) {
        return Err(Error::InvalidParameter(format!("block side {s} is outside the grid levels")));
    }

    let mut cursors = vec![0usize; terminal_flags.len()];
    let roots = (0..geom.root_count())
        .map(|_| grow(0, &terminal_flags, &mut cursors, d_max, &mut rng))
        .collect();
    QuadForest::new(*geom, d_max, roots)
}

fn grow(level: usize, flags: &[Vec<bool>], cursors: &mut [usize], d_max: u32, rng: &mut ChaCha8Rng) -> QuadNode {
    let is_terminal = flags[level][cursors[level]];
    cursors[level] += 1;
    let d = d_max as i32;
    if is_terminal {
        return QuadNode::Terminal(MotionVector::new(rng.gen_range(-d..=d), rng.gen_range(-d..=d)));
    }
    let mut children = [0, 1, 2, 3].map(|_| grow(level + 1, flags, cursors, d_max, rng));
    let vs: Option<Vec<MotionVector>> = children.iter().map(QuadNode::terminal).collect();
    if let Some(vs) = vs {
        if vs.iter().all(|v| *v == vs[0]) {
            let v = vs[3];
            let dx = if v.dx < d { v.dx + 1 } else { v.dx - 1 };
            children[3] = QuadNode::Terminal(MotionVector::new(dx, v.dy));
        }
    }
    QuadNode::split(children)
}

/// The field whose exact grouping has the requested composition.
pub fn field_with_composition(
    geom: &GridGeometry,
    d_max: u32,
    composition: &[(usize, usize)],
    seed: u64,
) -> Result<MotionField> {
    Ok(flatten(&forest_with_composition(geom, d_max, composition, seed)?))
}

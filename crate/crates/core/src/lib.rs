//! Motion-side coding for interframe prediction of grayscale sequences.
//!
//! The pipeline is: estimate one vector per base block by block matching
//! ([`motion`]), group the field into a forest of quadtrees whose cells are
//! as large as the vectors allow ([`quadtree`]), write it as a compact
//! bitstream, and rebuild predicted frames with the writing method
//! ([`prediction`]). [`mixed`] codes inter/intra decisions in the same
//! tree, and [`temporal`] shares cells across two consecutive fields.
//!
//! ```
//! use mvquad::{build_bottom_up, cost_report, encode_interframe, synthetic, MergePolicy};
//!
//! let field = synthetic::coarse_field(1);
//! let forest = build_bottom_up(&field, field.geom(), MergePolicy::Exact).unwrap();
//! let report = cost_report(&forest, false);
//! assert_eq!((report.tree_bits, report.vector_bytes, report.total_bytes), (48, 91, 97));
//! assert_eq!(encode_interframe(&forest, false).unwrap().byte_len(), 97);
//! ```

pub mod bits;
pub mod container;
pub mod cost;
pub mod error;
pub mod frame;
pub mod mixed;
pub mod motion;
pub mod prediction;
pub mod quadtree;
pub mod synthetic;
pub mod temporal;
pub mod textfmt;

pub use bits::{BitReader, BitWriter, Bitstream};
pub use container::{Container, ContainerMode};
pub use cost::{Baseline, CostReport};
pub use error::{Error, Result};
pub use frame::{load_pgm, load_raw_y8, store_pgm, validate_geometry, Frame, GridGeometry};
pub use mixed::{
    build_mixed, decide_block, decide_field, decode_mixed, effective_penalty, encode_mixed, encode_mixed_auto,
    encode_mixed_flat, intra_error_dc, mixed_bounds, mixed_cost_report, Decision, MixedForest, MixedNode, Mode,
    PenaltyPolicy, PredictorKind,
};
pub use motion::{
    block_mad, conjugate_direction_search, estimate_field, full_search, BlockMatch, MotionField, MotionVector,
    SearchMode, SearchParams,
};
pub use prediction::{fill_holes, frame_mad, write_prediction, Prediction};
pub use quadtree::{
    build_bottom_up, build_top_down, cost_report, decode_interframe, encode_interframe, flatten, fully_split,
    theoretical_bounds, MergePolicy, QuadForest, QuadNode,
};
pub use temporal::{build_3d, cost_report_3d, decode_3d, encode_3d, flatten_3d, FieldPair, Forest3D, Node3D};

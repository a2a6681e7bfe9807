//! Book chapters, compiled and run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/frames.md")]
mod frames {}
#[doc = include_str!("../../../book/src/motion.md")]
mod motion {}
#[doc = include_str!("../../../book/src/prediction.md")]
mod prediction {}
#[doc = include_str!("../../../book/src/quadtree.md")]
mod quadtree {}
#[doc = include_str!("../../../book/src/mixed.md")]
mod mixed {}
#[doc = include_str!("../../../book/src/temporal.md")]
mod temporal {}
#[doc = include_str!("../../../book/src/files.md")]
mod files {}

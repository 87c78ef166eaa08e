//! Stitch prediction for 2D garment sewing patterns.
//!
//! A pattern is a set of closed panels. Every contour edge becomes a node of a
//! ring graph, a GraphSAGE encoder embeds the nodes, and a log-domain Sinkhorn
//! solver with a dustbin row/column turns pairwise inner products into a soft
//! partial assignment. Thresholding the symmetrized plan yields stitch pairs,
//! including one-to-many seams.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, checkpoints and
//! the command-line front end live in the `stitchnet` crate.

#![no_std]

extern crate alloc;

pub mod assignment;
pub mod encoding;
pub mod error;
pub mod geometry;
pub mod learning;
pub mod math;
pub mod merge;
pub mod model;
pub mod pattern;
pub mod pipeline;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};

//! Discrete laboratory for one-sided weighted estimates on the line.
//!
//! Everything here works on a uniform grid of `2^m` cells: upward weights and
//! their one-sided characteristics, causal (upward-mapping) kernels and their
//! matrices, disbalanced Haar projections, sparse stopping trees, testing
//! constants and the localized weak-type machinery.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! runner and the command line live in the `onesided-lab` crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod dyadic;
mod error;
pub mod linalg;
pub mod operators;
pub mod sums;
pub mod testing;
pub mod weaktype;
pub mod weights;

pub use dyadic::{CellRange, DyadicInterval, Grid, Lattice, RegionTag};
pub use error::{Error, Result};
pub use operators::{CausalKernel, Direction, OperatorMatrix};
pub use weights::{MeasurePair, Weight};

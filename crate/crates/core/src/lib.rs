//! Piecewise-circular approximation of scanned planar contours.

// negated comparisons are used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biarc;
pub mod corner;
pub mod error;
pub mod geom;
pub mod io;
pub mod lsq;
pub mod optimize;
pub mod par;
pub mod pipeline;
pub mod scan_synth;
pub mod smoothing;
pub mod spline_c0;
pub mod spline_longest;

pub use error::{Error, Result};

//! Scribble-line weak annotation for scene text detection.
//!
//! The crate covers the non-neural half of a character-based detector
//! trained from scribble annotations: the annotation format and its tooling,
//! pseudo-label filtering, proposal sampling and reference losses, boundary
//! reconstruction from character boxes and a text-line map, and polygon
//! precision/recall evaluation. A synthetic scene generator stands in for the
//! trained network so every stage can be exercised end to end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotation;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod pipeline;
pub mod reconstruction;
mod seed;
pub mod synth;
pub mod weak_supervision;

pub use error::{Error, Result};
pub use geometry::{AxisAlignedBox, BinaryMask, Point2D, Polygon, Polyline, RasterGrid};

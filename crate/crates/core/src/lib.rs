//! Shooting-and-bouncing-ray electromagnetic scattering on point clouds.
//!
//! The pipeline turns raw surface samples into per-view geometric frame
//! buffers (depth, normal, hit mask) by ray-tube tracing plus a refinement
//! stage, fuses views into oriented splats, traces multi-bounce rays over
//! the splats and evaluates far-field physical-optics scattering and
//! monostatic RCS. A triangle-mesh path provides ground truth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accel;
pub mod config;
pub mod em;
pub mod error;
pub mod geom;
pub mod gfb;
pub mod mbc;
pub mod oracle;
pub mod pri;
pub mod report;
pub mod shapes;
pub mod sim;

pub use error::{Error, Result};

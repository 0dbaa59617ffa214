//! Screen-based point-ray intersection: ray-tube tracing into coarse depth
//! maps, refinement into geometric frame buffers, and depth-to-normal
//! conversion.

mod backend;
pub mod format;
mod normals;
mod refine;
mod trace;

pub use backend::{refine, RefinerBackend};
pub use normals::depth_to_normals;
pub use refine::refine_classical;
pub use trace::{trace_coarse, DEFAULT_K};

use crate::error::{Error, Result};
use crate::geom::{ScreenFrame, Vec3};

/// Sentinel for pixels whose ray found no surface.
pub const MISS: f64 = f64::NAN;

#[inline]
pub fn is_miss(depth: f64) -> bool {
    depth.is_nan()
}

/// Row-major per-pixel depth (m) along `-w` from the screen; [`MISS`] where
/// no point was found.
#[derive(Clone, Debug)]
pub struct CoarseDepthMap {
    pub frame: ScreenFrame,
    pub depth: Vec<f64>,
}

impl CoarseDepthMap {
    pub fn new(frame: ScreenFrame, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != frame.pixel_count() {
            return Err(Error::InvalidArgument(format!(
                "depth grid has {} entries, screen has {}",
                depth.len(),
                frame.pixel_count()
            )));
        }
        Ok(CoarseDepthMap { frame, depth })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.depth[j * self.frame.width + i]
    }

    pub fn hit_count(&self) -> usize {
        self.depth.iter().filter(|d| !is_miss(**d)).count()
    }
}

/// Geometric frame buffer: refined depth, sensor-facing unit normals in the
/// frame's `(u, v, w)` basis, and hit probability.
#[derive(Clone, Debug)]
pub struct Gfb {
    pub frame: ScreenFrame,
    pub depth: Vec<f64>,
    pub normal: Vec<Vec3>,
    pub mask: Vec<f64>,
}

/// Mask probability at or above which a pixel counts as a hit.
pub const MASK_THRESHOLD: f64 = 0.5;

impl Gfb {
    /// All-miss buffer: depth MISS, mask 0, normals `w`.
    pub fn empty(frame: ScreenFrame) -> Self {
        let n = frame.pixel_count();
        Gfb {
            frame,
            depth: vec![MISS; n],
            normal: vec![Vec3::Z; n],
            mask: vec![0.0; n],
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.frame.width + i
    }

    #[inline]
    pub fn is_hit(&self, k: usize) -> bool {
        self.mask[k] >= MASK_THRESHOLD
    }

    pub fn hit_count(&self) -> usize {
        (0..self.mask.len()).filter(|&k| self.is_hit(k)).count()
    }

    /// Checks sizes, mask range and the per-hit invariants: finite depth,
    /// unit normal (1e-6) facing the sensor.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.frame.pixel_count();
        if self.depth.len() != n || self.normal.len() != n || self.mask.len() != n {
            return Err(format!(
                "channel sizes {}/{}/{} do not match {}x{} screen",
                self.depth.len(),
                self.normal.len(),
                self.mask.len(),
                self.frame.width,
                self.frame.height
            ));
        }
        for k in 0..n {
            let m = self.mask[k];
            if !(0.0..=1.0).contains(&m) {
                return Err(format!("mask {m} outside [0,1] at pixel {k}"));
            }
            if m < MASK_THRESHOLD {
                continue;
            }
            if !self.depth[k].is_finite() {
                return Err(format!("masked pixel {k} has no depth"));
            }
            let nrm = self.normal[k];
            if (nrm.norm() - 1.0).abs() > 1e-6 {
                return Err(format!("normal at pixel {k} has norm {}", nrm.norm()));
            }
            if nrm.z <= 0.0 {
                return Err(format!("normal at pixel {k} faces away from the sensor"));
            }
        }
        Ok(())
    }
}

//! Frame-buffer post-processing for multi-bounce tracing: edge filtering,
//! multi-view fusion and conversion to oriented disk splats.

mod edge;
mod fuse;

pub use edge::{default_thresholds, edge_filter, edge_pixels};
pub use fuse::{fuse, unproject, FusionGrid, SurfaceSample, DEFAULT_RESOLUTION};

use std::fs;
use std::path::Path;

use crate::accel::{Aabb, Primitive};
use crate::error::{Error, Result};
use crate::geom::{UnitVec3, Vec3};

/// Largest splat radius in units of the source pixel pitch.
pub const MAX_RADIUS_FACTOR: f64 = 3.535;
/// Obliquity ratio from which the radius is clamped.
pub const RATIO_CLAMP: f64 = 2.5;

/// Oriented disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splat {
    pub center: Vec3,
    pub normal: UnitVec3,
    pub radius: f64,
}

impl Splat {
    /// Distance along the ray to the disk, if the ray plane hit lies within
    /// the radius. Rays parallel to the disk never hit.
    #[inline]
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = self.normal.dot(self.center - origin) / denom;
        let hit = origin + dir * t;
        ((hit - self.center).norm_squared() <= self.radius * self.radius).then_some(t)
    }
}

impl Primitive for Splat {
    fn bounds(&self) -> Aabb {
        let n = *self.normal;
        let half = Vec3::new(
            (1.0 - n.x * n.x).max(0.0).sqrt(),
            (1.0 - n.y * n.y).max(0.0).sqrt(),
            (1.0 - n.z * n.z).max(0.0).sqrt(),
        ) * self.radius;
        // Slight padding keeps rounding from excluding rim hits.
        let pad = Vec3::splat(1e-9 * (1.0 + self.radius));
        Aabb::new(self.center - half - pad, self.center + half + pad)
    }

    fn centroid(&self) -> Vec3 {
        self.center
    }
}

/// Splat radius for pixel pitch `pitch`, normal `n` and projection direction
/// `p`: with `ratio = sqrt(|n||p| / |n·p|)`, `√2·pitch·ratio` below the
/// clamp ratio and `3.535·pitch` from it on.
pub fn splat_radius(n: Vec3, p: Vec3, pitch: f64) -> f64 {
    let cos = n.dot(p).abs();
    if cos < 1e-9 {
        return MAX_RADIUS_FACTOR * pitch;
    }
    let ratio = (n.norm() * p.norm() / cos).sqrt();
    if ratio < RATIO_CLAMP {
        (std::f64::consts::SQRT_2 * pitch * ratio).min(MAX_RADIUS_FACTOR * pitch)
    } else {
        MAX_RADIUS_FACTOR * pitch
    }
}

/// One splat per fused record, sized by its dominant view.
pub fn make_splats(records: &[SurfaceSample]) -> Vec<Splat> {
    records
        .iter()
        .map(|r| Splat {
            center: r.position,
            normal: r.normal,
            radius: splat_radius(*r.normal, *r.view_dir, r.pitch),
        })
        .collect()
}

const SPL_MAGIC: &[u8; 4] = b"SPL1";

pub fn encode_splats(splats: &[Splat]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 28 * splats.len());
    out.extend_from_slice(SPL_MAGIC);
    out.extend_from_slice(&(splats.len() as u32).to_le_bytes());
    for s in splats {
        for x in s.center.to_array().into_iter().chain(s.normal.to_array()).chain([s.radius]) {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_splats(bytes: &[u8], path: &Path) -> Result<Vec<Splat>> {
    let bad = |reason: String| Error::format("SPL1", path, reason);
    if bytes.len() < 8 || &bytes[..4] != SPL_MAGIC {
        return Err(bad("missing SPL1 header".into()));
    }
    let count = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]) as usize;
    let body = &bytes[8..];
    if body.len() != 28 * count {
        return Err(bad(format!("{count} splats need {} bytes, found {}", 28 * count, body.len())));
    }
    body.chunks_exact(28)
        .enumerate()
        .map(|(i, rec)| {
            let f: Vec<f64> = rec
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            let normal = Vec3::new(f[3], f[4], f[5])
                .try_normalize()
                .ok_or_else(|| bad(format!("splat {i} has a zero normal")))?;
            if !(f[6] > 0.0 && f[6].is_finite()) || !f[..3].iter().all(|x| x.is_finite()) {
                return Err(bad(format!("splat {i} has invalid center or radius")));
            }
            Ok(Splat {
                center: Vec3::new(f[0], f[1], f[2]),
                normal,
                radius: f[6],
            })
        })
        .collect()
}

pub fn write_splats(path: impl AsRef<Path>, splats: &[Splat]) -> Result<()> {
    Ok(fs::write(path, encode_splats(splats))?)
}

pub fn read_splats(path: impl AsRef<Path>) -> Result<Vec<Splat>> {
    let path = path.as_ref();
    decode_splats(&fs::read(path)?, path)
}

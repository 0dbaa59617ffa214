//! Multi-view fusion of frame-buffer samples on a sparse voxel grid.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::accel::Aabb;
use crate::error::{Error, Result};
use crate::geom::{UnitVec3, Vec3};
use crate::pri::Gfb;

/// Default cells per axis.
pub const DEFAULT_RESOLUTION: usize = 256;

/// One surface sample: a frame-buffer pixel in world coordinates, or a
/// fused cell cluster.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub position: Vec3,
    pub normal: UnitVec3,
    /// Pixel pitch of the generating view (m).
    pub pitch: f64,
    /// Ray direction of the generating view.
    pub view_dir: UnitVec3,
}

/// World-space samples for every hit pixel of `g`.
pub fn unproject(g: &Gfb) -> Vec<SurfaceSample> {
    let f = &g.frame;
    let mut out = Vec::with_capacity(g.hit_count());
    for j in 0..f.height {
        for i in 0..f.width {
            let k = j * f.width + i;
            if !g.is_hit(k) || !g.depth[k].is_finite() {
                continue;
            }
            let Some(normal) = f.to_world(g.normal[k]).try_normalize() else {
                continue;
            };
            out.push(SurfaceSample {
                position: f.pixel_origin(i, j) + *f.ray_dir() * g.depth[k],
                normal,
                pitch: f.pitch,
                view_dir: f.ray_dir(),
            });
        }
    }
    out
}

fn canonical(a: &SurfaceSample, b: &SurfaceSample) -> Ordering {
    let key = |s: &SurfaceSample| {
        [
            s.position.x,
            s.position.y,
            s.position.z,
            s.normal.x,
            s.normal.y,
            s.normal.z,
            s.pitch,
            s.view_dir.x,
            s.view_dir.y,
            s.view_dir.z,
        ]
    };
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sparse grid of samples over an inflated bounding box.
#[derive(Debug)]
pub struct FusionGrid {
    pub resolution: usize,
    pub bounds: Aabb,
    pub cells: HashMap<[u32; 3], Vec<SurfaceSample>>,
}

impl FusionGrid {
    /// Bins `samples` into `resolution³` cells over their bounding box
    /// inflated by 1% of its diagonal.
    pub fn build(samples: Vec<SurfaceSample>, resolution: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no hit pixels to fuse".into()));
        }
        if resolution == 0 || resolution > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("bad fusion resolution {resolution}")));
        }
        let raw = samples.iter().fold(Aabb::EMPTY, |b, s| b.union(&Aabb::from_point(s.position)));
        let bounds = raw.inflate(0.01 * raw.diagonal().max(1e-9));
        let mut grid = FusionGrid {
            resolution,
            bounds,
            cells: HashMap::new(),
        };
        for s in samples {
            grid.cells.entry(grid.cell_of(s.position)).or_default().push(s);
        }
        Ok(grid)
    }

    pub fn cell_size(&self) -> Vec3 {
        self.bounds.extent() / self.resolution as f64
    }

    pub fn cell_of(&self, p: Vec3) -> [u32; 3] {
        let rel = p - self.bounds.min;
        let size = self.cell_size();
        let idx = |x: f64, s: f64| ((x / s).floor().max(0.0) as usize).min(self.resolution - 1) as u32;
        [idx(rel.x, size.x), idx(rel.y, size.y), idx(rel.z, size.z)]
    }

    pub fn cell_bounds(&self, c: [u32; 3]) -> Aabb {
        let size = self.cell_size();
        let lo = self.bounds.min + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64).mul_elem(size);
        Aabb::new(lo, lo + size)
    }

    /// One record per (cell, normal cluster), ordered by cell index.
    pub fn finalize(self) -> Vec<SurfaceSample> {
        let mut cells: Vec<([u32; 3], Vec<SurfaceSample>)> = self.cells.into_iter().collect();
        cells.sort_unstable_by_key(|(c, _)| [c[2], c[1], c[0]]);
        cells
            .into_par_iter()
            .flat_map_iter(|(_, mut members)| {
                members.sort_by(canonical);
                fuse_cell(&members)
            })
            .collect()
    }
}

/// Hemisphere clustering: each member joins the first cluster whose running
/// normal sum has a positive dot product with it.
fn fuse_cell(members: &[SurfaceSample]) -> Vec<SurfaceSample> {
    struct Cluster {
        position: Vec3,
        normal: Vec3,
        members: Vec<usize>,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    for (idx, m) in members.iter().enumerate() {
        match clusters.iter_mut().find(|c| c.normal.dot(*m.normal) > 0.0) {
            Some(c) => {
                c.position += m.position;
                c.normal += *m.normal;
                c.members.push(idx);
            }
            None => clusters.push(Cluster {
                position: m.position,
                normal: *m.normal,
                members: vec![idx],
            }),
        }
    }
    clusters
        .into_iter()
        .filter_map(|c| {
            let normal = c.normal.try_normalize()?;
            let pitch = c.members.iter().map(|&i| members[i].pitch).fold(f64::INFINITY, f64::min);
            // Dominant view: finest pitch, then most face-on, then first.
            let mut best = None::<(usize, f64)>;
            for &i in &c.members {
                if members[i].pitch != pitch {
                    continue;
                }
                let facing = normal.dot(*members[i].view_dir).abs();
                if best.is_none_or(|(_, f)| facing > f) {
                    best = Some((i, facing));
                }
            }
            let view_dir = members[best?.0].view_dir;
            Some(SurfaceSample {
                position: c.position / c.members.len() as f64,
                normal,
                pitch,
                view_dir,
            })
        })
        .collect()
}

/// Unprojects every buffer and fuses the samples per grid cell.
pub fn fuse(gfbs: &[Gfb], resolution: usize) -> Result<Vec<SurfaceSample>> {
    if gfbs.is_empty() {
        return Err(Error::InvalidArgument("fusion needs at least one frame buffer".into()));
    }
    let samples: Vec<SurfaceSample> = gfbs.iter().flat_map(unproject).collect();
    Ok(FusionGrid::build(samples, resolution)?.finalize())
}

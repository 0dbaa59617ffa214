//! Mesh ground truth: watertight ray-triangle tracing, reference frame
//! buffers, reference SBR scattering and analytic RCS formulas.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::accel::{Aabb, Bvh, Primitive};
use crate::em::PlaneWave;
use crate::error::Result;
use crate::geom::{Complex3, ScreenFrame, TriangleMesh, UnitVec3, Vec3};
use crate::mbc::{HitRecord, Scene};
use crate::pri::Gfb;
use crate::sim;

/// Triangle primitive carrying its mesh index.
#[derive(Clone, Copy, Debug)]
pub struct Triangle {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
    pub normal: UnitVec3,
}

impl Primitive for Triangle {
    fn bounds(&self) -> Aabb {
        Aabb::from_points([self.a, self.b, self.c])
    }

    fn centroid(&self) -> Vec3 {
        (self.a + self.b + self.c) / 3.0
    }
}

impl Triangle {
    /// Watertight ray-triangle distance: the ray is sheared so it runs
    /// along its dominant axis, and containment is decided by the signs of
    /// 2-D edge functions. Rays in the triangle's plane miss.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let d = dir.to_array();
        let kz = dir.abs().max_axis();
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if d[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        let sx = d[kx] / d[kz];
        let sy = d[ky] / d[kz];
        let sz = 1.0 / d[kz];
        let rel = |p: Vec3| {
            let q = (p - origin).to_array();
            (q[kx] - sx * q[kz], q[ky] - sy * q[kz], sz * q[kz])
        };
        let (ax, ay, az) = rel(self.a);
        let (bx, by, bz) = rel(self.b);
        let (cx, cy, cz) = rel(self.c);
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let t = (u * az + v * bz + w * cz) / det;
        (t >= t_min && t <= t_max).then_some(t)
    }
}

/// Nearest-hit result of a mesh query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshHit {
    pub t: f64,
    pub position: Vec3,
    /// Triangle normal flipped towards the ray origin.
    pub normal: UnitVec3,
    pub triangle: usize,
}

/// Triangle mesh prepared for tracing.
pub struct MeshScene {
    pub bvh: Bvh<Triangle>,
    pub epsilon: f64,
    bounds: Aabb,
}

impl MeshScene {
    /// Builds the hierarchy; ε = 1e-6 × scene diameter.
    pub fn new(mesh: &TriangleMesh) -> Result<Self> {
        let tris: Vec<Triangle> = (0..mesh.triangles().len())
            .map(|t| {
                let [a, b, c] = mesh.triangle(t);
                Triangle {
                    a,
                    b,
                    c,
                    normal: mesh.normals()[t],
                }
            })
            .collect();
        let bounds = mesh.bbox();
        Ok(MeshScene {
            bvh: Bvh::build(tris)?,
            epsilon: 1e-6 * bounds.diagonal(),
            bounds,
        })
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Center and radius of the bounding sphere of the bounding box.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        (self.bounds.center(), 0.5 * self.bounds.diagonal())
    }
}

/// Nearest triangle hit at distance `>= t_min`; ties go to the lower
/// triangle index.
pub fn intersect_mesh(scene: &MeshScene, origin: Vec3, dir: UnitVec3, t_min: f64) -> Option<MeshHit> {
    let d = *dir;
    let (tri, t) = scene
        .bvh
        .closest_hit(origin, d, t_min, f64::INFINITY, |_, tri, lo, hi| tri.intersect(origin, d, lo, hi))?;
    let n = scene.bvh.primitives()[tri].normal;
    Some(MeshHit {
        t,
        position: origin + d * t,
        normal: if n.dot(d) > 0.0 { -n } else { n },
        triangle: tri,
    })
}

impl Scene for MeshScene {
    fn first_hit(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> HitRecord {
        match intersect_mesh(self, origin, dir, t_min) {
            Some(h) => HitRecord::facing(h.t, h.position, h.normal, *dir),
            None => HitRecord::MISS,
        }
    }

    fn occluded(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> bool {
        let d = *dir;
        let mut blocked = false;
        self.bvh.closest_hit(origin, d, t_min, f64::INFINITY, |_, tri, lo, hi| {
            if blocked {
                return None;
            }
            let t = tri.intersect(origin, d, lo, hi)?;
            blocked = true;
            Some(t)
        });
        blocked
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Ground-truth frame buffer: per pixel the nearest triangle hit, its
/// distance as depth and its sensor-facing normal in the frame basis.
pub fn render_reference_gfb(scene: &MeshScene, frame: &ScreenFrame) -> Gfb {
    let mut g = Gfb::empty(*frame);
    let w = frame.width;
    let dir = frame.ray_dir();
    let rows: Vec<Vec<Option<MeshHit>>> = (0..frame.height)
        .into_par_iter()
        .map(|j| (0..w).map(|i| intersect_mesh(scene, frame.pixel_origin(i, j), dir, 0.0)).collect())
        .collect();
    for (j, row) in rows.into_iter().enumerate() {
        for (i, hit) in row.into_iter().enumerate() {
            if let Some(h) = hit {
                let k = j * w + i;
                g.depth[k] = h.t;
                g.normal[k] = frame.to_local(*h.normal);
                g.mask[k] = 1.0;
            }
        }
    }
    g
}

/// Scattered field of the mesh by ray launching from a screen facing the
/// incident wave with the given pitch.
pub fn reference_sbr_field(scene: &MeshScene, wave: &PlaneWave, k_s: UnitVec3, max_bounce: usize, pitch: f64) -> Result<Complex3> {
    let (center, radius) = scene.bounding_sphere();
    let frame = ScreenFrame::facing(-wave.dir, center, radius, pitch)?;
    Ok(sim::sbr_field(scene, &frame, wave, k_s, max_bounce))
}

/// Reference RCS (dBsm) of the mesh; see [`reference_sbr_field`].
pub fn reference_sbr_rcs(scene: &MeshScene, wave: &PlaneWave, k_s: UnitVec3, max_bounce: usize, pitch: f64) -> Result<f64> {
    Ok(crate::em::rcs(reference_sbr_field(scene, wave, k_s, max_bounce, pitch)?, wave.amplitude))
}

/// Broadside RCS (m²) of an `a × a` flat PEC plate: `4πa⁴/λ²`.
pub fn analytic_plate_rcs(a: f64, lambda: f64) -> f64 {
    4.0 * PI * a.powi(4) / (lambda * lambda)
}

/// Peak (symmetry-axis) RCS (m²) of a triangular trihedral corner with edge
/// length `a`: `4πa⁴/(3λ²)`.
pub fn analytic_trihedral_peak_rcs(a: f64, lambda: f64) -> f64 {
    4.0 * PI * a.powi(4) / (3.0 * lambda * lambda)
}

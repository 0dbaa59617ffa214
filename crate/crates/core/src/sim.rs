//! End-to-end drivers: ray launching over a screen, physical-optics and
//! multi-bounce fields, and monostatic sweeps for the point, splat and mesh
//! pipelines.

use rayon::prelude::*;

use crate::accel::Bvh;
use crate::em::{self, PlaneWave, Polarization};
use crate::error::{Error, Result};
use crate::geom::{direction_from_angles, Complex3, ScreenFrame, UnitVec3, Vec3};
use crate::gfb::{self, Splat};
use crate::mbc::{trace_with_visibility, Bounce, BounceChain, HitRecord, Scene, SplatScene};
use crate::oracle::MeshScene;
use crate::pri::{self, Gfb, RefinerBackend};

/// Physical and tracing parameters shared by every pipeline.
#[derive(Clone, Debug)]
pub struct SimParams {
    pub frequency: f64,
    pub polarization: Polarization,
    /// Screen pitch in wavelengths.
    pub pitch_factor: f64,
    pub k: usize,
    pub rel_radius: f64,
    pub max_bounce: usize,
    pub backend: RefinerBackend,
    /// Secondary-ray offset in pitches.
    pub epsilon_factor: f64,
    pub blend_r_factor: f64,
    pub fusion_resolution: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            frequency: 5e8,
            polarization: Polarization::Theta,
            pitch_factor: 0.1,
            k: pri::DEFAULT_K,
            rel_radius: 2.0,
            max_bounce: 3,
            backend: RefinerBackend::Classical,
            epsilon_factor: crate::mbc::DEFAULT_EPSILON_FACTOR,
            blend_r_factor: crate::mbc::DEFAULT_BLEND_R_FACTOR,
            fusion_resolution: gfb::DEFAULT_RESOLUTION,
        }
    }
}

impl SimParams {
    pub fn wavelength(&self) -> f64 {
        em::wavelength(self.frequency)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch_factor * self.wavelength()
    }

    /// Unit-amplitude wave arriving from `(theta, phi)`.
    pub fn wave(&self, theta_deg: f64, phi_deg: f64) -> Result<PlaneWave> {
        PlaneWave::incoming(self.frequency, theta_deg, phi_deg, self.polarization, 1.0)
    }
}

/// One monostatic RCS value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RcsSample {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub rcs_dbsm: f64,
}

/// Center of the bounding box and the largest distance from it to a point.
pub fn bounding_sphere(points: &[Vec3]) -> (Vec3, f64) {
    let center = crate::accel::Aabb::from_points(points.iter().copied()).center();
    let radius = points.iter().map(|p| (*p - center).norm()).fold(0.0, f64::max);
    (center, radius.max(1e-9))
}

fn pixel_edges(frame: &ScreenFrame) -> (Vec3, Vec3) {
    (*frame.u * frame.pitch, *frame.v * frame.pitch)
}

/// Sums per-pixel contributions computed row-parallel, in pixel order.
fn sum_pixels(frame: &ScreenFrame, pixel: impl Fn(usize, usize) -> Complex3 + Sync) -> Complex3 {
    let rows: Vec<Vec<Complex3>> = (0..frame.height)
        .into_par_iter()
        .map(|j| (0..frame.width).map(|i| pixel(i, j)).collect())
        .collect();
    em::total_field(rows.iter().flatten())
}

/// Shooting-and-bouncing-ray field: one ray per pixel of `frame` along the
/// wave direction, traced through `scene`, each radiating from its last
/// bounce towards `k_s`.
pub fn sbr_field<S: Scene + ?Sized>(scene: &S, frame: &ScreenFrame, wave: &PlaneWave, k_s: UnitVec3, max_bounce: usize) -> Complex3 {
    let (du, dv) = pixel_edges(frame);
    sum_pixels(frame, |i, j| {
        let chain = trace_with_visibility(scene, frame.pixel_origin(i, j), wave.dir, max_bounce, k_s);
        em::ray_contribution(&chain, wave, du, dv, k_s)
    })
}

/// Single-bounce field from a frame buffer whose rays travel along the
/// wave direction. Every hit pixel is taken as visible.
pub fn po_field_gfb(g: &Gfb, wave: &PlaneWave, k_s: UnitVec3) -> Complex3 {
    let frame = &g.frame;
    let (du, dv) = pixel_edges(frame);
    let dir = frame.ray_dir();
    sum_pixels(frame, |i, j| {
        let k = j * frame.width + i;
        if !g.is_hit(k) || !g.depth[k].is_finite() {
            return Complex3::ZERO;
        }
        let Some(normal) = frame.to_world(g.normal[k]).try_normalize() else {
            return Complex3::ZERO;
        };
        let depth = g.depth[k];
        let mut hit = HitRecord::facing(depth, frame.pixel_origin(i, j) + *dir * depth, normal, *dir);
        hit.vis = true;
        let chain = BounceChain {
            bounces: vec![Bounce {
                hit,
                incident: dir,
                path_length: depth,
            }],
            valid: true,
        };
        em::ray_contribution(&chain, wave, du, dv, k_s)
    })
}

/// Monostatic sweep angles: `start + i·step` for `i` while below `stop`.
pub fn sweep_angles(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop > start) {
        return Err(Error::Config(format!("bad sweep range {start}..{stop} step {step}")));
    }
    let n = (stop - start) / step;
    let count = n.round();
    if (n - count).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Config(format!("step {step} does not divide the range {start}..{stop}")));
    }
    Ok((0..count as usize).map(|i| start + i as f64 * step).collect())
}

/// Refined frame buffer of a point cloud seen from `(theta, phi)`.
pub fn point_gfb(cloud: &Bvh<Vec3>, center: Vec3, radius: f64, theta_deg: f64, phi_deg: f64, p: &SimParams) -> Result<Gfb> {
    let frame = ScreenFrame::looking_from(theta_deg, phi_deg, center, radius, p.pitch())?;
    let coarse = pri::trace_coarse(cloud, &frame, p.k, p.rel_radius)?;
    pri::refine(&p.backend, &coarse)
}

fn rcs_sample(theta_deg: f64, phi_deg: f64, field: Complex3, wave: &PlaneWave) -> RcsSample {
    RcsSample {
        theta_deg,
        phi_deg,
        rcs_dbsm: em::rcs(field, wave.amplitude),
    }
}

/// Physical-optics monostatic sweep of a point cloud, one refined frame
/// buffer per angle.
pub fn po_sweep_points(points: &[Vec3], angles: &[(f64, f64)], p: &SimParams) -> Result<Vec<RcsSample>> {
    let (center, radius) = bounding_sphere(points);
    let bvh = Bvh::build(points.to_vec())?;
    angles
        .par_iter()
        .map(|&(theta, phi)| {
            let wave = p.wave(theta, phi)?;
            let g = point_gfb(&bvh, center, radius, theta, phi, p)?;
            Ok(rcs_sample(theta, phi, po_field_gfb(&g, &wave, -wave.dir), &wave))
        })
        .collect()
}

/// Edge-filtered frame buffers of a point cloud from each view.
pub fn fusion_gfbs(points: &[Vec3], views: &[(f64, f64)], p: &SimParams) -> Result<Vec<Gfb>> {
    let (center, radius) = bounding_sphere(points);
    let bvh = Bvh::build(points.to_vec())?;
    views
        .par_iter()
        .map(|&(theta, phi)| {
            let g = point_gfb(&bvh, center, radius, theta, phi, p)?;
            let (low, high) = gfb::default_thresholds(g.frame.pitch);
            Ok(gfb::edge_filter(&g, low, high))
        })
        .collect()
}

/// Splats fused from frame buffers.
pub fn splats_from_gfbs(gfbs: &[Gfb], p: &SimParams) -> Result<Vec<Splat>> {
    let fused = gfb::fuse(gfbs, p.fusion_resolution)?;
    Ok(gfb::make_splats(&fused))
}

/// Splat scene with ε derived from the finest splat source pitch.
pub fn splat_scene(splats: Vec<Splat>, pitch: f64, p: &SimParams) -> Result<SplatScene> {
    SplatScene::new(splats, p.blend_r_factor, p.epsilon_factor * pitch)
}

fn scene_sweep<S: Scene + ?Sized>(scene: &S, center: Vec3, radius: f64, angles: &[(f64, f64)], p: &SimParams) -> Result<Vec<RcsSample>> {
    angles
        .par_iter()
        .map(|&(theta, phi)| {
            let wave = p.wave(theta, phi)?;
            let frame = ScreenFrame::facing(direction_from_angles(theta, phi), center, radius, p.pitch())?;
            let field = sbr_field(scene, &frame, &wave, -wave.dir, p.max_bounce);
            Ok(rcs_sample(theta, phi, field, &wave))
        })
        .collect()
}

/// Multi-bounce monostatic sweep over splats.
pub fn mbc_sweep(splats: &[Splat], angles: &[(f64, f64)], p: &SimParams) -> Result<Vec<RcsSample>> {
    if splats.is_empty() {
        return Err(Error::InvalidArgument("no splats to trace".into()));
    }
    let centers: Vec<Vec3> = splats.iter().map(|s| s.center).collect();
    let (center, radius) = bounding_sphere(&centers);
    let max_r = splats.iter().map(|s| s.radius).fold(0.0, f64::max);
    let scene = splat_scene(splats.to_vec(), p.pitch(), p)?;
    scene_sweep(&scene, center, radius + max_r, angles, p)
}

/// Reference monostatic sweep over a triangle mesh.
pub fn oracle_sweep(scene: &MeshScene, angles: &[(f64, f64)], p: &SimParams) -> Result<Vec<RcsSample>> {
    let (center, radius) = scene.bounding_sphere();
    scene_sweep(scene, center, radius, angles, p)
}

/// Root-mean-square difference (dB) of two sweeps on the same grid.
pub fn rmse_db(a: &[RcsSample], b: &[RcsSample]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Grid(format!("sweeps have {} and {} rows", a.len(), b.len())));
    }
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        if (x.theta_deg - y.theta_deg).abs() > 1e-6 || (x.phi_deg - y.phi_deg).abs() > 1e-6 {
            return Err(Error::Grid(format!(
                "angle ({}, {}) paired with ({}, {})",
                x.theta_deg, x.phi_deg, y.theta_deg, y.phi_deg
            )));
        }
        acc += (x.rcs_dbsm - y.rcs_dbsm).powi(2);
    }
    Ok((acc / a.len() as f64).sqrt())
}

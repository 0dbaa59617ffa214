//! Multi-bounce tracing over splats: ray-splat intersection with overlap
//! re-testing and normal blending, ε-offset secondary rays, specular
//! reflection and receiver visibility.

use std::io::Write;

use crate::accel::Bvh;
use crate::error::Result;
use crate::geom::{UnitVec3, Vec3};
use crate::gfb::Splat;

pub use crate::em::reflect;

/// Default blend-sphere radius in units of the hit splat's radius.
pub const DEFAULT_BLEND_R_FACTOR: f64 = 1.0;
/// Default ε in units of the source pixel pitch.
pub const DEFAULT_EPSILON_FACTOR: f64 = 2.0;

/// Result of one ray-surface query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitRecord {
    /// Distance along the ray (m).
    pub dep: f64,
    pub pos: Vec3,
    /// Surface normal facing the incoming ray.
    pub nor: UnitVec3,
    /// Whether anything was hit.
    pub msk: bool,
    /// Receiver visibility of this hit; only set on the last bounce.
    pub vis: bool,
}

impl HitRecord {
    pub const MISS: HitRecord = HitRecord {
        dep: f64::INFINITY,
        pos: Vec3::ZERO,
        nor: UnitVec3::Z,
        msk: false,
        vis: false,
    };

    /// A valid hit with `normal` flipped to face `dir`.
    pub fn facing(dep: f64, pos: Vec3, normal: UnitVec3, dir: Vec3) -> Self {
        let nor = if normal.dot(dir) > 0.0 { -normal } else { normal };
        HitRecord {
            dep,
            pos,
            nor,
            msk: true,
            vis: false,
        }
    }
}

/// One reflection of a ray.
#[derive(Clone, Copy, Debug)]
pub struct Bounce {
    pub hit: HitRecord,
    /// Propagation direction arriving at this hit.
    pub incident: UnitVec3,
    /// Path length from the launch plane to this hit (m).
    pub path_length: f64,
}

/// Reflection sequence of one launched ray.
#[derive(Clone, Debug, Default)]
pub struct BounceChain {
    pub bounces: Vec<Bounce>,
    /// False when the ray never hit the target.
    pub valid: bool,
}

impl BounceChain {
    pub fn len(&self) -> usize {
        self.bounces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounces.is_empty()
    }

    /// Direction leaving the last hit.
    pub fn exit_dir(&self) -> Option<UnitVec3> {
        self.bounces.last().map(|b| reflect(b.incident, b.hit.nor))
    }
}

/// Surface representation that multi-bounce tracing can query.
pub trait Scene: Sync {
    /// Nearest hit at distance `>= t_min` along the ray.
    fn first_hit(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> HitRecord;

    /// Whether any surface lies at distance `>= t_min` along the ray.
    fn occluded(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> bool;

    /// Offset applied to secondary and visibility rays (m).
    fn epsilon(&self) -> f64;
}

/// Reflects a ray through `scene` up to `max_bounce` times. Secondary rays
/// start `ε` along the reflected direction and ignore hits closer than `ε`.
pub fn trace_chain<S: Scene + ?Sized>(scene: &S, origin: Vec3, dir: UnitVec3, max_bounce: usize) -> BounceChain {
    let eps = scene.epsilon();
    let mut chain = BounceChain {
        bounces: Vec::with_capacity(max_bounce),
        valid: false,
    };
    let (mut o, mut k, mut t_min) = (origin, dir, 0.0);
    let mut prev = origin;
    let mut path = 0.0;
    for _ in 0..max_bounce {
        let hit = scene.first_hit(o, k, t_min);
        if !hit.msk {
            break;
        }
        path += (hit.pos - prev).norm();
        chain.bounces.push(Bounce {
            hit,
            incident: k,
            path_length: path,
        });
        k = reflect(k, hit.nor);
        prev = hit.pos;
        o = hit.pos + *k * eps;
        t_min = eps;
    }
    chain.valid = !chain.bounces.is_empty();
    chain
}

/// Receiver visibility from `pos` towards the far-field direction `k_s`,
/// with the same ε treatment as secondary rays.
pub fn visibility<S: Scene + ?Sized>(scene: &S, pos: Vec3, k_s: UnitVec3) -> bool {
    let eps = scene.epsilon();
    !scene.occluded(pos + *k_s * eps, k_s, eps)
}

/// Traces a chain and fills the last hit's visibility towards `k_s`.
pub fn trace_with_visibility<S: Scene + ?Sized>(
    scene: &S,
    origin: Vec3,
    dir: UnitVec3,
    max_bounce: usize,
    k_s: UnitVec3,
) -> BounceChain {
    let mut chain = trace_chain(scene, origin, dir, max_bounce);
    if let Some(last) = chain.bounces.last_mut() {
        last.hit.vis = visibility(scene, last.hit.pos, k_s);
    }
    chain
}

/// Ray-splat intersection with overlap re-test and normal blending.
///
/// Finds the nearest disk hit `P′` at distance `>= t_min`; every disk hit
/// within `blend_r_factor × R` of `P′` along the ray is a candidate. The
/// candidate with the smallest `|hit − center| / R` gives the position and
/// the normals of all candidates, flipped towards the ray, are averaged
/// with weights `1 − |hit − center| / R`.
pub fn intersect_splats(bvh: &Bvh<Splat>, origin: Vec3, dir: UnitVec3, t_min: f64, blend_r_factor: f64) -> HitRecord {
    let d = *dir;
    let Some((first, t_first)) = bvh.closest_hit(origin, d, t_min, f64::INFINITY, |_, s, lo, hi| {
        s.intersect(origin, d).filter(|t| *t >= lo && *t <= hi)
    }) else {
        return HitRecord::MISS;
    };
    let reach = blend_r_factor * bvh.primitives()[first].radius;
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    bvh.for_each_on_segment(origin, d, t_first, t_first + reach, |i, s| {
        if let Some(t) = s.intersect(origin, d) {
            if t >= t_first && t - t_first <= reach {
                candidates.push((t, i));
            }
        }
    });
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    select_and_blend(bvh.primitives(), &candidates, origin, d)
}

/// Selection and blending over `(t, splat index)` candidates sorted by
/// `(t, index)`; shared with brute-force checks.
pub fn select_and_blend(splats: &[Splat], candidates: &[(f64, usize)], origin: Vec3, dir: Vec3) -> HitRecord {
    let mut best: Option<(f64, f64, Vec3, usize)> = None;
    let mut blended = Vec3::ZERO;
    let mut weight_sum = 0.0;
    for &(t, i) in candidates {
        let s = &splats[i];
        let hit = origin + dir * t;
        let offset = (hit - s.center).norm() / s.radius;
        if best.is_none_or(|(o, ..)| offset < o) {
            best = Some((offset, t, hit, i));
        }
        let n = if s.normal.dot(dir) > 0.0 { -*s.normal } else { *s.normal };
        let w = (1.0 - offset).max(0.0);
        blended += n * w;
        weight_sum += w;
    }
    let Some((_, t, pos, sel)) = best else {
        return HitRecord::MISS;
    };
    let normal = if weight_sum > 0.0 {
        (blended / weight_sum).try_normalize().unwrap_or(splats[sel].normal)
    } else {
        splats[sel].normal
    };
    HitRecord::facing(t, pos, normal, dir)
}

/// Splat geometry prepared for tracing.
pub struct SplatScene {
    pub bvh: Bvh<Splat>,
    pub blend_r_factor: f64,
    pub epsilon: f64,
}

impl SplatScene {
    pub fn new(splats: Vec<Splat>, blend_r_factor: f64, epsilon: f64) -> Result<Self> {
        Ok(SplatScene {
            bvh: Bvh::build(splats)?,
            blend_r_factor,
            epsilon,
        })
    }
}

impl Scene for SplatScene {
    fn first_hit(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> HitRecord {
        intersect_splats(&self.bvh, origin, dir, t_min, self.blend_r_factor)
    }

    fn occluded(&self, origin: Vec3, dir: UnitVec3, t_min: f64) -> bool {
        let d = *dir;
        let mut blocked = false;
        // Any hit ends the search: shrink the window to zero once found.
        self.bvh.closest_hit(origin, d, t_min, f64::INFINITY, |_, s, lo, hi| {
            if blocked {
                return None;
            }
            let t = s.intersect(origin, d).filter(|t| *t >= lo && *t <= hi)?;
            blocked = true;
            Some(t)
        });
        blocked
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Writes `ray,bounce,px,py,pz,nx,ny,nz,dep,msk,vis` rows for each chain.
pub fn write_chain_csv(mut out: impl Write, chains: &[(usize, BounceChain)]) -> std::io::Result<()> {
    writeln!(out, "ray,bounce,px,py,pz,nx,ny,nz,dep,msk,vis")?;
    for (ray, chain) in chains {
        for (b, bounce) in chain.bounces.iter().enumerate() {
            let h = &bounce.hit;
            writeln!(
                out,
                "{ray},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
                b + 1,
                h.pos.x,
                h.pos.y,
                h.pos.z,
                h.nor.x,
                h.nor.y,
                h.nor.z,
                h.dep,
                h.msk as u8,
                h.vis as u8
            )?;
        }
    }
    Ok(())
}

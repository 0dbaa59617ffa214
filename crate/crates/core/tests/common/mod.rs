//! Independent brute-force and numerical oracles shared by the integration
//! suites and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pointsbr::accel::{Bvh, Tube};
use pointsbr::em::{self, TubeGeometry};
use pointsbr::geom::{Complex3, ScreenFrame, TriangleMesh, UnitVec3, Vec3};
use pointsbr::gfb::Splat;
use pointsbr::mbc::{HitRecord, Scene, SplatScene};
use pointsbr::oracle::{intersect_mesh, MeshScene};
use pointsbr::pri;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> UnitVec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return UnitVec3::new_normalize(v);
        }
    }
}

pub fn point_in(rng: &mut ChaCha8Rng, half: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half))
}

/// Unit vector perpendicular to `k`.
pub fn perpendicular(rng: &mut ChaCha8Rng, k: UnitVec3) -> UnitVec3 {
    loop {
        let a = unit(rng);
        let p = a.cross(*k);
        if p.norm() > 0.1 {
            return UnitVec3::new_normalize(p);
        }
    }
}

/// Ray from outside a cube of half-size `half` aimed at a point inside it.
pub fn ray_into_box(rng: &mut ChaCha8Rng, half: f64) -> (Vec3, UnitVec3) {
    let origin = *unit(rng) * (3.0 * half);
    let target = point_in(rng, half);
    (origin, UnitVec3::new_normalize(target - origin))
}

/// Outcome of a brute-force equivalence run.
#[derive(Debug, Default)]
pub struct Equivalence {
    pub scenes: usize,
    pub queries: usize,
    pub mismatches: usize,
}

impl Equivalence {
    pub fn exact(&self) -> bool {
        self.mismatches == 0
    }
}

/// Points strictly inside a tube by direct geometry, ascending.
pub fn brute_tube(points: &[Vec3], tube: &Tube) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, &p)| {
            let d = p - tube.origin;
            d.dot(*tube.dir) > 0.0 && d.cross(*tube.dir).norm() < tube.radius
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn tube_equivalence(scenes: usize, seed: u64) -> Equivalence {
    let mut r = rng(seed);
    let mut out = Equivalence::default();
    for _ in 0..scenes {
        let n = r.gen_range(200..3000);
        let points: Vec<Vec3> = (0..n).map(|_| point_in(&mut r, 5.0)).collect();
        let bvh = Bvh::build_with_leaf_size(points.clone(), r.gen_range(1..16)).unwrap();
        for _ in 0..40 {
            let (origin, dir) = ray_into_box(&mut r, 5.0);
            let tube = Tube {
                origin,
                dir,
                radius: r.gen_range(0.05..1.5),
            };
            out.queries += 1;
            if bvh.tube_points(&tube) != brute_tube(&points, &tube) {
                out.mismatches += 1;
            }
        }
        out.scenes += 1;
    }
    out
}

/// Möller–Trumbore over every triangle; nearest `t >= t_min`, ties to the
/// lower index.
pub fn brute_mesh_hit(tris: &[[Vec3; 3]], origin: Vec3, dir: Vec3, t_min: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, [a, b, c]) in tris.iter().enumerate() {
        let e1 = *b - *a;
        let e2 = *c - *a;
        let pv = dir.cross(e2);
        let det = e1.dot(pv);
        if det.abs() < 1e-14 {
            continue;
        }
        let inv = 1.0 / det;
        let tv = origin - *a;
        let u = tv.dot(pv) * inv;
        if !(0.0..=1.0).contains(&u) {
            continue;
        }
        let qv = tv.cross(e1);
        let v = dir.dot(qv) * inv;
        if v < 0.0 || u + v > 1.0 {
            continue;
        }
        let t = e2.dot(qv) * inv;
        if t >= t_min && best.is_none_or(|(bt, _)| t < bt) {
            best = Some((t, i));
        }
    }
    best
}

pub fn random_soup(r: &mut ChaCha8Rng, count: usize) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(3 * count);
    let mut triangles = Vec::with_capacity(count);
    for t in 0..count {
        let c = point_in(r, 4.0);
        let size = r.gen_range(0.2..2.0);
        for _ in 0..3 {
            vertices.push(c + point_in(r, size));
        }
        let b = 3 * t as u32;
        triangles.push([b, b + 1, b + 2]);
    }
    TriangleMesh::new(vertices, triangles).unwrap()
}

pub fn mesh_equivalence(scenes: usize, seed: u64) -> Equivalence {
    let mut r = rng(seed);
    let mut out = Equivalence::default();
    for _ in 0..scenes {
        let count = r.gen_range(20..300);
        let mesh = random_soup(&mut r, count);
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles().len()).map(|t| mesh.triangle(t)).collect();
        let scene = MeshScene::new(&mesh).unwrap();
        for _ in 0..60 {
            let (origin, dir) = ray_into_box(&mut r, 5.0);
            out.queries += 1;
            let got = intersect_mesh(&scene, origin, dir, 0.0).map(|h| (h.t, h.triangle));
            let want = brute_mesh_hit(&tris, origin, *dir, 0.0);
            let same = match (got, want) {
                (None, None) => true,
                (Some((ta, ia)), Some((tb, ib))) => (ta - tb).abs() <= 1e-9 * (1.0 + tb) && (ia == ib || (ta - tb).abs() <= 1e-12),
                _ => false,
            };
            if !same {
                out.mismatches += 1;
            }
        }
        out.scenes += 1;
    }
    out
}

/// Ray-splat query by linear scan: nearest disk hit, re-test window,
/// minimum normalized offset, weighted normal blend.
pub fn brute_splat_hit(splats: &[Splat], origin: Vec3, dir: Vec3, t_min: f64, blend: f64) -> HitRecord {
    let disk = |s: &Splat| -> Option<f64> {
        let den = s.normal.dot(dir);
        if den.abs() < 1e-12 {
            return None;
        }
        let t = (s.center - origin).dot(*s.normal) / den;
        ((origin + dir * t - s.center).norm() <= s.radius).then_some(t)
    };
    let hits: Vec<(f64, usize)> = splats
        .iter()
        .enumerate()
        .filter_map(|(i, s)| disk(s).filter(|&t| t >= t_min).map(|t| (t, i)))
        .collect();
    let Some(&(t0, first)) = hits.iter().min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))) else {
        return HitRecord::MISS;
    };
    let reach = t0 + blend * splats[first].radius;
    let mut window: Vec<(f64, usize)> = hits.into_iter().filter(|&(t, _)| t <= reach).collect();
    window.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let offset = |t: f64, i: usize| (origin + dir * t - splats[i].center).norm() / splats[i].radius;
    let &(t, sel) = window
        .iter()
        .reduce(|a, b| if offset(b.0, b.1) < offset(a.0, a.1) { b } else { a })
        .unwrap();
    let mut sum = Vec3::ZERO;
    for &(tc, i) in &window {
        let n = *splats[i].normal;
        let n = if n.dot(dir) > 0.0 { -n } else { n };
        sum += n * (1.0 - offset(tc, i)).max(0.0);
    }
    let normal = sum.try_normalize().unwrap_or(splats[sel].normal);
    HitRecord::facing(t, origin + dir * t, normal, dir)
}

pub fn splat_equivalence(scenes: usize, seed: u64) -> Equivalence {
    let mut r = rng(seed);
    let mut out = Equivalence::default();
    for _ in 0..scenes {
        let n = r.gen_range(20..400);
        let splats: Vec<Splat> = (0..n)
            .map(|_| Splat {
                center: point_in(&mut r, 4.0),
                normal: unit(&mut r),
                radius: r.gen_range(0.1..1.2),
            })
            .collect();
        let blend = r.gen_range(0.5..2.0);
        let scene = SplatScene::new(splats.clone(), blend, 1e-3).unwrap();
        for _ in 0..60 {
            let (origin, dir) = ray_into_box(&mut r, 5.0);
            let t_min = if r.gen_bool(0.3) { r.gen_range(0.0..6.0) } else { 0.0 };
            out.queries += 1;
            let got = scene.first_hit(origin, dir, t_min);
            let want = brute_splat_hit(&splats, origin, *dir, t_min, blend);
            let same = got.msk == want.msk
                && (!got.msk
                    || ((got.dep - want.dep).abs() <= 1e-9
                        && (got.pos - want.pos).norm() <= 1e-9
                        && (*got.nor - *want.nor).norm() <= 1e-9));
            if !same {
                out.mismatches += 1;
            }
        }
        out.scenes += 1;
    }
    out
}

/// Coarse depth by linear scan and explicit sort.
pub fn brute_trace_coarse(points: &[Vec3], frame: &ScreenFrame, k: usize, rel_radius: f64) -> Vec<f64> {
    let delta = rel_radius * frame.pitch;
    let dir = *frame.ray_dir();
    let mut out = vec![pri::MISS; frame.pixel_count()];
    for j in 0..frame.height {
        for i in 0..frame.width {
            let o = frame.pixel_origin(i, j);
            let mut inside: Vec<(f64, f64, usize)> = points
                .iter()
                .enumerate()
                .filter_map(|(idx, &p)| {
                    let d = p - o;
                    let along = d.dot(dir);
                    let perp = (d - dir * along).norm();
                    (along > 0.0 && perp < delta).then_some((perp, d.norm(), idx))
                })
                .collect();
            inside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
            inside.truncate(k);
            if let Some(best) = inside.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2))) {
                out[j * frame.width + i] = best.1;
            }
        }
    }
    out
}

pub fn coarse_equivalence(scenes: usize, seed: u64) -> Equivalence {
    let mut r = rng(seed);
    let mut out = Equivalence::default();
    for _ in 0..scenes {
        let n = r.gen_range(500..5000);
        let points: Vec<Vec3> = (0..n).map(|_| point_in(&mut r, 2.0)).collect();
        let bvh = Bvh::build(points.clone()).unwrap();
        let frame = ScreenFrame::looking_from(
            r.gen_range(0.0..180.0),
            r.gen_range(0.0..360.0),
            Vec3::ZERO,
            2.0 * 3f64.sqrt(),
            r.gen_range(0.2..0.5),
        )
        .unwrap();
        let k = r.gen_range(1..12);
        let rel = r.gen_range(1.0..3.0);
        let got = pri::trace_coarse(&bvh, &frame, k, rel).unwrap();
        let want = brute_trace_coarse(&points, &frame, k, rel);
        out.queries += want.len();
        out.mismatches += got
            .depth
            .iter()
            .zip(&want)
            .filter(|(a, b)| !(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())))
            .count();
        out.scenes += 1;
    }
    out
}

/// `∬ e^{-jΔk·r} dS` over the parallelogram `p + s·u' + t·v'`,
/// `s, t ∈ [-½, ½]`, by tensor Gauss-Legendre.
pub fn parallelogram_quadrature(geom: &TubeGeometry, dk: Vec3, order: usize) -> Complex64 {
    let rule = GaussLegendre::new(order).unwrap();
    let pairs = rule.as_node_weight_pairs();
    let area = geom.u_proj.cross(geom.v_proj).norm();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(xs, ws) in pairs {
        for &(xt, wt) in pairs {
            let r = geom.p + geom.u_proj * (0.5 * xs) + geom.v_proj * (0.5 * xt);
            acc += Complex64::from_polar(ws * wt * 0.25, -dk.dot(r));
        }
    }
    acc * area
}

/// Largest error of the closed-form tube integral against quadrature over
/// random geometries, relative to `max(|quadrature|, 1e-6·area)`.
pub fn tube_integral_worst(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let k0 = 2.0 * PI / r.gen_range(0.1..2.0);
        let k_i = unit(&mut r);
        let n = loop {
            let n = unit(&mut r);
            if n.dot(*k_i) < -0.2 {
                break n;
            }
        };
        let e1 = perpendicular(&mut r, k_i);
        let e2 = UnitVec3::new_normalize(k_i.cross(*e1));
        let pitch = r.gen_range(0.01..0.3);
        let u = *e1 * (pitch * r.gen_range(0.5..2.0));
        let v = *e2 * (pitch * r.gen_range(0.5..2.0)) + *e1 * (pitch * r.gen_range(-0.3..0.3));
        let p = point_in(&mut r, 10.0);
        let geom = TubeGeometry::new(p, n, u, v, k_i).unwrap();
        let k_s = unit(&mut r);
        let closed = em::tube_integral(&geom, *k_i * k0, *k_s * k0);
        let quad = parallelogram_quadrature(&geom, (*k_i - *k_s) * k0, 64);
        let scale = quad.norm().max(1e-6 * geom.area());
        worst = worst.max((closed - quad).norm() / scale);
    }
    worst
}

/// Splats on a square lattice of spacing `pitch` covering the three
/// coordinate-plane faces `{x_i = 0, 0 ≤ x_j, x_k ≤ edge}` of a corner.
pub fn ideal_splat_corner(edge: f64, pitch: f64) -> Vec<Splat> {
    let n = (edge / pitch).round() as usize;
    let radius = std::f64::consts::SQRT_2 * pitch;
    let mut out = Vec::with_capacity(3 * n * n);
    for axis in 0..3 {
        let normal = [UnitVec3::X, UnitVec3::Y, UnitVec3::Z][axis];
        for a in 0..n {
            for b in 0..n {
                let (s, t) = ((a as f64 + 0.5) * pitch, (b as f64 + 0.5) * pitch);
                let c = match axis {
                    0 => Vec3::new(0.0, s, t),
                    1 => Vec3::new(s, 0.0, t),
                    _ => Vec3::new(s, t, 0.0),
                };
                out.push(Splat { center: c, normal, radius });
            }
        }
    }
    out
}

/// Retro-reflection statistics of an ideal splat corner of edge `edge`
/// illuminated from `(1,1,1)`: rays aimed into the interior (exact corner
/// path has three reflections, each at least `margin` from every face
/// edge) and how many of those leave within 1° of the reverse direction
/// after three splat bounces.
pub fn corner_retro(edge: f64, pitch: f64, margin: f64, epsilon: f64) -> (usize, usize) {
    let splats = ideal_splat_corner(edge, pitch);
    let scene = SplatScene::new(splats, 1.0, epsilon).unwrap();
    let w = UnitVec3::new_normalize(Vec3::new(1.0, 1.0, 1.0));
    let center = Vec3::splat(edge / 2.0);
    let frame = ScreenFrame::facing(w, center, edge * 3f64.sqrt(), pitch).unwrap();
    let dir = frame.ray_dir();
    let cos1 = 1f64.to_radians().cos();
    let (mut aimed, mut retro) = (0, 0);
    for j in 0..frame.height {
        for i in 0..frame.width {
            let o = frame.pixel_origin(i, j);
            if !exact_corner_interior(o, *dir, edge, margin) {
                continue;
            }
            aimed += 1;
            let chain = pointsbr::mbc::trace_chain(&scene, o, dir, 3);
            if chain.len() == 3 && chain.exit_dir().is_some_and(|e| e.dot(-*dir) > cos1) {
                retro += 1;
            }
        }
    }
    (aimed, retro)
}

/// Exact three-plane corner reflection of the ray, requiring each bounce
/// point to lie `margin` inside its square face.
fn exact_corner_interior(mut o: Vec3, mut d: Vec3, edge: f64, margin: f64) -> bool {
    for _ in 0..3 {
        let mut best: Option<(f64, usize)> = None;
        for axis in 0..3 {
            let (oa, da) = (o.to_array()[axis], d.to_array()[axis]);
            if da < 0.0 {
                let t = -oa / da;
                if t > 1e-9 && best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, axis));
                }
            }
        }
        let Some((t, axis)) = best else { return false };
        let p = o + d * t;
        let inside = (0..3)
            .filter(|&a| a != axis)
            .all(|a| (margin..=edge - margin).contains(&p.to_array()[a]));
        if !inside {
            return false;
        }
        let mut da = d.to_array();
        da[axis] = -da[axis];
        d = Vec3::new(da[0], da[1], da[2]);
        o = p;
    }
    true
}

/// Largest relative change of `|E|` over random PEC reflection chains.
pub fn energy_worst(chains: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..chains {
        let mut k = unit(&mut r);
        let a = perpendicular(&mut r, k);
        let b = UnitVec3::new_normalize(k.cross(*a));
        let e0 = Complex3::from_real(*a, Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)))
            + Complex3::from_real(*b, Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)));
        let bounces = r.gen_range(1..6);
        let mut legs = Vec::with_capacity(bounces);
        for _ in 0..bounces {
            let n = unit(&mut r);
            let n = if n.dot(*k) > 0.0 { -n } else { n };
            legs.push((k, n));
            k = em::reflect(k, n);
        }
        let norm0 = e0.norm();
        for e in em::transport_field(e0, &legs) {
            worst = worst.max((e.norm() - norm0).abs() / norm0);
        }
    }
    worst
}

/// Median angle (degrees) between normals from an analytic sphere depth map
/// and the true sphere normals, over pixels whose four neighbours are hits.
pub fn sphere_normal_median_error(radius: f64, pitch: f64) -> f64 {
    let frame = ScreenFrame::looking_from(35.0, 20.0, Vec3::ZERO, radius, pitch).unwrap();
    let (w, h) = (frame.width, frame.height);
    let mut depth = vec![pri::MISS; w * h];
    for j in 0..h {
        for i in 0..w {
            let local = frame.to_local(frame.pixel_origin(i, j) - frame.target_center());
            let rho2 = local.x * local.x + local.y * local.y;
            if rho2 < radius * radius {
                depth[j * w + i] = frame.standoff - (radius * radius - rho2).sqrt();
            }
        }
    }
    let normals = pri::depth_to_normals(&depth, &frame);
    let hit = |i: usize, j: usize| depth[j * w + i].is_finite();
    let mut errors = Vec::new();
    for j in 1..h - 1 {
        for i in 1..w - 1 {
            if !(hit(i, j) && hit(i - 1, j) && hit(i + 1, j) && hit(i, j - 1) && hit(i, j + 1)) {
                continue;
            }
            let k = j * w + i;
            let p = frame.pixel_origin(i, j) + *frame.ray_dir() * depth[k];
            let truth = frame.to_local(p / radius);
            errors.push(normals[k].dot(truth).clamp(-1.0, 1.0).acos().to_degrees());
        }
    }
    errors.sort_by(f64::total_cmp);
    errors[errors.len() / 2]
}

//! Invariants over randomized inputs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use pointsbr::em::{self, PlaneWave, Polarization};
use pointsbr::geom::{normalize_to_box, sample_mesh, Complex3, ScreenFrame, UnitVec3, Vec3};
use pointsbr::gfb;
use pointsbr::oracle::{reference_sbr_field, render_reference_gfb, MeshScene};
use pointsbr::pri::{self, CoarseDepthMap};
use pointsbr::shapes;
use pointsbr::sim::{rmse_db, RcsSample};

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = UnitVec3> {
    vec3().prop_filter("non-degenerate", |v| v.norm() > 0.05).prop_map(UnitVec3::new_normalize)
}

fn small_frame(n: usize) -> ScreenFrame {
    ScreenFrame::new(Vec3::ZERO, UnitVec3::X, UnitVec3::Y, UnitVec3::Z, 0.1, n, n, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalized_vectors_have_unit_length(v in vec3().prop_filter("nonzero", |v| v.norm() > 1e-6), s in 1e-3f64..1e3) {
        let u = UnitVec3::new_normalize(v * s);
        prop_assert!((u.norm() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn screen_axes_are_orthonormal_and_right_handed(theta in 0.0f64..180.0, phi in 0.0f64..360.0, r in 0.1f64..50.0, pitch in 0.01f64..1.0) {
        let f = ScreenFrame::looking_from(theta, phi, Vec3::new(1.0, -2.0, 0.5), r, pitch).unwrap();
        for d in [f.u.dot(*f.v), f.u.dot(*f.w), f.v.dot(*f.w)] {
            prop_assert!(d.abs() <= 1e-9);
        }
        prop_assert!((f.u.cross(*f.v).dot(*f.w) - 1.0).abs() <= 1e-9);
        prop_assert!(f.width as f64 * pitch >= 2.0 * r + 2.0 * pitch - 1e-9);
        prop_assert!((f.standoff - 2.0 * r).abs() <= 1e-12);
    }

    #[test]
    fn reflection_is_an_involution_that_keeps_length(k in unit(), n in unit()) {
        let r = em::reflect(k, n);
        prop_assert!((r.norm() - 1.0).abs() <= 1e-9);
        prop_assert!((*em::reflect(r, n) - *k).norm() <= 1e-12);
    }

    #[test]
    fn polarization_basis_is_orthonormal(k in unit(), n in unit()) {
        let n = if n.dot(*k) > 0.0 { -n } else { n };
        let kr = em::reflect(k, n);
        let b = em::pol_basis(k, kr, n);
        for (a, c) in [(*b.e_v, *k), (*b.e_v, *kr), (*b.e_p_in, *k), (*b.e_p_out, *kr), (*b.e_v, *b.e_p_in), (*b.e_v, *b.e_p_out)] {
            prop_assert!(a.dot(c).abs() <= 1e-9);
        }
        prop_assert!((b.e_p_in.cross(*b.e_v).dot(*k) - 1.0).abs() <= 1e-9);
        prop_assert!((b.e_p_out.cross(*b.e_v).dot(*kr) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn pec_chains_preserve_field_magnitude(seed in any::<u64>()) {
        prop_assert!(common::energy_worst(50, seed) <= 1e-9);
    }

    #[test]
    fn total_field_ignores_summation_order(seed in any::<u64>(), n in 2usize..200) {
        let mut r = common::rng(seed);
        use rand::Rng;
        let mut items: Vec<Complex3> = (0..n)
            .map(|_| {
                let mag = 10f64.powf(r.gen_range(-6.0..3.0));
                Complex3::from_real(*common::unit(&mut r), Complex64::from_polar(mag, r.gen_range(0.0..6.3)))
            })
            .collect();
        let a = em::total_field(&items);
        items.reverse();
        items.rotate_left(n / 3);
        let b = em::total_field(&items);
        let scale = items.iter().map(|c| c.norm()).sum::<f64>();
        prop_assert!((a - b).norm() <= 1e-9 * scale.max(1e-300));
    }

    #[test]
    fn splat_radius_respects_the_clamp(n in unit(), p in unit(), pitch in 1e-3f64..1.0) {
        let r = gfb::splat_radius(*n, *p, pitch);
        prop_assert!(r > 0.0 && r <= gfb::MAX_RADIUS_FACTOR * pitch + 1e-9);
    }

    #[test]
    fn rmse_is_symmetric_and_zero_on_itself(values in prop::collection::vec((-80.0f64..80.0, -80.0f64..80.0), 1..50)) {
        let a: Vec<RcsSample> = values.iter().enumerate().map(|(i, v)| RcsSample { theta_deg: 60.0, phi_deg: i as f64, rcs_dbsm: v.0 }).collect();
        let b: Vec<RcsSample> = values.iter().enumerate().map(|(i, v)| RcsSample { theta_deg: 60.0, phi_deg: i as f64, rcs_dbsm: v.1 }).collect();
        prop_assert_eq!(rmse_db(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(rmse_db(&a, &b).unwrap(), rmse_db(&b, &a).unwrap());
    }

    #[test]
    fn depth_normals_are_unit_facing_and_consistent(seed in any::<u64>(), holes in 0.0f64..0.4) {
        use rand::Rng;
        let mut r = common::rng(seed);
        let n = 12;
        let frame = small_frame(n);
        let depth: Vec<f64> = (0..n * n)
            .map(|_| if r.gen_bool(holes) { pri::MISS } else { 5.0 + r.gen_range(-0.3..0.3) })
            .collect();
        let normals = pri::depth_to_normals(&depth, &frame);
        for nv in &normals {
            prop_assert!((nv.norm() - 1.0).abs() <= 1e-9);
            prop_assert!(nv.z > 0.0);
        }
        for j in 0..n {
            for i in 1..n - 1 {
                let k = j * n + i;
                let (a, b) = (depth[k - 1], depth[k + 1]);
                if depth[k].is_nan() || a.is_nan() || b.is_nan() {
                    continue;
                }
                let central = (b - a) / (2.0 * frame.pitch);
                let from_normal = normals[k].x / normals[k].z;
                prop_assert!((central - from_normal).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn refined_mask_covers_hits_and_ignores_depth_scale(seed in any::<u64>(), scale in 0.2f64..5.0) {
        use rand::Rng;
        let mut r = common::rng(seed);
        let n = 16;
        let frame = small_frame(n);
        let depth: Vec<f64> = (0..n * n)
            .map(|k| {
                let (i, j) = ((k % n) as f64, (k / n) as f64);
                if r.gen_bool(0.35) { pri::MISS } else { 4.0 + 0.05 * i + 0.02 * j }
            })
            .collect();
        let g = pri::refine_classical(&CoarseDepthMap::new(frame, depth.clone()).unwrap());
        for (k, d) in depth.iter().enumerate() {
            if d.is_finite() {
                prop_assert!(g.mask[k] >= 0.5);
            }
        }
        prop_assert!(g.validate().is_ok());
        let scaled: Vec<f64> = depth.iter().map(|d| d * scale).collect();
        let h = pri::refine_classical(&CoarseDepthMap::new(frame, scaled).unwrap());
        prop_assert_eq!(g.mask, h.mask);
    }

    #[test]
    fn normalization_is_idempotent(extent in 0.5f64..50.0, sx in 0.1f64..5.0, sy in 0.1f64..5.0, sz in 0.1f64..5.0) {
        let mesh = shapes::cuboid(Vec3::new(sx, sy, sz)).unwrap();
        let once = normalize_to_box(&mesh, extent).unwrap();
        let twice = normalize_to_box(&once, extent).unwrap();
        prop_assert!((once.bbox().extent().max_component() - extent).abs() <= 1e-9 * extent);
        for (a, b) in once.vertices().iter().zip(twice.vertices()) {
            prop_assert!((*a - *b).norm() <= 1e-12 * extent.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn samples_lie_on_the_mesh(seed in any::<u64>()) {
        let mesh = shapes::octahedral_reflector(4.0).unwrap();
        let cloud = sample_mesh(&mesh, 300, seed).unwrap();
        for &p in cloud.points() {
            let on = (0..mesh.triangles().len()).any(|t| point_triangle_distance(p, mesh.triangle(t)) <= 1e-9);
            prop_assert!(on);
        }
    }

    #[test]
    fn translating_the_scene_keeps_scattered_magnitude(t in vec3(), theta in 0.0f64..80.0, phi in 0.0f64..360.0) {
        let mesh = shapes::trihedral(1.5).unwrap();
        let moved = mesh.map_vertices(|v| v + t * 3.0).unwrap();
        let wave = PlaneWave::incoming(5e8, theta, phi, Polarization::Theta, 1.0).unwrap();
        let pitch = wave.wavelength() / 10.0;
        let a = reference_sbr_field(&MeshScene::new(&mesh).unwrap(), &wave, -wave.dir, 3, pitch).unwrap();
        let b = reference_sbr_field(&MeshScene::new(&moved).unwrap(), &wave, -wave.dir, 3, pitch).unwrap();
        // The screen lattice moves with the target, so ray sets coincide.
        prop_assert!((a.norm() - b.norm()).abs() <= 1e-9 * a.norm().max(1e-12));
    }

    #[test]
    fn fusion_ignores_frame_order(rot in 0usize..8) {
        let mesh = shapes::cuboid(Vec3::new(2.0, 1.0, 1.5)).unwrap();
        let scene = MeshScene::new(&mesh).unwrap();
        let mut gfbs: Vec<_> = [(60.0, 45.0), (120.0, 135.0), (60.0, 225.0), (120.0, 315.0)]
            .iter()
            .map(|&(t, p)| render_reference_gfb(&scene, &ScreenFrame::looking_from(t, p, Vec3::ZERO, 1.9, 0.1).unwrap()))
            .collect();
        let key = |v: Vec<gfb::SurfaceSample>| {
            let mut k: Vec<[u64; 6]> = v
                .iter()
                .map(|s| [s.position.x, s.position.y, s.position.z, s.normal.x, s.normal.y, s.normal.z].map(|x| (x * 1e9).round() as i64 as u64))
                .collect();
            k.sort();
            k
        };
        let a = key(gfb::fuse(&gfbs, 64).unwrap());
        gfbs.rotate_left(rot % 4);
        if rot >= 4 {
            gfbs.reverse();
        }
        let b = key(gfb::fuse(&gfbs, 64).unwrap());
        prop_assert_eq!(a, b);
    }
}

fn point_triangle_distance(p: Vec3, [a, b, c]: [Vec3; 3]) -> f64 {
    let n = (b - a).cross(c - a);
    let area2 = n.norm();
    let n = n / area2;
    let h = (p - a).dot(n);
    let q = p - n * h;
    let bary = |x: Vec3, y: Vec3| (x - q).cross(y - q).dot(n) / area2;
    let (l0, l1, l2) = (bary(b, c), bary(c, a), bary(a, b));
    let tol = -1e-9;
    if l0 >= tol && l1 >= tol && l2 >= tol {
        h.abs()
    } else {
        f64::INFINITY
    }
}

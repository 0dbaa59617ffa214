//! The exported functions driven the way a C caller would use them.

use std::ffi::{CStr, CString};
use std::ptr;

use pointsbr::geom::sample_mesh;
use pointsbr::shapes;
use pointsbr_ffi::*;

fn last_error() -> String {
    let p = psbr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn c_path(p: &std::path::Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn cloud_to_splats_round_trip() {
    let cloud_pts = sample_mesh(&shapes::cuboid(pointsbr::geom::Vec3::new(3.0, 2.0, 1.5)).unwrap(), 6000, 4).unwrap();
    let xyz: Vec<f64> = cloud_pts.points().iter().flat_map(|p| [p.x, p.y, p.z]).collect();
    let dir = tempfile::tempdir().unwrap();
    unsafe {
        let mut cloud = ptr::null_mut();
        assert_eq!(psbr_cloud_from_points(xyz.as_ptr(), 6000, &mut cloud), PsbrStatus::Ok);
        assert_eq!(psbr_cloud_len(cloud), 6000);

        let mut gfbs = Vec::new();
        for (theta, phi) in [(60.0, 45.0), (120.0, 225.0)] {
            let mut g = ptr::null_mut();
            assert_eq!(psbr_trace_refine(cloud, theta, phi, 5e8, &mut g), PsbrStatus::Ok);
            gfbs.push(g);
        }

        let path = c_path(&dir.path().join("view.gfb1"));
        assert_eq!(psbr_gfb_write(gfbs[0], path.as_ptr()), PsbrStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(psbr_gfb_read(path.as_ptr(), &mut back), PsbrStatus::Ok);
        let info = |g| {
            let (mut w, mut h, mut n) = (0, 0, 0);
            assert_eq!(psbr_gfb_info(g, &mut w, &mut h, &mut n), PsbrStatus::Ok);
            (w, h, n)
        };
        assert_eq!(info(back), info(gfbs[0]));
        assert!(info(back).2 > 0);
        psbr_gfb_free(back);

        let handles: Vec<*const PsbrGfb> = gfbs.iter().map(|&g| g as *const _).collect();
        let mut splats = ptr::null_mut();
        assert_eq!(psbr_fuse(handles.as_ptr(), handles.len(), 64, &mut splats), PsbrStatus::Ok);
        assert!(psbr_splats_len(splats) > 100);
        let spl = c_path(&dir.path().join("s.spl1"));
        assert_eq!(psbr_splats_write(splats, spl.as_ptr()), PsbrStatus::Ok);
        assert_eq!(pointsbr::gfb::read_splats(dir.path().join("s.spl1")).unwrap().len(), psbr_splats_len(splats));

        let (mut a, mut b) = (f64::NAN, f64::NAN);
        assert_eq!(psbr_rcs_splats(splats, 60.0, 45.0, 5e8, 3, &mut a), PsbrStatus::Ok);
        assert_eq!(psbr_rcs_cloud(cloud, 60.0, 45.0, 5e8, &mut b), PsbrStatus::Ok);
        assert!(a.is_finite() && b.is_finite());

        psbr_splats_free(splats);
        for g in gfbs {
            psbr_gfb_free(g);
        }
        psbr_cloud_free(cloud);
    }
}

#[test]
fn analytic_plate_through_the_abi() {
    let lambda = 299_792_458.0 / 5e8;
    let want = 10.0 * (4.0 * std::f64::consts::PI * 6f64.powi(4) / (lambda * lambda)).log10();
    let mut got = 0.0;
    assert_eq!(unsafe { psbr_plate_rcs(6.0, 0.0, 0.0, 5e8, &mut got) }, PsbrStatus::Ok);
    assert!((got - want).abs() <= 0.5, "{got} vs {want}");
}

#[test]
fn failures_set_codes_and_messages() {
    unsafe {
        let mut cloud = ptr::null_mut();
        let missing = CString::new("/nonexistent/cloud.xyz").unwrap();
        assert_eq!(psbr_cloud_load(missing.as_ptr(), &mut cloud), PsbrStatus::Io);
        assert!(cloud.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(psbr_cloud_load(ptr::null(), &mut cloud), PsbrStatus::NullPointer);
        assert!(last_error().contains("path"));

        let mut x = 0.0;
        assert_eq!(psbr_rcs_cloud(ptr::null(), 0.0, 0.0, 5e8, &mut x), PsbrStatus::NullPointer);
        assert_eq!(psbr_plate_rcs(1.0, 0.0, 0.0, -1.0, &mut x), PsbrStatus::InvalidArgument);
        assert_eq!(psbr_plate_rcs(1.0, 0.0, 0.0, 5e8, ptr::null_mut()), PsbrStatus::NullPointer);

        let nan = [f64::NAN, 0.0, 0.0];
        assert_eq!(psbr_cloud_from_points(nan.as_ptr(), 1, &mut cloud), PsbrStatus::InvalidGeometry);

        let dir = tempfile::tempdir().unwrap();
        let junk = dir.path().join("junk.gfb1");
        std::fs::write(&junk, b"not a frame buffer").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(psbr_gfb_read(c_path(&junk).as_ptr(), &mut g), PsbrStatus::Format);

        psbr_cloud_free(ptr::null_mut());
        psbr_gfb_free(ptr::null_mut());
        psbr_splats_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/pointsbr.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["psbr_cloud_load", "psbr_trace_refine", "psbr_fuse", "psbr_rcs_splats", "psbr_plate_rcs", "PSBR_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return psbr_version() == 0; }}\n")).unwrap();
    match std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; header syntax not checked"),
    }
}

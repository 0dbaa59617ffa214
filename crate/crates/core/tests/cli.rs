//! The command-line driver end to end on small inputs.

use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--set", "target_extent=3",
    "--set", "sample_count=4000",
    "--set", "sweep_start_deg=0",
    "--set", "sweep_stop_deg=40",
    "--set", "sweep_step_deg=10",
    "--set", "fusion_resolution=64",
];

fn pointsbr(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pointsbr"));
    cmd.current_dir(dir).args(SMALL).args(args);
    match threads {
        Some(t) => cmd.env("POINTSBR_THREADS", t),
        None => cmd.env_remove("POINTSBR_THREADS"),
    };
    cmd.output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = pointsbr(dir, args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn sweep_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count()
}

#[test]
fn full_pipeline_runs_on_a_small_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["shape", "trihedral", "-o", "tri.obj"]);
    ok(d, &["sample", "tri.obj", "-o", "tri.xyz"]);
    ok(d, &["pri", "tri.xyz", "--out-dir", "gfb", "--views", "60:45,120:225", "--coarse"]);
    let mut gfbs: Vec<String> = std::fs::read_dir(d.join("gfb"))
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .filter(|p| p.ends_with(".gfb1"))
        .collect();
    gfbs.sort();
    assert_eq!(gfbs.len(), 2);
    let mut fuse = vec!["fuse"];
    fuse.extend(gfbs.iter().map(String::as_str));
    fuse.extend(["-o", "tri.spl1"]);
    ok(d, &fuse);
    ok(d, &["rcs-mbc", "tri.spl1", "-o", "mbc.csv", "--dump-chains", "chains.csv", "--dump-angle", "54.7356:45"]);
    ok(d, &["rcs-po", "tri.xyz", "-o", "po.csv"]);
    ok(d, &["rcs-oracle", "tri.obj", "-o", "oracle.csv"]);
    for csv in ["mbc.csv", "po.csv", "oracle.csv"] {
        assert_eq!(sweep_rows(&d.join(csv)), 4, "{csv}");
    }
    assert!(std::fs::metadata(d.join("chains.csv")).unwrap().len() > 0);
    let out = ok(d, &["compare", "mbc.csv", "oracle.csv", "--svg", "plot.svg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rmse: f64 = text.trim().strip_prefix("rmse_db = ").unwrap().parse().unwrap();
    assert!(rmse.is_finite() && rmse >= 0.0);
    assert!(std::fs::read_to_string(d.join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn comparing_a_sweep_with_itself_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["shape", "plate", "-o", "plate.obj"]);
    ok(d, &["rcs-oracle", "plate.obj", "-o", "a.csv"]);
    let out = ok(d, &["compare", "a.csv", "a.csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "rmse_db = 0.000000");
}

#[test]
fn config_dump_reflects_files_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.conf"), "# comment\nmax_bounce = 2\nseed = 7\n").unwrap();
    let out = ok(d, &["--config", "run.conf", "--set", "seed=9", "config", "dump"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "max_bounce = 2"));
    assert!(text.lines().any(|l| l == "seed = 9"));
    assert!(text.lines().any(|l| l == "target_extent = 3"));
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| pointsbr(d, args, None).status.code();
    assert_eq!(code(&["--set", "nope=1", "config", "dump"]), Some(2));
    assert_eq!(code(&["sample", "missing.obj", "-o", "x.xyz"]), Some(2));
    assert_eq!(code(&["compare", "missing.csv", "missing.csv"]), Some(2));
    std::fs::write(d.join("broken.gfb1"), b"GFB1 but not really").unwrap();
    assert_eq!(code(&["fuse", "broken.gfb1", "-o", "x.spl1"]), Some(2));

    ok(d, &["shape", "box", "-o", "box.obj"]);
    ok(d, &["sample", "box.obj", "-o", "box.xyz"]);
    let backend = "backend=external:/nonexistent/refiner";
    let out = pointsbr(d, &["--set", backend, "pri", "box.xyz", "--out-dir", "g", "--views", "60:0"], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refinement backend failed"));
    assert_eq!(pointsbr(d, &["config", "dump"], Some("zero")).status.code(), Some(2));
}

#[test]
fn sweeps_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["shape", "octar", "-o", "o.obj"]);
    ok(d, &["sample", "o.obj", "-o", "o.xyz"]);
    let run = |name: &str, threads: &str| {
        let out = pointsbr(d, &["rcs-mbc", "o.xyz", "-o", name], Some(threads));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(d.join(name)).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
}

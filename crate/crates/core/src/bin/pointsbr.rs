use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pointsbr::accel::Bvh;
use pointsbr::config::{parse_views, Config};
use pointsbr::geom::{io, normalize_to_box, sample_mesh, ScreenFrame, TriangleMesh, Vec3};
use pointsbr::gfb;
use pointsbr::mbc::{self, trace_with_visibility};
use pointsbr::oracle::{self, MeshScene};
use pointsbr::pri::{self, format};
use pointsbr::{report, shapes, sim, Error, Result};

const THREADS_ENV: &str = "POINTSBR_THREADS";

#[derive(Parser)]
#[command(name = "pointsbr", version, about = "Shooting-and-bouncing-ray RCS simulation on point clouds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a procedural target mesh as OBJ.
    Shape {
        /// plate, sphere, trihedral, box or octar.
        name: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sample a mesh into a point cloud (XYZ or PLY by extension).
    Sample {
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Keep the mesh's own scale instead of normalizing to `target_extent`.
        #[arg(long)]
        raw: bool,
    },
    /// Trace a point cloud into one GFB1 file per view.
    Pri {
        cloud: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Views as theta:phi pairs; defaults to the fusion views.
        #[arg(long)]
        views: Option<String>,
        /// Also write the coarse depth maps as CDM1.
        #[arg(long)]
        coarse: bool,
    },
    /// Edge-filter and fuse GFB1 files into SPL1 splats.
    Fuse {
        #[arg(required = true)]
        gfbs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Single-bounce physical-optics sweep of a point cloud.
    RcsPo {
        cloud: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Multi-bounce sweep over splats (SPL1, or a point cloud fused on the fly).
    RcsMbc {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write the bounce chains of one angle (theta:phi) as CSV.
        #[arg(long, requires = "dump_angle")]
        dump_chains: Option<PathBuf>,
        #[arg(long)]
        dump_angle: Option<String>,
    },
    /// Reference sweep of a triangle mesh.
    RcsOracle {
        mesh: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        raw: bool,
    },
    /// RMSE in dB between two sweep CSVs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Optional SVG plot of both sweeps.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Paired coarse (CDM1) and reference (GFB1) files over random views.
    GenDataset {
        #[arg(required = true)]
        meshes: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Configuration utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print every key with its effective value.
    Dump,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let threads = match n.trim().parse::<usize>() {
            Ok(t) if t > 0 => t,
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got '{n}'");
                return ExitCode::from(2);
            }
        };
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(g: &Global) -> Result<Config> {
    let mut c = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for kv in &g.overrides {
        c.apply_override(kv)?;
    }
    c.validate()?;
    Ok(c)
}

fn load_mesh(path: &Path, raw: bool, c: &Config) -> Result<TriangleMesh> {
    let mesh = io::read_obj(path)?;
    if raw {
        Ok(mesh)
    } else {
        normalize_to_box(&mesh, c.target_extent)
    }
}

fn angle_tag(theta: f64, phi: f64) -> String {
    format!("t{theta:07.3}_p{phi:07.3}")
}

fn parse_angle(s: &str) -> Result<(f64, f64)> {
    match parse_views(s)?.as_slice() {
        [one] => Ok(*one),
        _ => Err(Error::Config(format!("expected one theta:phi angle, got '{s}'"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = load_config(&cli.global)?;
    let p = &c.sim;
    match cli.command {
        Command::Shape { name, output } => io::write_obj(&output, &shapes::by_name(&name, c.target_extent)?),
        Command::Sample { mesh, output, raw } => {
            let mesh = load_mesh(&mesh, raw, &c)?;
            io::write_cloud(&output, &sample_mesh(&mesh, c.sample_count, c.seed)?)
        }
        Command::Pri { cloud, out_dir, views, coarse } => {
            let points = io::read_cloud(&cloud)?.into_points();
            let views = match views {
                Some(v) => parse_views(&v)?,
                None => c.fusion_views.clone(),
            };
            std::fs::create_dir_all(&out_dir)?;
            let (center, radius) = sim::bounding_sphere(&points);
            let bvh = Bvh::build(points)?;
            for (theta, phi) in views {
                let frame = ScreenFrame::looking_from(theta, phi, center, radius, p.pitch())?;
                let map = pri::trace_coarse(&bvh, &frame, p.k, p.rel_radius)?;
                let tag = angle_tag(theta, phi);
                if coarse {
                    format::write_cdm(out_dir.join(format!("{tag}.cdm1")), &map)?;
                }
                format::write_gfb(out_dir.join(format!("{tag}.gfb1")), &pri::refine(&p.backend, &map)?)?;
            }
            Ok(())
        }
        Command::Fuse { gfbs, output } => {
            let filtered = gfbs
                .iter()
                .map(|path| {
                    let g = format::read_gfb(path)?;
                    let (low, high) = gfb::default_thresholds(g.frame.pitch);
                    Ok(gfb::edge_filter(&g, low, high))
                })
                .collect::<Result<Vec<_>>>()?;
            let splats = sim::splats_from_gfbs(&filtered, p)?;
            gfb::write_splats(&output, &splats)?;
            eprintln!("{} splats from {} frame buffers", splats.len(), filtered.len());
            Ok(())
        }
        Command::RcsPo { cloud, output } => {
            let points = io::read_cloud(&cloud)?.into_points();
            let rows = sim::po_sweep_points(&points, &c.sweep.angles()?, p)?;
            report::write_sweep(&output, &rows)
        }
        Command::RcsMbc {
            input,
            output,
            dump_chains,
            dump_angle,
        } => {
            let splats = if input.extension().is_some_and(|e| e.eq_ignore_ascii_case("spl1")) {
                gfb::read_splats(&input)?
            } else {
                let points = io::read_cloud(&input)?.into_points();
                sim::splats_from_gfbs(&sim::fusion_gfbs(&points, &c.fusion_views, p)?, p)?
            };
            if let (Some(path), Some(angle)) = (dump_chains, dump_angle) {
                dump_chain_csv(&splats, parse_angle(&angle)?, &path, &c)?;
            }
            let rows = sim::mbc_sweep(&splats, &c.sweep.angles()?, p)?;
            report::write_sweep(&output, &rows)
        }
        Command::RcsOracle { mesh, output, raw } => {
            let scene = MeshScene::new(&load_mesh(&mesh, raw, &c)?)?;
            let rows = sim::oracle_sweep(&scene, &c.sweep.angles()?, p)?;
            report::write_sweep(&output, &rows)
        }
        Command::Compare { a, b, svg } => {
            let (ra, rb) = (report::read_sweep(&a)?, report::read_sweep(&b)?);
            let rmse = sim::rmse_db(&ra, &rb)?;
            println!("rmse_db = {rmse:.6}");
            if let Some(svg) = svg {
                let la = a.display().to_string();
                let lb = b.display().to_string();
                std::fs::write(svg, report::sweep_svg(&[(&la, &ra), (&lb, &rb)]))?;
            }
            Ok(())
        }
        Command::GenDataset { meshes, out_dir } => gen_dataset(&meshes, &out_dir, &c),
        Command::Config { action: ConfigAction::Dump } => {
            print!("{}", c.dump());
            Ok(())
        }
    }
}

fn dump_chain_csv(splats: &[gfb::Splat], (theta, phi): (f64, f64), path: &Path, c: &Config) -> Result<()> {
    let p = &c.sim;
    let centers: Vec<Vec3> = splats.iter().map(|s| s.center).collect();
    let (center, radius) = sim::bounding_sphere(&centers);
    let scene = sim::splat_scene(splats.to_vec(), p.pitch(), p)?;
    let wave = p.wave(theta, phi)?;
    let frame = ScreenFrame::looking_from(theta, phi, center, radius, p.pitch())?;
    let mut chains = Vec::new();
    for j in 0..frame.height {
        for i in 0..frame.width {
            let chain = trace_with_visibility(&scene, frame.pixel_origin(i, j), wave.dir, p.max_bounce, -wave.dir);
            if chain.valid {
                chains.push((j * frame.width + i, chain));
            }
        }
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    Ok(mbc::write_chain_csv(file, &chains)?)
}

fn gen_dataset(meshes: &[PathBuf], out_dir: &Path, c: &Config) -> Result<()> {
    let p = &c.sim;
    std::fs::create_dir_all(out_dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    for path in meshes {
        let mesh = load_mesh(path, false, c)?;
        let scene = MeshScene::new(&mesh)?;
        let (center, radius) = sim::bounding_sphere(mesh.vertices());
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
        for view in 0..c.dataset_views {
            let theta = (1.0 - 2.0 * rng.gen::<f64>()).acos().to_degrees();
            let phi = 360.0 * rng.gen::<f64>();
            let count = rng.gen_range(10_000..=50_000);
            let rel_radius = rng.gen_range(1.0..=3.0);
            let cloud = sample_mesh(&mesh, count, rng.gen())?;
            let frame = ScreenFrame::looking_from(theta, phi, center, radius, p.pitch())?;
            let coarse = pri::trace_coarse(&Bvh::build(cloud.into_points())?, &frame, p.k, rel_radius)?;
            let truth = oracle::render_reference_gfb(&scene, &frame);
            let tag = format!("{stem}_{view:04}");
            format::write_cdm(out_dir.join(format!("{tag}.cdm1")), &coarse)?;
            format::write_gfb(out_dir.join(format!("{tag}.gfb1")), &truth)?;
        }
    }
    Ok(())
}

//! OBJ mesh input plus XYZ / PLY point-cloud I/O.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{PointCloud, TriangleMesh, Vec3};

/// Parses an ASCII OBJ; polygons are fan-triangulated. Only `v` and `f`
/// records are interpreted.
pub fn read_obj(path: &Path) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path)?;
    parse_obj(&text).map_err(|reason| Error::format("OBJ", path, reason))
}

pub fn parse_obj(text: &str) -> std::result::Result<TriangleMesh, String> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if c.len() != 3 {
                    return Err(format!("line {}: vertex needs 3 coordinates", lineno + 1));
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = tok
                    .map(|t| resolve_index(t, vertices.len()))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if idx.len() < 3 {
                    return Err(format!("line {}: face needs at least 3 vertices", lineno + 1));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(|e| e.to_string())
}

fn resolve_index(token: &str, n_vertices: usize) -> std::result::Result<u32, String> {
    let head = token.split('/').next().unwrap_or("");
    let raw: i64 = head.parse().map_err(|_| format!("bad face index {token:?}"))?;
    let resolved = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        n_vertices as i64 + raw
    } else {
        return Err("face index 0 is invalid".into());
    };
    if resolved < 0 || resolved as usize >= n_vertices {
        return Err(format!("face index {raw} out of range"));
    }
    Ok(resolved as u32)
}

pub fn write_obj(path: &Path, mesh: &TriangleMesh) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a point cloud, choosing the format from the extension
/// (`.ply`, otherwise XYZ).
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    match extension(path).as_deref() {
        Some("ply") => read_ply(path),
        _ => read_xyz(path),
    }
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    match extension(path).as_deref() {
        Some("ply") => write_ply(path, cloud),
        _ => write_xyz(path, cloud),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let c: Vec<f64> = line
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|t| !t.is_empty())
            .take(3)
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::format("XYZ", path, format!("line {}: {e}", lineno + 1)))?;
        if c.len() < 3 {
            return Err(Error::format("XYZ", path, format!("line {}: expected x y z", lineno + 1)));
        }
        points.push(Vec3::new(c[0], c[1], c[2]));
    }
    PointCloud::new(points).map_err(|e| Error::format("XYZ", path, e.to_string()))
}

pub fn write_xyz(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# {} points", cloud.len())?;
    for p in cloud.points() {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary little-endian PLY with float32 `x y z` vertices.
pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(
        w,
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        cloud.len()
    )?;
    for p in cloud.points() {
        for c in [p.x, p.y, p.z] {
            w.write_all(&(c as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads binary little-endian PLY vertices. Extra vertex properties are
/// skipped; `x y z` may be float or double.
pub fn read_ply(path: &Path) -> Result<PointCloud> {
    let bad = |reason: String| Error::format("PLY", path, reason);
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim() != "ply" {
        return Err(bad("missing 'ply' magic".into()));
    }
    let mut count = None;
    let mut in_vertex = false;
    // (name, byte size, is double)
    let mut props: Vec<(String, usize, bool)> = Vec::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(bad("unterminated header".into()));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["end_header"] => break,
            ["format", fmt, _] if *fmt != "binary_little_endian" => {
                return Err(bad(format!("unsupported format {fmt}")));
            }
            ["element", name, n] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    count = Some(n.parse::<usize>().map_err(|e| bad(e.to_string()))?);
                } else if count.is_none() {
                    return Err(bad("vertex element must come first".into()));
                }
            }
            ["property", ty, name] if in_vertex => {
                let (size, double) = match *ty {
                    "float" | "float32" => (4, false),
                    "double" | "float64" => (8, true),
                    "char" | "uchar" | "int8" | "uint8" => (1, false),
                    "short" | "ushort" | "int16" | "uint16" => (2, false),
                    "int" | "uint" | "int32" | "uint32" => (4, false),
                    other => return Err(bad(format!("unsupported property type {other}"))),
                };
                let is_float = matches!(*ty, "float" | "float32" | "double" | "float64");
                if matches!(*name, "x" | "y" | "z") && !is_float {
                    return Err(bad(format!("coordinate {name} must be floating point")));
                }
                props.push((name.to_string(), size, double));
            }
            _ => {}
        }
    }
    let count = count.ok_or_else(|| bad("no vertex element".into()))?;
    let stride: usize = props.iter().map(|p| p.1).sum();
    let offset_of = |axis: &str| -> Result<(usize, bool)> {
        let mut off = 0;
        for (name, size, double) in &props {
            if name == axis {
                return Ok((off, *double));
            }
            off += size;
        }
        Err(bad(format!("missing property {axis}")))
    };
    let axes = [offset_of("x")?, offset_of("y")?, offset_of("z")?];
    let mut data = vec![0u8; stride * count];
    reader
        .read_exact(&mut data)
        .map_err(|_| bad(format!("expected {count} vertices of {stride} bytes")))?;
    let points = data
        .chunks_exact(stride)
        .map(|rec| {
            let c = axes.map(|(off, double)| {
                if double {
                    f64::from_le_bytes(rec[off..off + 8].try_into().unwrap())
                } else {
                    f32::from_le_bytes(rec[off..off + 4].try_into().unwrap()) as f64
                }
            });
            Vec3::new(c[0], c[1], c[2])
        })
        .collect();
    PointCloud::new(points).map_err(|e| bad(e.to_string()))
}

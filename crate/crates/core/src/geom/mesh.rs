//! Point clouds, triangle meshes and surface sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accel::Aabb;
use crate::error::{Error, Result};

use super::{UnitVec3, Vec3};

/// Raw surface samples of a target.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    bbox: Aabb,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGeometry("point cloud is empty".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite point {p}")));
        }
        let bbox = Aabb::from_points(points.iter().copied());
        Ok(PointCloud { points, bbox })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Indexed triangle mesh with per-triangle unit normals. Zero-area triangles
/// are dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<UnitVec3>,
}

const DEGENERATE_AREA: f64 = 1e-18;

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let mut kept = Vec::with_capacity(triangles.len());
        let mut normals = Vec::with_capacity(triangles.len());
        for t in triangles {
            if let Some(&bad) = t.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(Error::InvalidGeometry(format!(
                    "triangle index {bad} out of range ({} vertices)",
                    vertices.len()
                )));
            }
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            let n = (b - a).cross(c - a);
            if n.norm() * 0.5 <= DEGENERATE_AREA {
                continue;
            }
            kept.push(t);
            normals.push(UnitVec3::new_normalize(n));
        }
        if kept.is_empty() {
            return Err(Error::InvalidGeometry("mesh has no non-degenerate triangles".into()));
        }
        Ok(TriangleMesh {
            vertices,
            triangles: kept,
            normals,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[UnitVec3] {
        &self.normals
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Bounding box of the referenced vertices.
    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.triangles.iter().flatten().map(|&i| self.vertices[i as usize]))
    }

    /// Concatenates meshes, re-indexing vertices.
    pub fn merge(parts: &[TriangleMesh]) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in parts {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        TriangleMesh::new(vertices, triangles)
    }

    /// Applies `f` to every vertex; normals are recomputed.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        TriangleMesh::new(self.vertices.iter().map(|&v| f(v)).collect(), self.triangles.clone())
    }
}

/// Area-weighted uniform sampling of `n` surface points; deterministic in `seed`.
pub fn sample_mesh(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mesh.triangles().len());
    let mut total = 0.0;
    for t in 0..mesh.triangles().len() {
        total += mesh.area(t);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::InvalidGeometry("mesh has zero total area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.gen::<f64>() * total;
        let t = cumulative
            .partition_point(|&c| c <= target)
            .min(cumulative.len() - 1);
        let [a, b, c] = mesh.triangle(t);
        let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
        let s = r1.sqrt();
        points.push(a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2));
    }
    PointCloud::new(points)
}

/// Geometry that can be uniformly rescaled into a target box.
pub trait BoxNormalize: Sized {
    fn bounds(&self) -> Aabb;
    fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self>;
}

impl BoxNormalize for PointCloud {
    fn bounds(&self) -> Aabb {
        self.bbox
    }
    fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        PointCloud::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

impl BoxNormalize for TriangleMesh {
    fn bounds(&self) -> Aabb {
        self.bbox()
    }
    fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        self.map_vertices(f)
    }
}

/// Uniformly scales and translates so the longest bounding-box edge equals
/// `target_extent` and the box is centered on the origin.
pub fn normalize_to_box<T: BoxNormalize>(geometry: &T, target_extent: f64) -> Result<T> {
    if !(target_extent > 0.0 && target_extent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target extent must be positive, got {target_extent}"
        )));
    }
    let bbox = geometry.bounds();
    let extent = bbox.extent().max_component();
    if !(extent > 0.0) {
        return Err(Error::InvalidGeometry("geometry has zero extent".into()));
    }
    let center = bbox.center();
    let scale = target_extent / extent;
    geometry.map_points(|p| (p - center) * scale)
}

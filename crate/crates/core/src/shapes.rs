//! Procedural test targets as triangle meshes.

use crate::error::{Error, Result};
use crate::geom::{TriangleMesh, Vec3};

/// Square `side × side` in the `z = 0` plane, centered at the origin.
pub fn plate(side: f64) -> Result<TriangleMesh> {
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::InvalidGeometry(format!("plate side must be positive, got {side}")));
    }
    let h = 0.5 * side;
    TriangleMesh::new(
        vec![
            Vec3::new(-h, -h, 0.0),
            Vec3::new(h, -h, 0.0),
            Vec3::new(h, h, 0.0),
            Vec3::new(-h, h, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
}

/// Geodesic sphere from a subdivided icosahedron, outward winding.
pub fn icosphere(radius: f64, subdivisions: usize) -> Result<TriangleMesh> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z) / Vec3::new(x, y, z).norm())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint = std::collections::HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| -> u32 {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = verts[a as usize] + verts[b as usize];
                verts.push(m / m.norm());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriangleMesh::new(verts.into_iter().map(|v| v * radius).collect(), faces)
}

/// Triangular trihedral corner reflector: three right isosceles triangles
/// with legs `edge` in the coordinate planes, apex at the origin, opening
/// towards `(1, 1, 1)`.
pub fn trihedral(edge: f64) -> Result<TriangleMesh> {
    TriangleMesh::new(
        vec![Vec3::ZERO, Vec3::new(edge, 0.0, 0.0), Vec3::new(0.0, edge, 0.0), Vec3::new(0.0, 0.0, edge)],
        vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]],
    )
}

/// Axis-aligned box centered at the origin, outward winding.
pub fn cuboid(size: Vec3) -> Result<TriangleMesh> {
    if !(size.x > 0.0 && size.y > 0.0 && size.z > 0.0) {
        return Err(Error::InvalidGeometry(format!("box size must be positive, got {size:?}")));
    }
    let h = size * 0.5;
    let verts = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    TriangleMesh::new(
        verts,
        vec![
            [0, 2, 1],
            [1, 2, 3],
            [4, 5, 6],
            [5, 7, 6],
            [0, 1, 4],
            [1, 5, 4],
            [2, 6, 3],
            [3, 6, 7],
            [0, 4, 2],
            [2, 4, 6],
            [1, 3, 5],
            [3, 7, 5],
        ],
    )
}

/// Three mutually orthogonal square plates of side `side` crossing at the
/// origin, forming eight trihedral corners.
pub fn octahedral_reflector(side: f64) -> Result<TriangleMesh> {
    let h = 0.5 * side;
    let square = |a: Vec3, b: Vec3| -> Result<TriangleMesh> {
        TriangleMesh::new(vec![-a - b, a - b, a + b, b - a], vec![[0, 1, 2], [0, 2, 3]])
    };
    TriangleMesh::merge(&[
        square(Vec3::X * h, Vec3::Y * h)?,
        square(Vec3::Y * h, Vec3::Z * h)?,
        square(Vec3::Z * h, Vec3::X * h)?,
    ])
}

/// Mesh by name: `plate`, `sphere`, `trihedral`, `box` or `octar`, sized so
/// the longest bounding-box edge is `extent`.
pub fn by_name(name: &str, extent: f64) -> Result<TriangleMesh> {
    match name {
        "plate" => plate(extent),
        "sphere" => icosphere(0.5 * extent, 5),
        "trihedral" => trihedral(extent),
        "box" => cuboid(Vec3::new(extent, 0.6 * extent, 0.4 * extent)),
        "octar" => octahedral_reflector(extent),
        other => Err(Error::InvalidArgument(format!(
            "unknown shape '{other}' (plate, sphere, trihedral, box, octar)"
        ))),
    }
}

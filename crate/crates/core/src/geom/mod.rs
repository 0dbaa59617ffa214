//! Core geometric types, coordinate frames and surface sampling.

mod frame;
pub mod io;
mod mesh;
mod vec;

pub use frame::{direction_from_angles, spherical_basis, ScreenFrame};
pub use mesh::{normalize_to_box, sample_mesh, BoxNormalize, PointCloud, TriangleMesh};
pub use vec::{Complex3, UnitVec3, Vec3};

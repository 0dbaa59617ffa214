//! Orthographic launch screens.

use crate::error::{Error, Result};

use super::{UnitVec3, Vec3};

const ORTHO_TOLERANCE: f64 = 1e-9;

/// A transmitter-aligned orthographic screen. Rays launch from a regular
/// lattice of pixel centers in the plane through `origin` spanned by `u`, `v`
/// and travel along `-w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenFrame {
    pub origin: Vec3,
    pub u: UnitVec3,
    pub v: UnitVec3,
    /// Points from the target center toward the transmitter.
    pub w: UnitVec3,
    /// Spacing between adjacent rays (m).
    pub pitch: f64,
    pub width: usize,
    pub height: usize,
    /// Distance from the target center to the screen plane (m).
    pub standoff: f64,
}

/// Propagation direction `w` for spherical angles (degrees).
pub fn direction_from_angles(theta_deg: f64, phi_deg: f64) -> UnitVec3 {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    UnitVec3::new_normalize(Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos()))
}

/// Unit vectors `(theta_hat, phi_hat)` of the spherical basis at the given angles.
pub fn spherical_basis(theta_deg: f64, phi_deg: f64) -> (UnitVec3, UnitVec3) {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    let theta_hat = Vec3::new(t.cos() * p.cos(), t.cos() * p.sin(), -t.sin());
    let phi_hat = Vec3::new(-p.sin(), p.cos(), 0.0);
    (
        UnitVec3::new_normalize(theta_hat),
        UnitVec3::new_normalize(phi_hat),
    )
}

impl ScreenFrame {
    /// Builds a frame from explicit parts, checking orthonormality and
    /// right-handedness.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        origin: Vec3,
        u: UnitVec3,
        v: UnitVec3,
        w: UnitVec3,
        pitch: f64,
        width: usize,
        height: usize,
        standoff: f64,
    ) -> Result<Self> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::InvalidArgument(format!("pitch must be positive, got {pitch}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("screen must have at least one pixel".into()));
        }
        let dots = [u.dot(*v), u.dot(*w), v.dot(*w)];
        if dots.iter().any(|d| d.abs() > ORTHO_TOLERANCE) {
            return Err(Error::InvalidGeometry(format!("screen axes not orthogonal: {dots:?}")));
        }
        let handed = u.cross(*v).dot(*w);
        if (handed - 1.0).abs() > ORTHO_TOLERANCE {
            return Err(Error::InvalidGeometry(format!(
                "screen axes not right-handed: (u x v).w = {handed}"
            )));
        }
        Ok(ScreenFrame {
            origin,
            u,
            v,
            w,
            pitch,
            width,
            height,
            standoff,
        })
    }

    /// Frame looking at `center` from spherical direction `(theta, phi)`.
    ///
    /// `w = (sinθcosφ, sinθsinφ, cosθ)`, `u = normalize(z × w)` (x when
    /// θ = 0), `v = w × u`. The screen sits `2·radius` from the center and
    /// covers the bounding sphere plus one pitch of margin per side.
    pub fn looking_from(
        theta_deg: f64,
        phi_deg: f64,
        center: Vec3,
        bounding_radius: f64,
        pitch: f64,
    ) -> Result<Self> {
        Self::facing(direction_from_angles(theta_deg, phi_deg), center, bounding_radius, pitch)
    }

    /// Same construction as [`looking_from`](Self::looking_from) for an
    /// explicit sensor direction `w`.
    pub fn facing(w: UnitVec3, center: Vec3, bounding_radius: f64, pitch: f64) -> Result<Self> {
        if !(bounding_radius > 0.0 && bounding_radius.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "bounding radius must be positive, got {bounding_radius}"
            )));
        }
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::InvalidArgument(format!("pitch must be positive, got {pitch}")));
        }
        let z_cross_w = Vec3::Z.cross(*w);
        let u = if z_cross_w.norm() > 1e-12 {
            UnitVec3::new_normalize(z_cross_w)
        } else {
            UnitVec3::X
        };
        let v = UnitVec3::new_normalize(w.cross(*u));
        let diameter = 2.0 * bounding_radius;
        let side = ((diameter + 2.0 * pitch) / pitch).ceil() as usize;
        let standoff = 2.0 * bounding_radius;
        ScreenFrame::new(center + *w * standoff, u, v, w, pitch, side, side, standoff)
    }

    /// Propagation direction of every launched ray.
    #[inline]
    pub fn ray_dir(&self) -> UnitVec3 {
        -self.w
    }

    /// Launch point and direction of pixel `(i, j)`; `i` runs along `u`
    /// (columns), `j` along `v` (rows).
    pub fn pixel_ray(&self, i: usize, j: usize) -> Result<(Vec3, UnitVec3)> {
        if i >= self.width || j >= self.height {
            return Err(Error::Index {
                i,
                j,
                width: self.width,
                height: self.height,
            });
        }
        Ok((self.pixel_origin(i, j), self.ray_dir()))
    }

    /// Unchecked variant of [`pixel_ray`](Self::pixel_ray) for hot loops.
    #[inline]
    pub fn pixel_origin(&self, i: usize, j: usize) -> Vec3 {
        let du = (i as f64 - (self.width as f64 - 1.0) / 2.0) * self.pitch;
        let dv = (j as f64 - (self.height as f64 - 1.0) / 2.0) * self.pitch;
        self.origin + *self.u * du + *self.v * dv
    }

    /// Center of the target the screen was aimed at.
    pub fn target_center(&self) -> Vec3 {
        self.origin - *self.w * self.standoff
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Expresses a world vector in the `(u, v, w)` basis.
    #[inline]
    pub fn to_local(&self, world: Vec3) -> Vec3 {
        Vec3::new(world.dot(*self.u), world.dot(*self.v), world.dot(*self.w))
    }

    /// Maps `(u, v, w)` components back to world coordinates.
    #[inline]
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        *self.u * local.x + *self.v * local.y + *self.w * local.z
    }

    /// Nominal standoff recovered from the resolution rule used by
    /// [`looking_from`](Self::looking_from); files do not carry it.
    pub(crate) fn nominal_standoff(width: usize, height: usize, pitch: f64) -> f64 {
        (width.max(height) as f64 - 2.0).max(1.0) * pitch
    }
}

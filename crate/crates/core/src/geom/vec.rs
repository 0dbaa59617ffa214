//! Vector primitives shared by the geometric and field code.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Div, Index, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Vec3 { x: v, y: v, z: v }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn abs(self) -> Vec3 {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    #[inline]
    pub fn mul_elem(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn max_component(self) -> f64 {
        self.x.max(self.y).max(self.z)
    }

    /// Index (0, 1, 2) of the largest component.
    pub fn max_axis(self) -> usize {
        if self.x >= self.y && self.x >= self.z {
            0
        } else if self.y >= self.z {
            1
        } else {
            2
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Normalized copy, or `None` for a (near) zero vector.
    pub fn try_normalize(self) -> Option<UnitVec3> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(UnitVec3(self / n))
        } else {
            None
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A direction: a [`Vec3`] whose norm is 1 within 1e-9.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::X);
    pub const Y: UnitVec3 = UnitVec3(Vec3::Y);
    pub const Z: UnitVec3 = UnitVec3(Vec3::Z);

    pub const NORM_TOLERANCE: f64 = 1e-9;

    /// Normalizes `v`. Panics on a zero vector; use [`Vec3::try_normalize`]
    /// when the input may degenerate.
    pub fn new_normalize(v: Vec3) -> Self {
        v.try_normalize()
            .unwrap_or_else(|| panic!("cannot normalize degenerate vector {v}"))
    }

    /// Wraps `v` without renormalizing if it is already unit within tolerance.
    pub fn try_from_unit(v: Vec3) -> Option<Self> {
        ((v.norm() - 1.0).abs() <= Self::NORM_TOLERANCE).then_some(UnitVec3(v))
    }

    #[inline]
    pub fn into_inner(self) -> Vec3 {
        self.0
    }
}

impl Deref for UnitVec3 {
    type Target = Vec3;
    #[inline]
    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    #[inline]
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// Three complex components; used for phasor E and H fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Complex3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl Complex3 {
    pub const ZERO: Complex3 = Complex3 {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
        z: Complex64::new(0.0, 0.0),
    };

    pub const fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Complex3 { x, y, z }
    }

    /// `a * v` for a complex amplitude and a real vector.
    pub fn from_real(v: Vec3, a: Complex64) -> Self {
        Complex3::new(a * v.x, a * v.y, a * v.z)
    }

    pub fn re(self) -> Vec3 {
        Vec3::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn im(self) -> Vec3 {
        Vec3::new(self.x.im, self.y.im, self.z.im)
    }

    /// Bilinear (non-conjugating) product with a real vector.
    pub fn dot_real(self, v: Vec3) -> Complex64 {
        self.x * v.x + self.y * v.y + self.z * v.z
    }

    /// `self × v` for a real right operand.
    pub fn cross_real(self, v: Vec3) -> Complex3 {
        Complex3::new(
            self.y * v.z - self.z * v.y,
            self.z * v.x - self.x * v.z,
            self.x * v.y - self.y * v.x,
        )
    }

    /// `v × self` for a real left operand.
    pub fn real_cross(v: Vec3, c: Complex3) -> Complex3 {
        -c.cross_real(v)
    }

    pub fn scale(self, s: Complex64) -> Complex3 {
        Complex3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn norm_squared(self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }
}

impl Add for Complex3 {
    type Output = Complex3;
    fn add(self, o: Complex3) -> Complex3 {
        Complex3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Complex3 {
    type Output = Complex3;
    fn sub(self, o: Complex3) -> Complex3 {
        Complex3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Complex3 {
    type Output = Complex3;
    fn neg(self) -> Complex3 {
        Complex3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Complex3 {
    type Output = Complex3;
    fn mul(self, s: f64) -> Complex3 {
        Complex3::new(self.x * s, self.y * s, self.z * s)
    }
}

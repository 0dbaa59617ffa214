//! Electromagnetic field mathematics: plane waves, PEC reflection of
//! polarization, the closed-form physical-optics tube integral, per-ray
//! scattered-field contributions and RCS.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::{spherical_basis, Complex3, UnitVec3, Vec3};
use crate::mbc::BounceChain;

/// Free-space wave impedance (Ω).
pub const ETA0: f64 = 376.730313668;
/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Floor reported for a vanishing scattered field.
pub const RCS_FLOOR_DBSM: f64 = -300.0;

const TRANSVERSE_TOLERANCE: f64 = 1e-6;
const NORMAL_INCIDENCE: f64 = 1e-9;

/// Incident plane wave `E0·ê·e^{jφ0}·e^{-j k0 k̂·r}`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub frequency: f64,
    pub k0: f64,
    pub dir: UnitVec3,
    pub pol: UnitVec3,
    pub amplitude: f64,
    pub phase: f64,
}

/// Which spherical unit vector carries the incident E-field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    Theta,
    Phi,
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "theta" => Ok(Polarization::Theta),
            "phi" => Ok(Polarization::Phi),
            other => Err(Error::Config(format!("polarization must be theta or phi, got '{other}'"))),
        }
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::Theta => "theta",
            Polarization::Phi => "phi",
        })
    }
}

pub fn wavelength(frequency: f64) -> f64 {
    C0 / frequency
}

pub fn wavenumber(frequency: f64) -> f64 {
    2.0 * PI * frequency / C0
}

impl PlaneWave {
    pub fn new(frequency: f64, dir: UnitVec3, pol: UnitVec3, amplitude: f64) -> Result<Self> {
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidArgument(format!("frequency must be positive, got {frequency}")));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!("amplitude must be positive, got {amplitude}")));
        }
        if dir.dot(*pol).abs() > 1e-9 {
            return Err(Error::InvalidField(format!(
                "polarization not transverse: e.k = {}",
                dir.dot(*pol)
            )));
        }
        Ok(PlaneWave {
            frequency,
            k0: wavenumber(frequency),
            dir,
            pol,
            amplitude,
            phase: 0.0,
        })
    }

    /// Wave arriving from spherical direction `(theta, phi)`, i.e.
    /// travelling along `-w`, polarized along `θ̂` or `φ̂` of that direction.
    pub fn incoming(frequency: f64, theta_deg: f64, phi_deg: f64, pol: Polarization, amplitude: f64) -> Result<Self> {
        let (theta_hat, phi_hat) = spherical_basis(theta_deg, phi_deg);
        let w = crate::geom::direction_from_angles(theta_deg, phi_deg);
        let e = match pol {
            Polarization::Theta => theta_hat,
            Polarization::Phi => phi_hat,
        };
        PlaneWave::new(frequency, -w, e, amplitude)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency)
    }

    /// Unit magnetic polarization `k̂ × ê`.
    pub fn h_pol(&self) -> UnitVec3 {
        UnitVec3::new_normalize(self.dir.cross(*self.pol))
    }

    /// Complex E-field phasor at the phase reference.
    pub fn field(&self) -> Complex3 {
        Complex3::from_real(*self.pol, Complex64::from_polar(self.amplitude, self.phase))
    }
}

/// Local polarization basis of one reflection.
///
/// `e_v` is perpendicular to the plane of incidence; `e_p_in × e_v = k̂ⁱ`
/// and `e_p_out × e_v = k̂ʳ`.
#[derive(Clone, Copy, Debug)]
pub struct PolBasis {
    pub e_v: UnitVec3,
    pub e_p_in: UnitVec3,
    pub e_p_out: UnitVec3,
}

/// Mirror direction `k − 2(k·n)n`.
#[inline]
pub fn reflect(k: UnitVec3, n: UnitVec3) -> UnitVec3 {
    UnitVec3::new_normalize(mirror(*k, n))
}

/// Mirror of an arbitrary vector in the plane with normal `n`.
#[inline]
pub fn mirror(x: Vec3, n: UnitVec3) -> Vec3 {
    x - *n * (2.0 * x.dot(*n))
}

/// `e_v = k̂ⁱ × n̂ / |…|`, `e_p_in = e_v × k̂ⁱ`, `e_p_out = e_v × k̂ʳ`.
///
/// At normal incidence `e_v = normalize(k̂ⁱ × a)` with `a = x̂`, or `ŷ`
/// when `|k̂ⁱ·x̂| > 0.9`.
pub fn pol_basis(k_i: UnitVec3, k_r: UnitVec3, n: UnitVec3) -> PolBasis {
    let c = k_i.cross(*n);
    let e_v = if c.norm() >= NORMAL_INCIDENCE {
        UnitVec3::new_normalize(c)
    } else {
        let a = if k_i.x.abs() > 0.9 { Vec3::Y } else { Vec3::X };
        UnitVec3::new_normalize(k_i.cross(a))
    };
    PolBasis {
        e_v,
        e_p_in: UnitVec3::new_normalize(e_v.cross(*k_i)),
        e_p_out: UnitVec3::new_normalize(e_v.cross(*k_r)),
    }
}

/// PEC reflection: `Γp = +1` on the parallel component, `Γv = −1` on the
/// perpendicular one.
pub fn reflect_field(e_i: Complex3, basis: &PolBasis) -> Result<Complex3> {
    let k_i = basis.e_p_in.cross(*basis.e_v);
    let along = e_i.dot_real(k_i).norm();
    if along > TRANSVERSE_TOLERANCE * e_i.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidField(format!(
            "incident field has longitudinal component {along:e}"
        )));
    }
    Ok(reflect_transverse(e_i, basis))
}

#[inline]
fn reflect_transverse(e_i: Complex3, b: &PolBasis) -> Complex3 {
    let e_p = e_i.dot_real(*b.e_p_in);
    let e_v = e_i.dot_real(*b.e_v);
    Complex3::from_real(*b.e_p_out, e_p) - Complex3::from_real(*b.e_v, e_v)
}

/// Field on every leg of a reflection sequence: `legs[b] = (k̂ⁱ, n̂)` of
/// bounce `b`; output `[E₀, E₁, …]` has one more entry than `legs`.
pub fn transport_field(e0: Complex3, legs: &[(UnitVec3, UnitVec3)]) -> Vec<Complex3> {
    let mut out = Vec::with_capacity(legs.len() + 1);
    let mut e = e0;
    out.push(e);
    for &(k_i, n) in legs {
        let basis = pol_basis(k_i, reflect(k_i, n), n);
        e = reflect_transverse(e, &basis);
        out.push(e);
    }
    out
}

/// Unnormalized `sin(x)/x`, continuous at 0.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Footprint of one ray tube on the surface it hits: the screen edge
/// vectors `u`, `v` projected along the incident direction onto the
/// tangent plane at `p`.
#[derive(Clone, Copy, Debug)]
pub struct TubeGeometry {
    pub p: Vec3,
    pub n: UnitVec3,
    pub u: Vec3,
    pub v: Vec3,
    pub u_proj: Vec3,
    pub v_proj: Vec3,
}

impl TubeGeometry {
    /// Fails when `k_i` runs parallel to the surface.
    pub fn new(p: Vec3, n: UnitVec3, u: Vec3, v: Vec3, k_i: UnitVec3) -> Result<Self> {
        let nk = n.dot(*k_i);
        if nk.abs() < NORMAL_INCIDENCE {
            return Err(Error::InvalidGeometry("ray grazes the surface".into()));
        }
        let project = |x: Vec3| x - *k_i * (n.dot(x) / nk);
        Ok(TubeGeometry {
            p,
            n,
            u,
            v,
            u_proj: project(u),
            v_proj: project(v),
        })
    }

    /// Area of the parallelogram spanned by the projected edges.
    pub fn area(&self) -> f64 {
        self.u_proj.cross(self.v_proj).norm()
    }

    /// The footprint integral without the `e^{-jΔk·p}` position phase.
    pub fn footprint(&self, k_i_vec: Vec3, k_s_vec: Vec3) -> f64 {
        let dk = k_i_vec - k_s_vec;
        self.area() * sinc(0.5 * dk.dot(self.u_proj)) * sinc(0.5 * dk.dot(self.v_proj))
    }
}

/// `∬ e^{-jΔk·r'} dS'` over the tube footprint, `Δk = kⁱ − kˢ` (wave
/// vectors in rad/m): area · sinc(Δk·u'/2) · sinc(Δk·v'/2) · e^{-jΔk·p}.
pub fn tube_integral(geom: &TubeGeometry, k_i_vec: Vec3, k_s_vec: Vec3) -> Complex64 {
    let dk = k_i_vec - k_s_vec;
    Complex64::from_polar(geom.footprint(k_i_vec, k_s_vec), -dk.dot(geom.p))
}

/// Physical-optics field radiated by the last footprint of one ray.
///
/// Polarization and the screen pixel edges `pixel_u`, `pixel_v` are carried
/// through the intermediate mirror reflections; the last bounce then
/// radiates `−(jk0/2π)·F·[(n̂ × (k̂ × E)) × k̂ˢ] × k̂ˢ · e^{−j(k0 d − k0 k̂ˢ·p)}`
/// where `F` is the footprint integral and `d` the path length from the
/// screen. Invalid or occluded chains give exactly zero.
pub fn ray_contribution(chain: &BounceChain, wave: &PlaneWave, pixel_u: Vec3, pixel_v: Vec3, k_s: UnitVec3) -> Complex3 {
    let Some(last) = chain.bounces.last() else {
        return Complex3::ZERO;
    };
    if !chain.valid || !last.hit.vis {
        return Complex3::ZERO;
    }
    let mut e = wave.field();
    let (mut u, mut v) = (pixel_u, pixel_v);
    for b in &chain.bounces[..chain.bounces.len() - 1] {
        let n = b.hit.nor;
        let basis = pol_basis(b.incident, reflect(b.incident, n), n);
        e = reflect_transverse(e, &basis);
        u = mirror(u, n);
        v = mirror(v, n);
    }
    let (k_i, n, p) = (last.incident, last.hit.nor, last.hit.pos);
    let Ok(tube) = TubeGeometry::new(p, n, u, v, k_i) else {
        return Complex3::ZERO;
    };
    let k0 = wave.k0;
    let footprint = tube.footprint(*k_i * k0, *k_s * k0);
    // H scaled by 1/η0 so that the η0 of the prefactor cancels.
    let h = Complex3::real_cross(*k_i, e);
    let j = Complex3::real_cross(*n, h);
    let radiated = j.cross_real(*k_s).cross_real(*k_s);
    let phase = -(k0 * last.path_length - k0 * k_s.dot(p));
    let scale = Complex64::new(0.0, -k0 / (2.0 * PI)) * footprint * Complex64::from_polar(1.0, phase);
    radiated.scale(scale)
}

/// Order-robust sum: Neumaier-compensated per real component.
pub fn total_field<'a>(contributions: impl IntoIterator<Item = &'a Complex3>) -> Complex3 {
    let mut acc = [Neumaier::default(); 6];
    for c in contributions {
        for (a, x) in acc.iter_mut().zip([c.x.re, c.x.im, c.y.re, c.y.im, c.z.re, c.z.im]) {
            a.add(x);
        }
    }
    let s = acc.map(|a| a.value());
    Complex3::new(
        Complex64::new(s[0], s[1]),
        Complex64::new(s[2], s[3]),
        Complex64::new(s[4], s[5]),
    )
}

#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Radar cross section in dBsm: `10·log10(4π|E_s|²/E0²)`, floored at
/// [`RCS_FLOOR_DBSM`].
pub fn rcs(e_s: Complex3, e0: f64) -> f64 {
    let sigma = 4.0 * PI * e_s.norm_squared() / (e0 * e0);
    if sigma > 0.0 {
        (10.0 * sigma.log10()).max(RCS_FLOOR_DBSM)
    } else {
        RCS_FLOOR_DBSM
    }
}

pub fn to_dbsm(sigma_m2: f64) -> f64 {
    if sigma_m2 > 0.0 {
        (10.0 * sigma_m2.log10()).max(RCS_FLOOR_DBSM)
    } else {
        RCS_FLOOR_DBSM
    }
}

//! The quaternion algebra ℍ together with the imaginary unit sphere 𝕊, the
//! complex planes `C_i` and the 2-spheres `[s] = { Re(s) + i|Im(s)| : i ∈ 𝕊 }`.
//!
//! Quaternions are stored scalar first, `w + x·e₁ + y·e₂ + z·e₃`, and
//! serialize as the 4-element array `[w, x, y, z]`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for equality tests on real scalars.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Draws a quaternion with i.i.d. standard normal components.
    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        )
    }

    #[inline]
    pub fn re(self) -> f64 {
        self.w
    }

    #[inline]
    pub fn im(self) -> Quaternion {
        Self::new(0.0, self.x, self.y, self.z)
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// The modulus `|q|`.
    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `|Im(q)|`.
    #[inline]
    pub fn imag_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn scale(self, c: f64) -> Self {
        Self::new(self.w * c, self.x * c, self.y * c, self.z * c)
    }

    /// Real part of `conj(self)·other`, i.e. the Euclidean inner product on ℝ⁴.
    #[inline]
    pub fn real_dot(self, other: Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroQuaternion);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Quaternion::ONE, |acc, _| acc * self)
    }

    pub fn is_real(self) -> bool {
        self.imag_norm() <= EPS
    }

    pub fn approx_eq(self, other: Quaternion, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Whether `self ∈ [s]`, i.e. both share real part and imaginary modulus.
    pub fn same_sphere(self, s: Quaternion) -> bool {
        (self.re() - s.re()).abs() <= EPS && (self.imag_norm() - s.imag_norm()).abs() <= EPS
    }

    /// The 2-sphere `[self]`.
    pub fn sphere(self) -> Sphere {
        Sphere::new(self.re(), self.imag_norm())
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Self::real(w)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}e1 {:+}e2 {:+}e3", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    /// Hamilton product with `e₁e₂ = e₃`, `e₂e₃ = e₁`, `e₃e₁ = e₂`.
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        self.scale(1.0 / c)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

/// An element of 𝕊: a purely imaginary quaternion of modulus one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Quaternion", into = "Quaternion")]
pub struct ImaginaryUnit(Quaternion);

impl ImaginaryUnit {
    pub const E1: ImaginaryUnit = ImaginaryUnit(Quaternion::E1);
    pub const E2: ImaginaryUnit = ImaginaryUnit(Quaternion::E2);
    pub const E3: ImaginaryUnit = ImaginaryUnit(Quaternion::E3);

    pub fn new(q: Quaternion) -> Result<Self> {
        if q.re().abs() > EPS || (q.norm() - 1.0).abs() > EPS {
            return Err(Error::NotImaginaryUnit(q));
        }
        Ok(Self(q))
    }

    /// Normalizes the imaginary part of `q`.
    pub fn from_direction(q: Quaternion) -> Result<Self> {
        let im = q.im();
        let r = im.norm();
        if r == 0.0 {
            return Err(Error::NotImaginaryUnit(q));
        }
        Ok(Self(im.scale(1.0 / r)))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quaternion::new(
                0.0,
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            );
            if let Ok(u) = Self::from_direction(q) {
                return u;
            }
        }
    }

    #[inline]
    pub fn get(self) -> Quaternion {
        self.0
    }
}

impl TryFrom<Quaternion> for ImaginaryUnit {
    type Error = Error;
    fn try_from(q: Quaternion) -> Result<Self> {
        Self::new(q)
    }
}

impl From<ImaginaryUnit> for Quaternion {
    fn from(u: ImaginaryUnit) -> Self {
        u.0
    }
}

/// `t·e^{iω} = t(cos ω + i sin ω)`, a point of the ray `S_ω`.
pub fn ray_point(t: f64, omega: f64, unit: ImaginaryUnit) -> Result<Quaternion> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::NonPositiveRayParameter(t));
    }
    let (sin, cos) = omega.sin_cos();
    if sin.abs() <= EPS {
        // On the real axis the unit drops out entirely.
        return Ok(Quaternion::real(t * cos.signum()));
    }
    Ok(Quaternion::real(t * cos) + unit.get().scale(t * sin))
}

/// A 2-sphere `[s]`, described by its real part and the radius `|Im(s)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub re: f64,
    pub radius: f64,
}

impl Sphere {
    pub fn new(re: f64, radius: f64) -> Self {
        Self {
            re,
            radius: radius.abs(),
        }
    }

    /// Canonical representative `Re(s) + |Im(s)|·e₁`.
    pub fn representative(self) -> Quaternion {
        Quaternion::new(self.re, self.radius, 0.0, 0.0)
    }

    pub fn contains(self, q: Quaternion) -> bool {
        self.representative().same_sphere(q)
    }

    /// Modulus shared by every element of the sphere.
    pub fn modulus(self) -> f64 {
        self.re.hypot(self.radius)
    }

    /// Argument in `[0, π]` shared by every element of the sphere.
    pub fn argument(self) -> f64 {
        self.radius.atan2(self.re)
    }

    pub fn approx_eq(self, other: Sphere, tol: f64) -> bool {
        (self.re - other.re).abs() <= tol && (self.radius - other.radius).abs() <= tol
    }
}

impl fmt::Display for Sphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.re, self.radius)
    }
}

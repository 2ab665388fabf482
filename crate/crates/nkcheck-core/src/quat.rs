//! Quaternion and imaginary-quaternion algebra.
//!
//! Everything downstream works in the (α, β) coordinates of tangent
//! vectors, so imaginary quaternions get their own type: promotion to a
//! full quaternion is explicit and a stray real part can never leak in
//! silently.

use std::ops::{Add, Mul, Neg, Sub};

use crate::{CoreError, Result};

/// Degeneracy threshold for normalization.
pub const EPS_UNIT: f64 = 1e-12;

/// A quaternion w + xi + yj + zk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product on ℝ⁴.
    pub fn dot(self, rhs: Self) -> f64 {
        self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Unit quaternion parallel to `self`.
    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if n <= EPS_UNIT {
            return Err(CoreError::DegenerateQuaternion(n));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Vector part as an imaginary quaternion.
    pub fn im(self) -> ImaginaryQuaternion {
        ImaginaryQuaternion::new(self.x, self.y, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    /// Hamilton product.
    fn mul(self, r: Self) -> Self {
        Self::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

/// An imaginary quaternion xi + yj + zk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImaginaryQuaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ImaginaryQuaternion {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);
    pub const I: Self = Self::new(1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 1.0);

    /// Explicit promotion to a quaternion with zero real part.
    pub fn promote(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    /// Vector cross product; equals ½(ab − ba) on imaginary quaternions.
    pub fn cross(self, r: Self) -> Self {
        Self::new(
            self.y * r.z - self.z * r.y,
            self.z * r.x - self.x * r.z,
            self.x * r.y - self.y * r.x,
        )
    }

    pub fn dot(self, r: Self) -> f64 {
        self.x * r.x + self.y * r.y + self.z * r.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// exp(self): the unit quaternion cos‖v‖ + sin‖v‖ · v/‖v‖.
    pub fn exp(self) -> Quaternion {
        let n = self.norm();
        if n < 1e-300 {
            return Quaternion::ONE;
        }
        let s = n.sin() / n;
        Quaternion::new(n.cos(), self.x * s, self.y * s, self.z * s)
    }

    /// Conjugation u·self·ū by a unit quaternion; stays imaginary.
    pub fn conjugate_by(self, u: Quaternion) -> Self {
        (u * self.promote() * u.conj()).im()
    }
}

impl Add for ImaginaryQuaternion {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Self::new(self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for ImaginaryQuaternion {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for ImaginaryQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

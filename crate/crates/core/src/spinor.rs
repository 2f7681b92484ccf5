//! Spinors, 3-vectors, and the maps between them.
//!
//! A spinor is a complex 2-vector `z = (z0, z1)`. Its dual under the SU(2)
//! structure map is `|z] = (-conj(z1), conj(z0))`, and the sandwich with the
//! Pauli vector gives a 3-vector of norm `<z|z>`. Multiplying a spinor by a
//! phase leaves the vector unchanged, so a spinor is a vector plus a frame
//! phase.

use crate::{Error, Result};
use num_complex::Complex64;

/// A complex 2-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub z0: Complex64,
    pub z1: Complex64,
}

impl Spinor {
    pub fn new(z0: Complex64, z1: Complex64) -> Self {
        Spinor { z0, z1 }
    }

    pub fn from_reals(re0: f64, im0: f64, re1: f64, im1: f64) -> Self {
        Spinor {
            z0: Complex64::new(re0, im0),
            z1: Complex64::new(re1, im1),
        }
    }

    pub fn zero() -> Self {
        Spinor {
            z0: Complex64::new(0.0, 0.0),
            z1: Complex64::new(0.0, 0.0),
        }
    }

    /// Squared norm `<z|z> = |z0|^2 + |z1|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.z0.norm_sqr() + self.z1.norm_sqr()
    }

    /// Dual spinor `|z] = (-conj(z1), conj(z0))`.
    ///
    /// Applying it twice returns `-z`, and `<z|z] = 0`.
    pub fn dual(&self) -> Spinor {
        Spinor {
            z0: -self.z1.conj(),
            z1: self.z0.conj(),
        }
    }

    /// Hermitian pairing `<self|other>`.
    pub fn dot(&self, other: &Spinor) -> Complex64 {
        self.z0.conj() * other.z0 + self.z1.conj() * other.z1
    }

    /// Holomorphic pairing `[self|other> = z0 w1 - z1 w0`.
    pub fn fdot(&self, other: &Spinor) -> Complex64 {
        self.z0 * other.z1 - self.z1 * other.z0
    }

    /// Stereographic coordinate `zeta = z1/z0`.
    pub fn zeta(&self) -> Complex64 {
        self.z1 / self.z0
    }

    pub fn scale(&self, s: Complex64) -> Spinor {
        Spinor {
            z0: s * self.z0,
            z1: s * self.z1,
        }
    }
}

/// A vector in R^3, in area units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(s * self.x, s * self.y, s * self.z)
    }
}

/// Pauli sandwich `V = <z|sigma|z>`, returned with its norm `V = <z|z>`.
pub fn spinor_to_vector(z: &Spinor) -> (Vec3, f64) {
    let cross = z.z0.conj() * z.z1;
    let v = Vec3 {
        x: 2.0 * cross.re,
        y: 2.0 * cross.im,
        z: z.z0.norm_sqr() - z.z1.norm_sqr(),
    };
    (v, z.norm_sq())
}

/// Inverse of [`spinor_to_vector`] with a chosen overall phase `theta`.
///
/// The azimuthal phase is read off the transverse components; at the poles
/// it is undefined and fixed to zero so that roundtrips are deterministic.
pub fn vector_to_spinor(v: &Vec3, theta: f64) -> Result<Spinor> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateNormal);
    }
    let transverse = (v.x * v.x + v.y * v.y).sqrt();
    let phi = if transverse == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(v.x / transverse, v.y / transverse)
    };
    let up = ((norm + v.z).max(0.0) / 2.0).sqrt();
    let down = ((norm - v.z).max(0.0) / 2.0).sqrt();
    let overall = Complex64::from_polar(1.0, theta);
    Ok(Spinor {
        z0: overall * up,
        z1: overall * phi * down,
    })
}

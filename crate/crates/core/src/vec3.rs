use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or tangent vector in R^3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0, 0.0, 0.0]);
    pub const K: Vec3 = Vec3([0.0, 0.0, 1.0]);
    pub const E: Vec3 = Vec3([0.0, 1.0, 0.0]);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.norm())
    }

    /// Generator of rotations about the k-axis: R(x, y, z) = (-y, x, 0).
    #[inline]
    pub fn rot(self) -> Vec3 {
        Vec3([-self.0[1], self.0[0], 0.0])
    }

    /// e^{aR} applied to self.
    #[inline]
    pub fn rotate_k(self, a: f64) -> Vec3 {
        let (s, c) = a.sin_cos();
        Vec3([c * self.0[0] - s * self.0[1], s * self.0[0] + c * self.0[1], self.0[2]])
    }

    /// Tangential part relative to the unit vector `v`.
    #[inline]
    pub fn tangent_at(self, v: Vec3) -> Vec3 {
        self - v * v.dot(self)
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
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
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, a: f64) -> Vec3 {
        Vec3([self.0[0] * a, self.0[1] * a, self.0[2] * a])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

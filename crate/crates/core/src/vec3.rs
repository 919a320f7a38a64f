use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Small fixed-size 3-vector used for positions, velocities and face normals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Self([T::zero(); 3])
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Self([T::of(v[0]), T::of(v[1]), T::of(v[2])])
    }

    pub fn to_f64(self) -> [f64; 3] {
        [
            self.0[0].to_f64_lossy(),
            self.0[1].to_f64_lossy(),
            self.0[2].to_f64_lossy(),
        ]
    }

    #[inline]
    pub fn x(&self) -> T {
        self.0[0]
    }
    #[inline]
    pub fn y(&self) -> T {
        self.0[1]
    }
    #[inline]
    pub fn z(&self) -> T {
        self.0[2]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    #[inline]
    pub fn cross(&self, other: &Self) -> Self {
        let [a, b, c] = self.0;
        let [d, e, f] = other.0;
        Self([b * f - c * e, c * d - a * f, a * e - b * d])
    }

    #[inline]
    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Returns `None` when the norm is below `eps`.
    pub fn normalized(&self, eps: T) -> Option<Self> {
        let n = self.norm();
        if n > eps {
            Some(*self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Some unit vector orthogonal to `self` (assumed unit length).
    pub fn any_orthogonal(&self) -> Self {
        // Cross with the coordinate axis least aligned with self.
        let a = self.0.map(|v| v.abs());
        let helper = if a[0] <= a[1] && a[0] <= a[2] {
            Self::new(T::one(), T::zero(), T::zero())
        } else if a[1] <= a[2] {
            Self::new(T::zero(), T::one(), T::zero())
        } else {
            Self::new(T::zero(), T::zero(), T::one())
        };
        let o = self.cross(&helper);
        o * (T::one() / o.norm())
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self(self.0.map(|v| v * s))
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

impl<T: Real> From<[T; 3]> for Vec3<T> {
    fn from(v: [T; 3]) -> Self {
        Self(v)
    }
}

//! Real 2×2 matrices used as transfer matrices.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

/// A real 2×2 matrix, row-major. Transfer matrices of the Schrödinger
/// equation have unit determinant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    /// Rotation matrix `[[cos t, sin t], [-sin t, cos t]]`, i.e. clockwise
    /// rotation of the plane by `t`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::new(c, s, -s, c)
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm(&self) -> f64 {
        let f2 = self.frobenius_sq();
        let d = self.det();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0);
        ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    /// Inverse assuming unit determinant.
    pub fn inverse_unimodular(&self) -> Self {
        Self::new(self.m22, -self.m12, -self.m21, self.m11)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    pub fn max_entry_diff(&self, other: &Self) -> f64 {
        (self.m11 - other.m11)
            .abs()
            .max((self.m12 - other.m12).abs())
            .max((self.m21 - other.m21).abs())
            .max((self.m22 - other.m22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

impl Mul for TransferMatrix {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        Self::new(
            self.m11 * r.m11 + self.m12 * r.m21,
            self.m11 * r.m12 + self.m12 * r.m22,
            self.m21 * r.m11 + self.m22 * r.m21,
            self.m21 * r.m12 + self.m22 * r.m22,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_matches_singular_values() {
        // diag(3, 1/3): singular values 3 and 1/3.
        assert!((TransferMatrix::diag(3.0, 1.0 / 3.0).norm() - 3.0).abs() < 1e-14);
        assert!((TransferMatrix::rotation(0.7).norm() - 1.0).abs() < 1e-14);
        // Shear [[1, s], [0, 1]] has norm s/2 + sqrt(1 + s²/4).
        let s: f64 = 2.5;
        let expected = s / 2.0 + (1.0 + s * s / 4.0).sqrt();
        assert!((TransferMatrix::new(1.0, s, 0.0, 1.0).norm() - expected).abs() < 1e-14);
    }

    #[test]
    fn inverse_and_product() {
        let m = TransferMatrix::new(2.0, 3.0, 1.0, 2.0);
        let id = m * m.inverse_unimodular();
        assert!(id.max_entry_diff(&TransferMatrix::IDENTITY) < 1e-15);
    }
}

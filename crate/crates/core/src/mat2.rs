//! Plain 2x2 real matrices.
//!
//! Everything runs in `f64`. The spectral norm (largest singular value) has a
//! closed form in dimension two: with `f = sum of squared entries` and
//! `d = det`, the squared singular values are the roots of
//! `s^4 - f s^2 + d^2`, so
//!
//! ```text
//! norm = sqrt((f + sqrt(f^2 - 4 d^2)) / 2)
//! ```
//!
//! which is exact up to rounding, with no iteration.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn zero() -> Self {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diagonal(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    /// Lower-triangular unipotent shear `[[1, 0], [s, 1]]`.
    pub const fn lower_shear(s: f64) -> Self {
        Mat2::new(1.0, 0.0, s, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// Largest singular value by the closed form above.
    ///
    /// Infallible for speed in iteration loops; non-finite entries propagate
    /// to a non-finite result. Use [`Mat2::try_spectral_norm`] at validation
    /// boundaries.
    pub fn spectral_norm(&self) -> f64 {
        let f = self.a11 * self.a11
            + self.a12 * self.a12
            + self.a21 * self.a21
            + self.a22 * self.a22;
        let d = self.det();
        // Rounding can push the discriminant slightly negative when the two
        // singular values coincide; clamp instead of producing NaN.
        let disc = (f * f - 4.0 * d * d).max(0.0);
        ((f + disc.sqrt()) * 0.5).sqrt()
    }

    /// Checked spectral norm: rejects non-finite entries.
    pub fn try_spectral_norm(&self) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::NonFiniteMatrix);
        }
        Ok(self.spectral_norm())
    }

    /// Inverse via the adjugate. For `det == 1` the result is the adjugate
    /// itself, exactly (division by 1.0 is the identity on floats).
    pub fn inverse(&self) -> Result<Mat2> {
        if !self.is_finite() {
            return Err(Error::NonFiniteMatrix);
        }
        let det = self.det();
        if det.abs() <= 1e-300 {
            return Err(Error::SingularMatrix { det });
        }
        Ok(Mat2::new(
            self.a22 / det,
            -self.a12 / det,
            -self.a21 / det,
            self.a11 / det,
        ))
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_identity_is_one() {
        assert_eq!(Mat2::identity().spectral_norm(), 1.0);
    }

    #[test]
    fn norm_of_diagonal_is_max_abs() {
        assert_eq!(Mat2::diagonal(4.0, 0.25).spectral_norm(), 4.0);
        assert_eq!(Mat2::diagonal(-3.0, 2.0).spectral_norm(), 3.0);
    }

    #[test]
    fn norm_of_unit_shear_is_golden_ratio() {
        // Largest singular value of [[1,0],[1,1]]: sqrt of the top eigenvalue
        // of [[2,1],[1,1]], which is (3+sqrt 5)/2; the root is (1+sqrt 5)/2.
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let got = Mat2::lower_shear(1.0).spectral_norm();
        assert!(
            (got - phi).abs() <= 1e-14 * phi,
            "got {got}, want {phi}"
        );
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let m = Mat2::new(f64::NAN, 0.0, 0.0, 1.0);
        assert_eq!(m.try_spectral_norm(), Err(Error::NonFiniteMatrix));
        assert_eq!(m.inverse(), Err(Error::NonFiniteMatrix));
    }

    #[test]
    fn inverse_of_unimodular_is_exact_adjugate() {
        let m = Mat2::new(3.0, 2.0, 4.0, 3.0); // det = 1
        let inv = m.inverse().unwrap();
        assert_eq!(inv, Mat2::new(3.0, -2.0, -4.0, 3.0));
    }

    #[test]
    fn inverse_roundtrip_is_near_identity() {
        let m = Mat2::new(1.5, -0.25, 2.0, 0.75);
        let prod = m * m.inverse().unwrap();
        let err = (prod - Mat2::identity()).max_abs_entry();
        assert!(err <= 1e-12, "round-trip error {err}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = Mat2::new(1.0, 2.0, 2.0, 4.0);
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn norm_times_inverse_norm_at_least_one() {
        let m = Mat2::new(2.0, 1.0, 0.5, 1.0);
        let product = m.spectral_norm() * m.inverse().unwrap().spectral_norm();
        assert!(product >= 1.0);
    }
}

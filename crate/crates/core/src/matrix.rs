//! Dense 2×2 complex matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix stored row-major.
///
/// Serializes as `[[[re, im], [re, im]], [[re, im], [re, im]]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix2(pub [[Complex64; 2]; 2]);

impl Matrix2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Matrix2([[a, b], [c, d]])
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// The matrix `[[0, 1], [-1, 0]]`.
    pub fn j() -> Self {
        Self::from_real(0.0, 1.0, -1.0, 0.0)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn from_entries(e: [Complex64; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Adjugate; equals the inverse for unimodular matrices.
    pub fn adjugate(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(d, -b, -c, a)
    }

    /// General inverse, `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(det.inv()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a * s, b * s, c * s, d * s)
    }

    pub fn conj(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a.conj(), b.conj(), c.conj(), d.conj())
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Self::new(a, c, b, d)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.conj().transpose()
    }

    pub fn pow(&self, exponent: i64) -> Self {
        let base = if exponent < 0 {
            self.inverse().unwrap_or_else(|| self.adjugate())
        } else {
            *self
        };
        let mut acc = Self::identity();
        for _ in 0..exponent.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value), in closed form for 2×2.
    pub fn op_norm(&self) -> f64 {
        let f2 = self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d = self.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        ((f2 + disc) / 2.0).sqrt()
    }

    /// Largest absolute imaginary part over the entries.
    pub fn max_imag(&self) -> f64 {
        self.entries().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Operator-norm distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).op_norm()
    }

    /// Both eigenvalues, roots of `λ² − tr·λ + det`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = (tr * tr - 4.0 * det).sqrt();
        // Avoid cancellation: take the larger root first and use the product.
        let plus = tr + disc;
        let minus = tr - disc;
        let big = if plus.norm() >= minus.norm() { plus } else { minus } / 2.0;
        if big.norm() == 0.0 {
            return [big, big];
        }
        [big, det / big]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Default for Matrix2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;

    #[inline]
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Matrix2([[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]])
    }
}

impl Mul<Complex64> for Matrix2 {
    type Output = Matrix2;

    fn mul(self, rhs: Complex64) -> Matrix2 {
        self.scale(rhs)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;

    #[inline]
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Matrix2([[a + e, b + f], [c + g, d + h]])
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;

    #[inline]
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = rhs.0;
        Matrix2([[a - e, b - f], [c - g, d - h]])
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;

    fn neg(self) -> Matrix2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl fmt::Display for Matrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.0;
        write!(f, "[[{a:.6}, {b:.6}], [{c:.6}, {d:.6}]]")
    }
}

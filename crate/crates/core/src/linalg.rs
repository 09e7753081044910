//! Fixed-size complex linear algebra for dimensions 2, 3 and 4.
//!
//! Everything here is `Copy` and allocation free. Dimensions are carried in
//! the type through const generics, so mixing a 3-vector with a 4×4 matrix is
//! a compile error rather than a runtime one.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Absolute, entrywise tolerance for analytic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LinalgError {
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("matrix is not Hermitian (max |M - M^H| = {0:e})")]
    NotHermitian(f64),
}

/// Shorthand for a complex number.
#[inline]
pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Shorthand for a real number promoted to complex.
#[inline]
pub const fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `ζ = exp(iπ/4)`.
#[inline]
pub fn zeta() -> C64 {
    c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
}

/// Validated complex scalar constructor.
pub fn scalar(re: f64, im: f64) -> Result<C64, LinalgError> {
    if re.is_finite() && im.is_finite() {
        Ok(c(re, im))
    } else {
        Err(LinalgError::NonFinite(0))
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct Vector<const N: usize>(pub(crate) [C64; N]);

pub type Vector2 = Vector<2>;
pub type Vector3 = Vector<3>;
pub type Vector4 = Vector<4>;

impl<const N: usize> Vector<N> {
    pub const fn zeros() -> Self {
        Self([ZERO; N])
    }

    /// Builds a vector, rejecting NaN or infinite components.
    pub fn try_new(entries: [C64; N]) -> Result<Self, LinalgError> {
        match entries.iter().position(|z| !z.is_finite()) {
            Some(idx) => Err(LinalgError::NonFinite(idx)),
            None => Ok(Self(entries)),
        }
    }

    /// Unchecked constructor for internally computed values.
    pub const fn new(entries: [C64; N]) -> Self {
        Self(entries)
    }

    /// `k`-th standard basis vector.
    pub fn basis(k: usize) -> Self {
        let mut v = Self::zeros();
        v.0[k] = ONE;
        v
    }

    pub fn entries(&self) -> &[C64; N] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self(self.0.map(|z| z * k))
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    /// `Σ conj(aᵢ)·bᵢ`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Rank-one operator `|self⟩⟨other|`.
    pub fn outer(&self, other: &Self) -> Matrix<N> {
        let mut m = Matrix::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[i] * other.0[j].conj();
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<const N: usize> Index<usize> for Vector<N> {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl<const N: usize> IndexMut<usize> for Vector<N> {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl<const N: usize> Add for Vector<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, b) in out.0.iter_mut().zip(rhs.0) {
            *o += b;
        }
        out
    }
}

impl<const N: usize> Sub for Vector<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for (o, b) in out.0.iter_mut().zip(rhs.0) {
            *o -= b;
        }
        out
    }
}

impl<const N: usize> fmt::Debug for Vector<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Row-major `N×N` complex matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix<const N: usize>(pub(crate) [[C64; N]; N]);

pub type Matrix2 = Matrix<2>;
pub type Matrix3 = Matrix<3>;
pub type Matrix4 = Matrix<4>;

impl<const N: usize> Matrix<N> {
    pub const fn zeros() -> Self {
        Self([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..N {
            m.0[k][k] = ONE;
        }
        m
    }

    pub fn try_new(rows: [[C64; N]; N]) -> Result<Self, LinalgError> {
        for (i, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|z| !z.is_finite()) {
                return Err(LinalgError::NonFinite(i * N + j));
            }
        }
        Ok(Self(rows))
    }

    pub const fn new(rows: [[C64; N]; N]) -> Self {
        Self(rows)
    }

    pub fn from_real(rows: [[f64; N]; N]) -> Self {
        Self(rows.map(|row| row.map(r)))
    }

    pub fn diag(d: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for (k, v) in d.into_iter().enumerate() {
            m.0[k][k] = v;
        }
        m
    }

    pub fn rows(&self) -> &[[C64; N]; N] {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[j][i] = self.0[i][j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|k| self.0[k][k]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &Vector<N>) -> Vector<N> {
        let mut out = Vector::zeros();
        for i in 0..N {
            out.0[i] = (0..N).map(|j| self.0[i][j] * v.0[j]).sum();
        }
        out
    }

    pub fn scale(&self, k: C64) -> Self {
        Self(self.0.map(|row| row.map(|z| z * k)))
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(r(k))
    }

    /// `UV − VU`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other) - other.matmul(self)
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &Vector<N>) -> C64 {
        v.inner(&self.apply(v))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zeros())
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= IDENTITY_TOL
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }
}

impl<const N: usize> Neg for Matrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(r(-1.0))
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.matmul(&rhs)
    }
}

impl<const N: usize> fmt::Debug for Matrix<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Kronecker product of two single-qubit operators.
///
/// The left factor is the slower index, so the resulting basis order is
/// `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn tensor(a: &Matrix2, b: &Matrix2) -> Matrix4 {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    m
}

/// Kronecker product of two single-qubit kets, same index convention as [`tensor`].
pub fn tensor_vec(a: &Vector2, b: &Vector2) -> Vector4 {
    Vector([a.0[0] * b.0[0], a.0[0] * b.0[1], a.0[1] * b.0[0], a.0[1] * b.0[1]])
}

pub mod pauli {
    use super::*;

    pub fn x() -> Matrix2 {
        Matrix2::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> Matrix2 {
        Matrix2::new([[ZERO, -I], [I, ZERO]])
    }

    pub fn z() -> Matrix2 {
        Matrix2::from_real([[1.0, 0.0], [0.0, -1.0]])
    }
}

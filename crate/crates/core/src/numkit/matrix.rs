use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Real;

/// Dense complex 3×3 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex3x3<T> {
    pub m: [[Complex<T>; 3]; 3],
}

impl<T: Real> Complex3x3<T> {
    pub fn new(m: [[Complex<T>; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self {
            m: [[Complex::zero(); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::diag([Complex::one(); 3])
    }

    pub fn diag(d: [Complex<T>; 3]) -> Self {
        let mut out = Self::zero();
        for (i, di) in d.into_iter().enumerate() {
            out.m[i][i] = di;
        }
        out
    }

    pub fn from_real(m: [[T; 3]; 3]) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = Complex::new(m[i][j], T::zero());
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[j][i];
            }
        }
        out
    }

    /// Entry-wise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        let mut out = *self;
        for row in out.m.iter_mut() {
            for z in row.iter_mut() {
                *z = f(*z);
            }
        }
        out
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|z| z * c)
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> Complex<T> {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Transposed cofactor matrix, so that `A · adj(A) = det(A) · I`.
    pub fn adjugate(&self) -> Self {
        let m = &self.m;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let mut out = Self::zero();
        out.m[0][0] = cof(1, 2, 1, 2);
        out.m[0][1] = -cof(0, 2, 1, 2);
        out.m[0][2] = cof(0, 1, 1, 2);
        out.m[1][0] = -cof(1, 2, 0, 2);
        out.m[1][1] = cof(0, 2, 0, 2);
        out.m[1][2] = -cof(0, 1, 0, 2);
        out.m[2][0] = cof(1, 2, 0, 1);
        out.m[2][1] = -cof(0, 2, 0, 1);
        out.m[2][2] = cof(0, 1, 0, 1);
        out
    }

    /// Inverse through the adjugate. Fails when the determinant is exactly
    /// zero or not finite.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.is_zero() || !d.re.is_finite() || !d.im.is_finite() {
            return Err(Error::Singular(format!("determinant {d:?}")));
        }
        let inv_d = d.inv();
        Ok(self.adjugate().scale(inv_d))
    }

    /// Frobenius norm, the `|A|` of the notation section.
    pub fn norm(&self) -> T {
        self.m
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flat_map(|row| row.iter())
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    pub fn mul_vec(&self, v: &[Complex<T>; 3]) -> [Complex<T>; 3] {
        let mut out = [Complex::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.m[i][0] * v[0] + self.m[i][1] * v[1] + self.m[i][2] * v[2];
        }
        out
    }

    pub fn column(&self, j: usize) -> [Complex<T>; 3] {
        [self.m[0][j], self.m[1][j], self.m[2][j]]
    }

    pub fn set_column(&mut self, j: usize, c: [Complex<T>; 3]) {
        for (i, z) in c.into_iter().enumerate() {
            self.m[i][j] = z;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flat_map(|row| row.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Complex3x3<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.m[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Complex3x3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.m[i][j]
    }
}

impl<T: Real> Mul for Complex3x3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j]
                    + self.m[i][1] * rhs.m[1][j]
                    + self.m[i][2] * rhs.m[2][j];
            }
        }
        out
    }
}

impl<T: Real> Add for Complex3x3<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] = self.m[i][j] + rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Real> Sub for Complex3x3<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] = self.m[i][j] - rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Real> Neg for Complex3x3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

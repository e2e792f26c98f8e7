//! Small dense complex matrices and vector helpers.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Mul};


use num_traits::Float;

pub use num_complex::Complex64 as C64;

/// Shorthand constructor for a complex number.
#[inline]
pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) const ZERO: C64 = c64(0.0, 0.0);
pub(crate) const ONE: C64 = c64(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        Self { rows: rows.len(), cols, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    /// Wraps row-major data. Returns `None` when the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c64(-1.0, 0.0)))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product, `self` on the more significant index.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise deviation of `self† self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn pauli_x() -> Self {
        Self::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[&[ZERO, c64(0.0, -1.0)], &[c64(0.0, 1.0), ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows(&[&[ONE, ZERO], &[ZERO, c64(-1.0, 0.0)]])
    }

    pub fn hadamard() -> Self {
        let h = c64(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_rows(&[&[h, h], &[h, -h]])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "matrix index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// `⟨a|b⟩`, conjugating the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Returns `v / ‖v‖`, or `None` when the norm does not exceed `tol`.
pub fn normalized(v: &[C64], tol: f64) -> Option<Vec<C64>> {
    let n = norm(v);
    (n > tol).then(|| v.iter().map(|z| z / n).collect())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// True when `a = e^{iφ} b` for some phase, within `tol` entrywise.
pub fn equal_up_to_phase(a: &[C64], b: &[C64], tol: f64) -> bool {
    let overlap = inner(b, a);
    if overlap.norm() <= tol {
        return norm(a) <= tol && norm(b) <= tol;
    }
    let phase = overlap / overlap.norm();
    let rotated: Vec<C64> = b.iter().map(|z| z * phase).collect();
    max_abs_diff(a, &rotated) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paulis_are_unitary_and_anticommute() {
        let (x, z) = (Matrix::pauli_x(), Matrix::pauli_z());
        assert!(x.is_unitary(1e-15) && z.is_unitary(1e-15) && Matrix::hadamard().is_unitary(1e-15));
        let anti = (&x * &z).add(&(&z * &x));
        assert!(anti.approx_eq(&Matrix::zeros(2, 2), 0.0));
    }

    #[test]
    fn kron_places_left_factor_on_major_index() {
        let k = Matrix::pauli_x().kron(&Matrix::identity(3));
        assert_eq!(k[(0, 3)], ONE);
        assert_eq!(k[(4, 1)], ONE);
        assert_eq!(k[(0, 0)], ZERO);
    }

    #[test]
    fn phase_equivalence() {
        let a = [c64(0.6, 0.0), c64(0.0, 0.8)];
        let b: Vec<C64> = a.iter().map(|z| z * c64(0.0, 1.0)).collect();
        assert!(equal_up_to_phase(&a, &b, 1e-14));
        assert!(!equal_up_to_phase(&a, &[c64(0.8, 0.0), c64(0.0, 0.6)], 1e-6));
    }
}

//! Seeded random unitaries and states.
//!
//! Haar-distributed unitaries come from orthonormalizing the columns of a
//! matrix with independent standard complex Gaussian entries (Gram–Schmidt,
//! which yields the positive-diagonal QR factor). Callers choose the
//! generator; the CLI uses ChaCha8 seeded from a single `u64`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, inner, norm, Matrix, C64};

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re * s, im * s)
}

/// Matrix of i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random `n × n` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let g = random_matrix(n, n, rng);
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
            // Two passes of modified Gram–Schmidt keep orthogonality at machine precision.
            for _ in 0..2 {
                for q in &cols {
                    let proj = inner(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= proj * qi;
                    }
                }
            }
            let nv = norm(&v);
            if nv < 1e-8 {
                degenerate = true;
                break;
            }
            cols.push(v.into_iter().map(|z| z / nv).collect());
        }
        if !degenerate {
            return Matrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// Uniformly random unit vector in `C^n`.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let nv = norm(&v);
        if nv > 1e-8 {
            return v.into_iter().map(|z| z / nv).collect();
        }
    }
}

//! Row-major dense matrices and their largest singular value.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest dimension handled by the dense symmetric eigensolver.
pub const DENSE_LIMIT: usize = 4096;
pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `y = Aᵀ x`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                for (yj, a) in y.iter_mut().zip(self.row(i)) {
                    *yj += a * xi;
                }
            }
        }
        y
    }

    /// Top-left `rows × cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Largest singular value. Dense symmetric eigenvalues of the Gram matrix
/// up to [`DENSE_LIMIT`], power iteration above.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.rows == 0 || a.cols == 0 {
        return 0.0;
    }
    if a.rows.min(a.cols) <= DENSE_LIMIT {
        spectral_norm_dense(a)
    } else {
        spectral_norm_power(a, POWER_TOL, POWER_MAX_ITER, 0).value
    }
}

pub fn spectral_norm_dense(a: &DenseMatrix) -> f64 {
    if a.max_abs() == 0.0 {
        return 0.0;
    }
    let m = DMatrix::from_row_slice(a.rows, a.cols, &a.data);
    let gram = if a.rows >= a.cols { m.tr_mul(&m) } else { &m * m.transpose() };
    let top = gram.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(*v));
    top.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResult {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `AᵀA` from a seeded random start. Stops when the
/// relative change of the estimate drops below `tol`.
pub fn spectral_norm_power(a: &DenseMatrix, tol: f64, max_iter: usize, seed: u64) -> PowerResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..a.cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = 0.0;
    for it in 1..=max_iter {
        let y = a.matvec(&x);
        let est = norm2(&y);
        if est == 0.0 {
            return PowerResult { value: 0.0, iterations: it, converged: true };
        }
        let mut z = a.tmatvec(&y);
        let nz = norm2(&z);
        z.iter_mut().for_each(|v| *v /= nz);
        x = z;
        if (est - prev).abs() <= tol * est {
            return PowerResult { value: est, iterations: it, converged: true };
        }
        prev = est;
    }
    PowerResult { value: prev, iterations: max_iter, converged: false }
}

//! Gram matrices and kernel centering.

use nalgebra::DMatrix;

use crate::datagen::DataSet;
use crate::error::Result;
use crate::qubo::check_symmetric;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    k: DMatrix<f64>,
    centered: bool,
}

impl KernelMatrix {
    /// Wrap a symmetric matrix. `centered` is taken on trust.
    pub fn new(k: DMatrix<f64>, centered: bool) -> Result<Self> {
        check_symmetric(&k)?;
        Ok(Self { k, centered })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn n(&self) -> usize {
        self.k.nrows()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { k: &self.k * factor, centered: self.centered }
    }

    /// Double centering `H K H` with `H = I - 11^T / n`.
    pub fn center(&self) -> Self {
        let n = self.n();
        let nf = n as f64;
        let row_means: Vec<f64> = (0..n).map(|i| self.k.row(i).sum() / nf).collect();
        let col_means: Vec<f64> = (0..n).map(|j| self.k.column(j).sum() / nf).collect();
        let grand = row_means.iter().sum::<f64>() / nf;
        let mut c = DMatrix::from_fn(n, n, |i, j| self.k[(i, j)] - row_means[i] - col_means[j] + grand);
        // Restore exact symmetry lost to rounding.
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (c[(i, j)] + c[(j, i)]);
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        Self { k: c, centered: true }
    }
}

pub fn gram_linear(data: &DataSet) -> KernelMatrix {
    let p = &data.points;
    let k = DMatrix::from_fn(p.len(), p.len(), |i, j| p[i][0] * p[j][0] + p[i][1] * p[j][1]);
    KernelMatrix { k, centered: false }
}

/// `<x, y> + a^2 |x|^2 |y|^2`, the inner product under `phi(x) = (x1, x2, a |x|^2)`.
pub fn kernel_circles(x: [f64; 2], y: [f64; 2], a: f64) -> f64 {
    let nx = x[0] * x[0] + x[1] * x[1];
    let ny = y[0] * y[0] + y[1] * y[1];
    x[0] * y[0] + x[1] * y[1] + a * a * nx * ny
}

pub fn gram_circles(data: &DataSet, a: f64) -> KernelMatrix {
    let p = &data.points;
    let k = DMatrix::from_fn(p.len(), p.len(), |i, j| kernel_circles(p[i], p[j], a));
    KernelMatrix { k, centered: false }
}

pub fn center_kernel(km: &KernelMatrix) -> KernelMatrix {
    km.center()
}

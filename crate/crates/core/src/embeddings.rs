//! QUBO formulations of kernel 2-means clustering and soft-margin SVM training.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::qubo::QuboInstance;

/// Clustering QUBO `min_z 1^T K z - z^T K z`.
///
/// The energy of `z` equals the total kernel similarity between the two
/// induced clusters `{i : z_i = 1}` and `{i : z_i = 0}`.
pub fn clustering_qubo(km: &KernelMatrix) -> Result<QuboInstance> {
    let n = km.n();
    if n < 2 {
        return Err(Error::contract("clustering needs at least two points"));
    }
    if !km.is_centered() {
        log::warn!("clustering QUBO built from an uncentered kernel matrix");
    }
    let k = km.matrix();
    let col_sums: Vec<f64> = (0..n).map(|j| k.column(j).sum()).collect();
    QuboInstance::from_symmetric(&(-k), &col_sums)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmHyperparams {
    /// Box constraint; every active multiplier takes the value `c`.
    pub c: f64,
    /// Weight of the squared equality-constraint penalty.
    pub lam: f64,
}

impl SvmHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::contract(format!("svm: C must be positive, got {}", self.c)));
        }
        if !(self.lam >= 0.0 && self.lam.is_finite()) {
            return Err(Error::contract(format!("svm: lambda must be nonnegative, got {}", self.lam)));
        }
        Ok(())
    }
}

/// SVM QUBO `min_z -1^T z + C z^T (1/2 (Y . K) + lambda Y) z` with
/// `Y_ij = y_i y_j`, obtained from the dual by restricting `alpha_i = C z_i`.
pub fn svm_qubo(km: &KernelMatrix, labels: &[i8], hp: &SvmHyperparams) -> Result<QuboInstance> {
    hp.validate()?;
    let n = km.n();
    if labels.len() != n {
        return Err(Error::contract(format!("svm: {} labels for a {n}x{n} kernel", labels.len())));
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::contract("svm: labels must be -1 or +1"));
    }
    let k = km.matrix();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let yy = f64::from(labels[i] * labels[j]);
        hp.c * (0.5 * yy * k[(i, j)] + hp.lam * yy)
    });
    QuboInstance::from_symmetric(&m, &vec![-1.0; n])
}

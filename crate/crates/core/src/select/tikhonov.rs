//! Dense Tikhonov oracle: coefficient solve of (AᵀA + λ·diag(a²))x = Aᵀv.

use crate::error::{Error, Result};
use crate::forward::DesignMatrix;
use crate::solver::DictionaryTables;
use crate::sphere::HarmonicModel;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Cached factorization of the regularized normal matrix for one λ, so the
/// solve can be reused for several right-hand sides (data, then residuals).
#[derive(Debug, Clone)]
pub struct TikhonovFactor {
    chol: Cholesky<f64, nalgebra::Dyn>,
    n_max: usize,
}

impl TikhonovFactor {
    pub fn new(tables: &DictionaryTables, n_max: usize, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::input("lambda must be finite and >= 0"));
        }
        let m = tables.col_norms_sq.len();
        let mut normal: DMatrix<f64> = tables.gram.clone();
        for i in 0..m {
            normal[(i, i)] += lambda * tables.sobolev_sq[i];
        }
        let chol = normal
            .cholesky()
            .ok_or_else(|| Error::Factorization("regularized normal matrix not SPD".into()))?;
        Ok(TikhonovFactor { chol, n_max })
    }

    /// x = (AᵀA + λ·diag(a²))⁻¹ Aᵀv for a data-space vector v.
    pub fn solve(&self, matrix: &DesignMatrix, v: &DVector<f64>) -> Result<HarmonicModel> {
        if v.len() != matrix.rows() {
            return Err(Error::dimension(format!(
                "vector length {} vs matrix rows {}",
                v.len(),
                matrix.rows()
            )));
        }
        let rhs = matrix.entries.transpose() * v;
        let x = self.chol.solve(&rhs);
        HarmonicModel::from_coeffs(self.n_max, x.as_slice().to_vec())
    }
}

/// One-shot dense solve.
pub fn direct_tikhonov(
    y: &DVector<f64>,
    matrix: &DesignMatrix,
    tables: &DictionaryTables,
    lambda: f64,
) -> Result<HarmonicModel> {
    TikhonovFactor::new(tables, matrix.n_max, lambda)?.solve(matrix, y)
}

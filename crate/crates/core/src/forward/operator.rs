//! The discretized upward-continuation operator as a dense design matrix.
//!
//! Entry (i, (n,j)) = r^{-(n+1)} Y_{n,j}(ξ_i): the value of the upward-continued
//! basis function at the i-th data point, rows = data points, columns = the
//! spherical-harmonic dictionary in flat-index order.

use crate::error::{Error, Result};
use crate::forward::grid::PointGrid;
use crate::sphere::{self, coeff_len, HarmonicModel};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub entries: DMatrix<f64>,
    pub column_norms: Vec<f64>,
    pub n_max: usize,
    pub radius: f64,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// Builds the dense l×M design matrix for a grid and a dictionary degree.
pub fn build_design_matrix(grid: &PointGrid, n_max: usize) -> Result<DesignMatrix> {
    if grid.is_empty() {
        return Err(Error::input("empty grid"));
    }
    let l = grid.len();
    let m = coeff_len(n_max);
    let mut entries = DMatrix::zeros(l, m);
    // continuation factors r^{-(n+1)} in flat-index order
    let mut atten = Vec::with_capacity(m);
    for n in 0..=n_max {
        let f = grid.radius.powi(-(n as i32 + 1));
        for _ in 0..(2 * n + 1) {
            atten.push(f);
        }
    }
    for (i, dir) in grid.directions.iter().enumerate() {
        let ys = sphere::eval_all(n_max, dir)?;
        for d in 0..m {
            entries[(i, d)] = atten[d] * ys[d];
        }
    }
    let column_norms: Vec<f64> = (0..m).map(|d| entries.column(d).norm()).collect();
    Ok(DesignMatrix {
        entries,
        column_norms,
        n_max,
        radius: grid.radius,
    })
}

/// Singular values σ_n = r^{-n} of the upward continuation, n = 0..=n_max.
pub fn singular_values(r: f64, n_max: usize) -> Result<Vec<f64>> {
    if r <= 1.0 {
        return Err(Error::input("orbit radius must exceed 1 (Earth radii)"));
    }
    Ok((0..=n_max).map(|n| r.powi(-(n as i32))).collect())
}

/// y = A·coeffs, the simulated data vector at the grid points.
pub fn apply_forward(matrix: &DesignMatrix, model: &HarmonicModel) -> Result<DVector<f64>> {
    if model.len() != matrix.cols() {
        return Err(Error::dimension(format!(
            "model has {} coefficients, matrix has {} columns",
            model.len(),
            matrix.cols()
        )));
    }
    let x = DVector::from_column_slice(&model.coeffs);
    Ok(&matrix.entries * x)
}

/// Orbit radius in Earth radii for a satellite height in km (R_E = 6371 km).
pub fn radius_for_height_km(height_km: f64) -> f64 {
    (6371.0 + height_km) / 6371.0
}

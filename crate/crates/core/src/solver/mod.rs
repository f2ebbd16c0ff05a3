//! Greedy Tikhonov solvers over the spherical-harmonic dictionary.

pub mod rfmp;
pub mod rofmp;

use crate::error::{Error, Result};
use crate::forward::DesignMatrix;
use crate::sphere::{HarmonicIndex, HarmonicModel, SobolevWeights};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Stopping parameters shared by RFMP and ROFMP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Residual threshold ϱ: stop once ‖R‖ < ϱ. Typically N2S·‖y‖.
    pub stop_residual: f64,
    /// Coefficient threshold δ: stop once |α_{n+1}| < δ.
    pub stop_alpha: f64,
    /// Iteration cap N.
    pub max_iter: usize,
    /// ROFMP only: restart cycle length K.
    pub restart_k: usize,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            stop_residual: 0.0,
            stop_alpha: 1e-6,
            max_iter: 10_000,
            restart_k: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::input("lambda must be finite and >= 0"));
        }
        if self.stop_residual < 0.0 {
            return Err(Error::input("stop_residual must be >= 0"));
        }
        if self.stop_alpha <= 0.0 {
            return Err(Error::input("stop_alpha must be > 0"));
        }
        if self.max_iter < 1 || self.restart_k < 1 {
            return Err(Error::input("max_iter and restart_k must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ResidualBelowThreshold,
    SmallCoefficient,
    MaxIterations,
    Converged,
}

/// One row of the per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Restart cycle (always 0 for the RFMP).
    pub cycle: usize,
    pub degree: usize,
    pub order: i64,
    pub alpha: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct RegularizedSolution {
    pub model: HarmonicModel,
    pub residual: DVector<f64>,
    pub stop: StopReason,
    pub iterations: usize,
    pub diagnostics: Vec<IterationRecord>,
}

impl RegularizedSolution {
    /// Diagnostics CSV: iteration, cycle, chosen n, chosen j, alpha, residual norm.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("iteration,cycle,degree,order,alpha,residual_norm\n");
        for r in &self.diagnostics {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iteration, r.cycle, r.degree, r.order, r.alpha, r.residual_norm
            ));
        }
        out
    }
}

/// Preprocessed per-column quantities: squared data-space norms ‖𝓕d‖²,
/// Sobolev weights a_{n(d)}², and the Gram matrix AᵀA used for cheap
/// inner-product updates during the greedy scans.
#[derive(Debug, Clone)]
pub struct DictionaryTables {
    pub col_norms_sq: Vec<f64>,
    pub sobolev_sq: Vec<f64>,
    pub gram: DMatrix<f64>,
}

/// Builds the tables for a design matrix; the weight table must match the
/// dictionary degree.
pub fn precompute(matrix: &DesignMatrix, weights: &SobolevWeights) -> Result<DictionaryTables> {
    if weights.n_max() != matrix.n_max {
        return Err(Error::dimension(
            "Sobolev weights do not match dictionary degree",
        ));
    }
    let col_norms_sq = matrix.column_norms.iter().map(|n| n * n).collect();
    let sobolev_sq = weights.flat_weights_sq();
    let gram = matrix.entries.transpose() * &matrix.entries;
    Ok(DictionaryTables {
        col_norms_sq,
        sobolev_sq,
        gram,
    })
}

pub(crate) fn record_for(
    iteration: usize,
    cycle: usize,
    flat: usize,
    alpha: f64,
    residual_norm: f64,
) -> IterationRecord {
    let idx = HarmonicIndex::from_flat(flat);
    IterationRecord {
        iteration,
        cycle,
        degree: idx.degree,
        order: idx.order,
        alpha,
        residual_norm,
    }
}

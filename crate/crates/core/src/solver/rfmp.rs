//! Regularized functional matching pursuit.
//!
//! Each iteration adds one dictionary element d and coefficient α minimizing
//! the increment of the Tikhonov functional ‖y − 𝓕F‖² + λ‖F‖²_𝓗. The
//! selection maximizes
//!
//!   (⟨R_n, 𝓕d⟩ − λ⟨F_n, d⟩_𝓗)² / (‖𝓕d‖² + λ‖d‖²_𝓗)
//!
//! over all columns. Because the dictionary is the orthonormal harmonic basis,
//! ⟨F_n, d⟩_𝓗 = a² c_d and ‖d‖²_𝓗 = a² with a² the Sobolev weight of d's
//! degree and c_d the current coefficient. The correlation vector AᵀR is
//! maintained through the precomputed Gram matrix, giving O(M) per iteration.

use super::{record_for, DictionaryTables, RegularizedSolution, SolverConfig, StopReason};
use crate::error::{Error, Result};
use crate::forward::DesignMatrix;
use crate::sphere::HarmonicModel;
use nalgebra::DVector;

/// Mutable solver state; residual identity R = y − A·coeffs can be checked
/// on demand via [`residual_defect`](GreedyState::residual_defect).
#[derive(Debug, Clone)]
pub struct GreedyState {
    pub iteration: usize,
    /// Current coefficients in flat order.
    pub coeffs: Vec<f64>,
    /// Residual R_n.
    pub residual: DVector<f64>,
    /// Correlations AᵀR_n, maintained incrementally.
    pub correlations: DVector<f64>,
    /// Chosen (flat index, α) history.
    pub history: Vec<(usize, f64)>,
}

impl GreedyState {
    pub fn new(y: &DVector<f64>, matrix: &DesignMatrix) -> Result<Self> {
        if y.len() != matrix.rows() {
            return Err(Error::dimension(format!(
                "data length {} vs matrix rows {}",
                y.len(),
                matrix.rows()
            )));
        }
        Ok(GreedyState {
            iteration: 0,
            coeffs: vec![0.0; matrix.cols()],
            residual: y.clone(),
            correlations: matrix.entries.transpose() * y,
            history: Vec::new(),
        })
    }

    /// Relative defect ‖(y − A·coeffs) − R‖ / ‖y‖ of the maintained residual.
    pub fn residual_defect(&self, y: &DVector<f64>, matrix: &DesignMatrix) -> f64 {
        let x = DVector::from_column_slice(&self.coeffs);
        let fresh = y - &matrix.entries * x;
        (fresh - &self.residual).norm() / y.norm().max(f64::MIN_POSITIVE)
    }
}

/// Evaluates the selection objective for every column and returns the
/// maximizer with its coefficient, or `None` when all objective values vanish
/// (convergence). Ties break toward the lowest flat index.
pub fn select_next(
    state: &GreedyState,
    tables: &DictionaryTables,
    lambda: f64,
) -> Option<(usize, f64)> {
    let m = state.coeffs.len();
    let mut best: Option<(usize, f64, f64)> = None; // (flat, objective, alpha)
    for d in 0..m {
        let num = state.correlations[d] - lambda * tables.sobolev_sq[d] * state.coeffs[d];
        let den = tables.col_norms_sq[d] + lambda * tables.sobolev_sq[d];
        if den <= 0.0 {
            continue;
        }
        let objective = num * num / den;
        let better = match best {
            None => objective > 0.0,
            Some((_, obj, _)) => objective > obj,
        };
        if better {
            best = Some((d, objective, num / den));
        }
    }
    best.map(|(d, _, alpha)| (d, alpha))
}

/// Runs Algorithm 1 to a stopping criterion.
pub fn run(
    y: &DVector<f64>,
    matrix: &DesignMatrix,
    tables: &DictionaryTables,
    config: &SolverConfig,
) -> Result<RegularizedSolution> {
    config.validate()?;
    let mut state = GreedyState::new(y, matrix)?;
    let mut diagnostics = Vec::new();
    let stop;
    loop {
        if state.residual.norm() < config.stop_residual {
            stop = StopReason::ResidualBelowThreshold;
            break;
        }
        if state.iteration >= config.max_iter {
            stop = StopReason::MaxIterations;
            break;
        }
        let Some((d, alpha)) = select_next(&state, tables, config.lambda) else {
            stop = StopReason::Converged;
            break;
        };
        if !alpha.is_finite() {
            return Err(Error::NonFinite {
                iter: state.iteration,
            });
        }
        if alpha.abs() < config.stop_alpha {
            stop = StopReason::SmallCoefficient;
            break;
        }
        state.coeffs[d] += alpha;
        state.residual.axpy(-alpha, &matrix.entries.column(d), 1.0);
        state.correlations.axpy(-alpha, &tables.gram.column(d), 1.0);
        state.iteration += 1;
        state.history.push((d, alpha));
        let rnorm = state.residual.norm();
        if !rnorm.is_finite() {
            return Err(Error::NonFinite {
                iter: state.iteration,
            });
        }
        diagnostics.push(record_for(state.iteration, 0, d, alpha, rnorm));
    }
    Ok(RegularizedSolution {
        model: HarmonicModel {
            max_degree: matrix.n_max,
            coeffs: state.coeffs,
        },
        residual: state.residual,
        stop,
        iterations: state.iteration,
        diagnostics,
    })
}

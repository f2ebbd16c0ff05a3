//! Regularized orthogonal functional matching pursuit with prefitting,
//! coefficient backdating, and restarts (iterated Tikhonov).
//!
//! Within a cycle, 𝒱_n = span{𝓕d_1,…,𝓕d_n} is tracked by an incremental
//! modified Gram-Schmidt QR with one re-orthogonalization pass: Q holds an
//! orthonormal basis of 𝒱_n and T is upper-triangular with A_chosen = Q·T.
//! The selection objective
//!
//!   (⟨R_n, 𝒫_𝒲 𝓕d⟩ + λ(⟨F_n, B_n(d)⟩_𝓗 − ⟨F_n, d⟩_𝓗))²
//!   ───────────────────────────────────────────────────────
//!         ‖𝒫_𝒲 𝓕d‖² + λ‖d − B_n(d)‖²_𝓗
//!
//! is evaluated for all candidates from incrementally maintained tables:
//! C = QᵀA, the prefitting coefficients β(d) = T⁻¹C (updated by a rank-one
//! formula per iteration), ‖𝒫_𝒲 𝓕d‖² by downdating, and AᵀR through the Gram
//! matrix. This keeps a full scan at O(M·n) per iteration instead of
//! O(M·l·n). Columns with ‖𝒫_𝒲 𝓕d‖ ≤ 1e-10·‖𝓕d‖ are degenerate for the
//! cycle and skipped. Every K iterations the coefficients are frozen, Q/T are
//! cleared, and the pursuit restarts on the current residual.

use super::{record_for, DictionaryTables, RegularizedSolution, SolverConfig, StopReason};
use crate::error::{Error, Result};
use crate::forward::DesignMatrix;
use crate::sphere::HarmonicModel;
use nalgebra::{DMatrix, DVector};

const DEGENERATE_REL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OrthoState<'a> {
    pub matrix: &'a DesignMatrix,
    pub tables: &'a DictionaryTables,
    /// Restart counter j.
    pub cycle: usize,
    /// Iteration n within the current cycle.
    pub cycle_iteration: usize,
    /// Total iterations across cycles.
    pub iteration: usize,
    /// Full coefficient vector (frozen cycles + current cycle).
    pub coeffs: Vec<f64>,
    pub residual: DVector<f64>,
    /// How many selections were skipped as degenerate.
    pub skipped_degenerate: usize,
    q_cols: Vec<DVector<f64>>,
    /// Column i of T (length i+1).
    t_cols: Vec<Vec<f64>>,
    chosen: Vec<usize>,
    /// Row i = q_iᵀ A over all candidates.
    c_rows: Vec<Vec<f64>>,
    /// Row i = β_i^{(n)}(d) over all candidates.
    beta_rows: Vec<Vec<f64>>,
    /// AᵀR, maintained incrementally.
    corr: Vec<f64>,
    /// QᵀR.
    z: Vec<f64>,
    /// ‖𝒫_𝒲 𝓕d‖² per candidate, maintained by downdating.
    w2: Vec<f64>,
}

/// Result of one attempted iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Applied { flat: usize, alpha: f64 },
    /// Selected column turned out degenerate; state unchanged except diagnostics.
    SkippedDegenerate { flat: usize },
    /// All candidate columns are degenerate for this cycle.
    CycleExhausted,
    /// All objective values vanish.
    Converged,
}

impl<'a> OrthoState<'a> {
    pub fn new(
        y: &DVector<f64>,
        matrix: &'a DesignMatrix,
        tables: &'a DictionaryTables,
    ) -> Result<Self> {
        if y.len() != matrix.rows() {
            return Err(Error::dimension(format!(
                "data length {} vs matrix rows {}",
                y.len(),
                matrix.rows()
            )));
        }
        let corr = matrix.entries.transpose() * y;
        Ok(OrthoState {
            matrix,
            tables,
            cycle: 0,
            cycle_iteration: 0,
            iteration: 0,
            coeffs: vec![0.0; matrix.cols()],
            residual: y.clone(),
            skipped_degenerate: 0,
            q_cols: Vec::new(),
            t_cols: Vec::new(),
            chosen: Vec::new(),
            c_rows: Vec::new(),
            beta_rows: Vec::new(),
            corr: corr.as_slice().to_vec(),
            z: Vec::new(),
            w2: tables.col_norms_sq.clone(),
        })
    }

    pub fn basis_size(&self) -> usize {
        self.q_cols.len()
    }

    pub fn chosen_indices(&self) -> &[usize] {
        &self.chosen
    }

    /// Q as a dense l×n matrix.
    pub fn q_matrix(&self) -> DMatrix<f64> {
        let l = self.matrix.rows();
        let n = self.q_cols.len();
        DMatrix::from_fn(l, n, |i, j| self.q_cols[j][i])
    }

    /// T as a dense upper-triangular n×n matrix.
    pub fn t_matrix(&self) -> DMatrix<f64> {
        let n = self.t_cols.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                self.t_cols[j][i]
            } else {
                0.0
            }
        })
    }

    /// Orthogonal projections (𝒫_𝒱 v, 𝒫_𝒲 v).
    pub fn project(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let mut pv = DVector::zeros(v.len());
        for q in &self.q_cols {
            pv.axpy(q.dot(v), q, 1.0);
        }
        let pw = v - &pv;
        (pv, pw)
    }

    fn solve_upper(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = rhs.len();
        let mut x = rhs.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.t_cols[j][i] * x[j];
            }
            let diag = self.t_cols[i][i];
            if diag.abs() < 1e-300 {
                return None;
            }
            x[i] = acc / diag;
        }
        Some(x)
    }

    /// Prefitting coefficients β^{(n)}(d) with Σ β_i 𝓕d_i = 𝒫_𝒱(𝓕d), and the
    /// assembled B_n(d) in coefficient space.
    pub fn beta_coeffs(&self, flat: usize) -> Result<(Vec<f64>, HarmonicModel)> {
        let c_d: Vec<f64> = self.c_rows.iter().map(|row| row[flat]).collect();
        let beta = self
            .solve_upper(&c_d)
            .ok_or_else(|| Error::Factorization("T numerically singular".into()))?;
        let mut b = HarmonicModel::zero(self.matrix.n_max);
        for (i, &d_i) in self.chosen.iter().enumerate() {
            b.coeffs[d_i] += beta[i];
        }
        Ok((beta, b))
    }

    fn is_degenerate(&self, flat: usize) -> bool {
        self.w2[flat] <= DEGENERATE_REL * DEGENERATE_REL * self.tables.col_norms_sq[flat]
    }

    /// Maximizer of the ROFMP objective with its coefficient α, or `None`
    /// when every non-degenerate column has a vanishing objective.
    pub fn select_next(&self, lambda: f64) -> Option<(usize, f64)> {
        let m = self.coeffs.len();
        let n = self.chosen.len();
        // u_i = a²_{d_i}·(current coefficient of d_i), v_i = a²_{d_i}
        let u: Vec<f64> = self
            .chosen
            .iter()
            .map(|&d| self.tables.sobolev_sq[d] * self.coeffs[d])
            .collect();
        let vw: Vec<f64> = self
            .chosen
            .iter()
            .map(|&d| self.tables.sobolev_sq[d])
            .collect();
        let mut best: Option<(usize, f64, f64)> = None;
        for d in 0..m {
            if self.is_degenerate(d) {
                continue;
            }
            // ⟨R, 𝒫_𝒲 𝓕d⟩ = (AᵀR)_d − c_dᵀ(QᵀR)
            let mut s = self.corr[d];
            for i in 0..n {
                s -= self.c_rows[i][d] * self.z[i];
            }
            let mut h_b = 0.0; // ⟨F, B_n(d)⟩_𝓗
            let mut p = 0.0; // ‖B_n(d)‖²_𝓗
            for i in 0..n {
                let beta = self.beta_rows[i][d];
                h_b += u[i] * beta;
                p += vw[i] * beta * beta;
            }
            let h_d = self.tables.sobolev_sq[d] * self.coeffs[d];
            let num = s + lambda * (h_b - h_d);
            let den = self.w2[d].max(0.0) + lambda * (self.tables.sobolev_sq[d] + p);
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

    /// Applies one iteration: select, backdate all current-cycle coefficients,
    /// extend Q/T, and update residual and candidate tables.
    pub fn step(&mut self, lambda: f64) -> Result<StepOutcome> {
        if (0..self.coeffs.len()).all(|d| self.is_degenerate(d)) {
            return Ok(StepOutcome::CycleExhausted);
        }
        let Some((d_new, alpha)) = self.select_next(lambda) else {
            return Ok(StepOutcome::Converged);
        };
        if !alpha.is_finite() {
            return Err(Error::NonFinite {
                iter: self.iteration,
            });
        }
        let n = self.chosen.len();

        // extend the QR factorization first; bail out if the column collapses
        let v = DVector::from(self.matrix.entries.column(d_new).clone_owned());
        let mut r: Vec<f64> = self.c_rows.iter().map(|row| row[d_new]).collect();
        let mut w = v.clone();
        for (i, q) in self.q_cols.iter().enumerate() {
            w.axpy(-r[i], q, 1.0);
        }
        // one re-orthogonalization pass
        for (i, q) in self.q_cols.iter().enumerate() {
            let extra = q.dot(&w);
            w.axpy(-extra, q, 1.0);
            r[i] += extra;
        }
        let tau = w.norm();
        if tau <= DEGENERATE_REL * self.tables.col_norms_sq[d_new].sqrt() {
            self.w2[d_new] = 0.0;
            self.skipped_degenerate += 1;
            return Ok(StepOutcome::SkippedDegenerate { flat: d_new });
        }

        // backdate: α_i ← α_i − α β_i(d_new), then append α for d_new
        for i in 0..n {
            self.coeffs[self.chosen[i]] -= alpha * self.beta_rows[i][d_new];
        }
        self.coeffs[d_new] += alpha;

        // residual update R ← R − α 𝒫_𝒲 𝓕d
        self.residual.axpy(-alpha, &w, 1.0);

        let q = &w / tau;

        // new row of C = QᵀA via the Gram matrix: Aᵀw = gram_col − Σ r_i c_i
        let mut aw: Vec<f64> = self.tables.gram.column(d_new).as_slice().to_vec();
        for i in 0..n {
            let ri = r[i];
            let row = &self.c_rows[i];
            for (a, &c) in aw.iter_mut().zip(row.iter()) {
                *a -= ri * c;
            }
        }
        let c_new: Vec<f64> = aw.iter().map(|a| a / tau).collect();

        // AᵀR ← AᵀR − α·τ·c_new
        for (g, &c) in self.corr.iter_mut().zip(c_new.iter()) {
            *g -= alpha * tau * c;
        }

        // ‖𝒫_𝒲 𝓕d‖² downdate
        for (w2, &c) in self.w2.iter_mut().zip(c_new.iter()) {
            *w2 = (*w2 - c * c).max(0.0);
        }

        // β update: with γ = T⁻¹r, β_i(d) ← β_i(d) − β_new(d)γ_i
        let gamma = self
            .solve_upper(&r)
            .ok_or_else(|| Error::Factorization("T numerically singular".into()))?;
        let beta_new: Vec<f64> = c_new.iter().map(|c| c / tau).collect();
        for i in 0..n {
            let gi = gamma[i];
            let row = &mut self.beta_rows[i];
            for (b, &bn) in row.iter_mut().zip(beta_new.iter()) {
                *b -= bn * gi;
            }
        }
        self.beta_rows.push(beta_new);

        self.z.push(q.dot(&self.residual));
        let mut t_col = r;
        t_col.push(tau);
        self.t_cols.push(t_col);
        self.q_cols.push(q);
        self.c_rows.push(c_new);
        self.chosen.push(d_new);

        self.cycle_iteration += 1;
        self.iteration += 1;
        Ok(StepOutcome::Applied {
            flat: d_new,
            alpha,
        })
    }

    /// Freezes the current-cycle coefficients and restarts the pursuit on the
    /// current residual (Q, T and the candidate tables are reset).
    pub fn restart(&mut self) {
        self.q_cols.clear();
        self.t_cols.clear();
        self.chosen.clear();
        self.c_rows.clear();
        self.beta_rows.clear();
        self.z.clear();
        self.w2 = self.tables.col_norms_sq.clone();
        // refresh AᵀR exactly at the cycle boundary
        let corr = self.matrix.entries.transpose() * &self.residual;
        self.corr = corr.as_slice().to_vec();
        self.cycle += 1;
        self.cycle_iteration = 0;
    }
}

/// Runs Algorithm 2 with restarts every `config.restart_k` iterations;
/// stopping criteria are evaluated within cycles, after every iteration.
pub fn run_with_restarts(
    y: &DVector<f64>,
    matrix: &DesignMatrix,
    tables: &DictionaryTables,
    config: &SolverConfig,
) -> Result<RegularizedSolution> {
    config.validate()?;
    let mut state = OrthoState::new(y, matrix, tables)?;
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
        if state.cycle_iteration >= config.restart_k {
            state.restart();
        }
        match state.step(config.lambda)? {
            StepOutcome::Applied { flat, alpha } => {
                if alpha.abs() < config.stop_alpha {
                    stop = StopReason::SmallCoefficient;
                    break;
                }
                let rnorm = state.residual.norm();
                if !rnorm.is_finite() {
                    return Err(Error::NonFinite {
                        iter: state.iteration,
                    });
                }
                diagnostics.push(record_for(state.iteration, state.cycle, flat, alpha, rnorm));
            }
            StepOutcome::SkippedDegenerate { .. } => continue,
            StepOutcome::CycleExhausted => {
                if state.basis_size() == 0 {
                    stop = StopReason::Converged;
                    break;
                }
                state.restart();
            }
            StepOutcome::Converged => {
                stop = StopReason::Converged;
                break;
            }
        }
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

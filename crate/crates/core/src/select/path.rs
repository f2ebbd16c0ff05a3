//! Regularization path: one solution per grid λ, with the data-space fit
//! and the norms the choice methods consume.

use crate::error::{Error, Result};
use crate::forward::{apply_forward, DesignMatrix};
use crate::select::{direct_tikhonov, LambdaGrid};
use crate::solver::{rfmp, rofmp, DictionaryTables, SolverConfig, StopReason};
use crate::sphere::{sobolev_norm, HarmonicModel, SobolevWeights};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSolver {
    Rfmp,
    Rofmp,
    /// Dense normal-equation solve, for oracle testing.
    Direct,
}

impl PathSolver {
    pub fn name(&self) -> &'static str {
        match self {
            PathSolver::Rfmp => "rfmp",
            PathSolver::Rofmp => "rofmp",
            PathSolver::Direct => "direct",
        }
    }
}

impl std::str::FromStr for PathSolver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rfmp" => Ok(PathSolver::Rfmp),
            "rofmp" => Ok(PathSolver::Rofmp),
            "direct" => Ok(PathSolver::Direct),
            other => Err(Error::input(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathEntry {
    pub lambda: f64,
    pub model: HarmonicModel,
    /// 𝓕x_k^ε in data space.
    pub fit: DVector<f64>,
    /// ‖𝓕x_k^ε − y^ε‖.
    pub residual_norm: f64,
    /// ‖x_k^ε‖_𝓗.
    pub h_norm: f64,
    /// Solver iterations (0 for the dense solver).
    pub iterations: usize,
    pub stop: Option<StopReason>,
}

#[derive(Debug, Clone)]
pub struct RegularizationPath {
    pub solver: PathSolver,
    pub entries: Vec<PathEntry>,
}

impl RegularizationPath {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry for 1-based grid index k.
    pub fn entry(&self, k: usize) -> &PathEntry {
        &self.entries[k - 1]
    }
}

/// Runs the configured solver for every λ on the grid. `base` carries the
/// stopping parameters; its λ field is overwritten per grid point.
pub fn build_path(
    y: &DVector<f64>,
    matrix: &DesignMatrix,
    tables: &DictionaryTables,
    weights: &SobolevWeights,
    grid: &LambdaGrid,
    solver: PathSolver,
    base: &SolverConfig,
) -> Result<RegularizationPath> {
    if grid.is_empty() {
        return Err(Error::input("empty lambda grid"));
    }
    let mut entries = Vec::with_capacity(grid.len());
    for &lambda in &grid.values {
        let (model, iterations, stop) = match solver {
            PathSolver::Direct => (direct_tikhonov(y, matrix, tables, lambda)?, 0, None),
            PathSolver::Rfmp | PathSolver::Rofmp => {
                let mut cfg = *base;
                cfg.lambda = lambda;
                let sol = match solver {
                    PathSolver::Rfmp => rfmp::run(y, matrix, tables, &cfg)?,
                    _ => rofmp::run_with_restarts(y, matrix, tables, &cfg)?,
                };
                (sol.model, sol.iterations, Some(sol.stop))
            }
        };
        let fit = apply_forward(matrix, &model)?;
        let residual_norm = (y - &fit).norm();
        let h_norm = sobolev_norm(&model, weights)?;
        entries.push(PathEntry {
            lambda,
            model,
            fit,
            residual_norm,
            h_norm,
            iterations,
            stop,
        });
    }
    Ok(RegularizationPath { solver, entries })
}

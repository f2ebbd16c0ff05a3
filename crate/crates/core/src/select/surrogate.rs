//! Spectral surrogates for the trace and determinant quantities of the
//! parameter-choice rules, and the maximal-index rule K̂.
//!
//! The singular value decomposition of the discretized operator is not
//! available, so the singular values σ_n = r^{-n} of the underlying
//! upward-continuation operator are used instead, each with multiplicity
//! 2n+1. The identity operator on data space contributes l − M extra unit
//! directions, with M = (N_max+1)².

use crate::error::{Error, Result};
use crate::forward::singular_values;
use crate::select::LambdaGrid;
use crate::sphere::{sobolev_norm, HarmonicModel, SobolevWeights};

#[derive(Debug, Clone)]
pub struct SpectralSurrogate {
    /// σ_n for n = 0..=N_max.
    pub sigma: Vec<f64>,
    /// Number of data points l.
    pub data_count: usize,
}

impl SpectralSurrogate {
    pub fn new(r: f64, n_max: usize, data_count: usize) -> Result<Self> {
        if data_count == 0 {
            return Err(Error::input("data count must be >= 1"));
        }
        Ok(SpectralSurrogate {
            sigma: singular_values(r, n_max)?,
            data_count,
        })
    }

    /// Dictionary size M = (N_max+1)² = Σ(2n+1).
    pub fn dictionary_size(&self) -> usize {
        self.sigma.len() * self.sigma.len()
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sigma
            .iter()
            .enumerate()
            .map(|(n, &s)| ((2 * n + 1) as f64, s))
    }
}

/// The trace/determinant quantities at one λ, all computed from the filter
/// factors f_n = σ_n²/(σ_n²+λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateTraces {
    /// tr(𝓕𝓡) = Σ(2n+1)f_n
    pub tr_fr: f64,
    /// tr((𝓕𝓡)²) = Σ(2n+1)f_n²
    pub tr_fr_sq: f64,
    /// tr(𝓘−𝓕𝓡) = (l−M) + Σ(2n+1)(1−f_n)
    pub tr_residual: f64,
    /// log det⁺(𝓘−𝓕𝓡) = Σ(2n+1)·log(λ/(σ_n²+λ))
    pub log_det_plus: f64,
    /// tr 𝓑*𝓑 = Σ(2n+1)σ_n²(1−f_n)² with 𝓑 = 𝓕(𝓘−𝓡𝓕)
    pub tr_bsb: f64,
}

pub fn surrogate_traces(s: &SpectralSurrogate, lambda: f64) -> Result<SurrogateTraces> {
    if !(lambda > 0.0) {
        return Err(Error::input("surrogate traces need lambda > 0"));
    }
    let mut t = SurrogateTraces {
        tr_fr: 0.0,
        tr_fr_sq: 0.0,
        tr_residual: 0.0,
        log_det_plus: 0.0,
        tr_bsb: 0.0,
    };
    for (mult, sigma) in s.modes() {
        let s2 = sigma * sigma;
        let f = s2 / (s2 + lambda);
        t.tr_fr += mult * f;
        t.tr_fr_sq += mult * f * f;
        t.tr_residual += mult * (1.0 - f);
        t.log_det_plus += mult * (lambda / (s2 + lambda)).ln();
        t.tr_bsb += mult * s2 * (1.0 - f) * (1.0 - f);
    }
    let excess = s.data_count as f64 - s.dictionary_size() as f64;
    if excess > 0.0 {
        // unit eigenvalues of 𝓘−𝓕𝓡 outside the range of the operator
        t.tr_residual += excess;
    }
    Ok(t)
}

/// Solution-variance surrogate ρ²(λ) = Σ(2n+1)(σ_n/(σ_n²+λ))².
pub fn rho2(s: &SpectralSurrogate, lambda: f64) -> f64 {
    s.modes()
        .map(|(mult, sigma)| {
            let v = sigma / (sigma * sigma + lambda);
            mult * v * v
        })
        .sum()
}

/// λ → 0 limit: ρ(∞)² = Σ(2n+1)/σ_n².
pub fn rho_inf_sq(s: &SpectralSurrogate) -> f64 {
    s.modes().map(|(mult, sigma)| mult / (sigma * sigma)).sum()
}

/// White-noise maximal index: largest 1-based k with ρ(k) < 0.5·ρ(∞), with
/// ρ(∞) the closed-form λ → 0 limit. Returns 0 if even λ_1 violates the rule.
pub fn max_index_white(s: &SpectralSurrogate, grid: &LambdaGrid) -> usize {
    let threshold_sq = 0.25 * rho_inf_sq(s);
    let mut k_hat = 0;
    for (i, &lambda) in grid.values.iter().enumerate() {
        if rho2(s, lambda) < threshold_sq {
            k_hat = i + 1;
        }
    }
    k_hat
}

/// Colored-noise maximal index from two regularization paths computed on
/// independent noise realizations of the same data: ε²ρ²(k) is estimated by
/// ½‖x_{k,1} − x_{k,2}‖²_𝓗, and ρ(∞) is taken at the smallest λ on the grid.
/// All estimates zero (identical inputs) is reported as K̂ = grid length.
pub fn max_index_colored(
    path1: &[HarmonicModel],
    path2: &[HarmonicModel],
    weights: &SobolevWeights,
    grid: &LambdaGrid,
) -> Result<usize> {
    if path1.len() != grid.len() || path2.len() != grid.len() {
        return Err(Error::dimension(format!(
            "paths of length {} / {} vs grid of length {}",
            path1.len(),
            path2.len(),
            grid.len()
        )));
    }
    let mut est = Vec::with_capacity(grid.len());
    for (x1, x2) in path1.iter().zip(path2) {
        let diff = HarmonicModel::from_coeffs(
            x1.max_degree,
            x1.coeffs.iter().zip(&x2.coeffs).map(|(a, b)| a - b).collect(),
        )?;
        est.push(sobolev_norm(&diff, weights)?);
    }
    let rho_end = *est.last().expect("grid non-empty");
    if rho_end == 0.0 {
        return Ok(grid.len());
    }
    let mut k_hat = 0;
    for (i, &e) in est.iter().enumerate() {
        if e < 0.5 * rho_end {
            k_hat = i + 1;
        }
    }
    Ok(k_hat)
}

//! The eleven regularization-parameter choice methods.
//!
//! Two scan methods (DP, TDP) return the first index whose criterion drops
//! below its bound; the nine minimizer methods return the argmin of their
//! criterion over k ≤ K̂. Trace and determinant quantities come from the
//! spectral surrogate; the 𝓗-norm quantities from the stored path.

use crate::error::{Error, Result};
use crate::forward::DesignMatrix;
use crate::select::{
    surrogate_traces, RegularizationPath, SpectralSurrogate, TikhonovFactor,
};
use crate::solver::DictionaryTables;
use crate::sphere::{sobolev_norm, HarmonicModel, SobolevWeights};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// DP tuning parameter τ.
pub const DP_TAU: f64 = 1.5;
/// RGCV robustness parameter γ.
pub const RGCV_GAMMA: f64 = 0.1;
/// Strong-RGCV robustness parameter γ.
pub const SRGCV_GAMMA: f64 = 0.95;
/// MGCV stabilization parameter c.
pub const MGCV_C: f64 = 3.0;

/// TDP constant γ = ((1/4)^{1/4}·(3/4)^{3/4})².
pub fn tdp_gamma() -> f64 {
    (0.25f64.powf(0.25) * 0.75f64.powf(0.75)).powi(2)
}

/// TDP bound factor b = 1.5·γ.
pub fn tdp_b() -> f64 {
    1.5 * tdp_gamma()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Dp,
    Tdp,
    Qoc,
    Lc,
    Eem,
    Rm,
    Gml,
    Gcv,
    Rgcv,
    Srgcv,
    Mgcv,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Dp,
        Method::Tdp,
        Method::Qoc,
        Method::Lc,
        Method::Eem,
        Method::Rm,
        Method::Gml,
        Method::Gcv,
        Method::Rgcv,
        Method::Srgcv,
        Method::Mgcv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Dp => "DP",
            Method::Tdp => "TDP",
            Method::Qoc => "QOC",
            Method::Lc => "LC",
            Method::Eem => "EEM",
            Method::Rm => "RM",
            Method::Gml => "GML",
            Method::Gcv => "GCV",
            Method::Rgcv => "RGCV",
            Method::Srgcv => "SRGCV",
            Method::Mgcv => "MGCV",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::input(format!("unknown method '{s}'")))
    }
}

/// Everything a choice rule may consult besides the path itself.
#[derive(Debug, Clone, Copy)]
pub struct ChoiceContext<'a> {
    /// Noise level ε (the TDP estimate ε̂ is taken equal to ε).
    pub epsilon: f64,
    pub surrogate: &'a SpectralSurrogate,
    /// Maximal index K̂ (1-based) capping the minimizer methods.
    pub k_hat: usize,
    pub matrix: &'a DesignMatrix,
    pub tables: &'a DictionaryTables,
    pub weights: &'a SobolevWeights,
    /// The noisy data the path was computed from.
    pub y: &'a DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionPoint {
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: String,
    /// 1-based grid index, `None` when the rule selected nothing.
    pub k_star: Option<usize>,
    pub lambda_star: Option<f64>,
    /// Criterion values over the scanned/searched indices.
    pub criterion: Vec<CriterionPoint>,
    /// Indices excluded because their criterion was undefined.
    pub skipped: Vec<SkippedPoint>,
}

impl SelectionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn minimizer_range(path: &RegularizationPath, ctx: &ChoiceContext, needs_next: bool) -> usize {
    let mut top = ctx.k_hat.min(path.len());
    if needs_next {
        top = top.min(path.len().saturating_sub(1));
    }
    top
}

/// Applies one choice method to a completed path.
pub fn choose(
    method: Method,
    path: &RegularizationPath,
    ctx: &ChoiceContext,
) -> Result<SelectionReport> {
    if path.is_empty() {
        return Err(Error::input("empty regularization path"));
    }
    let l = ctx.y.len() as f64;
    let mut criterion = Vec::new();
    let mut skipped = Vec::new();
    let mut k_star = None;

    match method {
        Method::Dp => {
            let bound = DP_TAU * ctx.epsilon * l.sqrt();
            for k in 1..=path.len() {
                let value = path.entry(k).residual_norm;
                criterion.push(CriterionPoint { k, value });
                if value <= bound {
                    k_star = Some(k);
                    break;
                }
            }
        }
        Method::Tdp => {
            let b = tdp_b();
            for k in 1..=path.len() {
                let e = path.entry(k);
                // 𝓡_k applied to the data-space residual 𝓕x_k^ε − y^ε
                let factor = TikhonovFactor::new(ctx.tables, ctx.matrix.n_max, e.lambda)?;
                let v = &e.fit - ctx.y;
                let rv = factor.solve(ctx.matrix, &v)?;
                let value = sobolev_norm(&rv, ctx.weights)?;
                criterion.push(CriterionPoint { k, value });
                if value <= b * ctx.epsilon * l.sqrt() / e.lambda.sqrt() {
                    k_star = Some(k);
                    break;
                }
            }
        }
        _ => {
            let needs_next = method == Method::Qoc;
            let top = minimizer_range(path, ctx, needs_next);
            let mut best: Option<(usize, f64)> = None;
            for k in 1..=top {
                match criterion_value(method, k, path, ctx)? {
                    Ok(value) if value.is_finite() => {
                        criterion.push(CriterionPoint { k, value });
                        if best.map_or(true, |(_, v)| value < v) {
                            best = Some((k, value));
                        }
                    }
                    Ok(value) => skipped.push(SkippedPoint {
                        k,
                        reason: format!("criterion not finite: {value}"),
                    }),
                    Err(reason) => skipped.push(SkippedPoint { k, reason }),
                }
            }
            k_star = best.map(|(k, _)| k);
        }
    }

    Ok(SelectionReport {
        method: method.name().to_string(),
        k_star,
        lambda_star: k_star.map(|k| path.entry(k).lambda),
        criterion,
        skipped,
    })
}

/// Criterion value for the minimizer methods; inner `Err` is a skip reason.
fn criterion_value(
    method: Method,
    k: usize,
    path: &RegularizationPath,
    ctx: &ChoiceContext,
) -> Result<std::result::Result<f64, String>> {
    let e = path.entry(k);
    let l = ctx.y.len() as f64;
    let res = e.residual_norm;
    Ok(match method {
        Method::Qoc => {
            let next = path.entry(k + 1);
            let diff = HarmonicModel::from_coeffs(
                e.model.max_degree,
                e.model
                    .coeffs
                    .iter()
                    .zip(&next.model.coeffs)
                    .map(|(a, b)| a - b)
                    .collect(),
            )?;
            Ok(sobolev_norm(&diff, ctx.weights)?)
        }
        Method::Lc => Ok(res * e.h_norm),
        Method::Eem => {
            // ‖𝓕*v‖_𝓗 with 𝓕* the 𝓗-adjoint: coefficients (Aᵀv)_{n,j}/a²
            let v = &e.fit - ctx.y;
            let atv = ctx.matrix.entries.transpose() * v;
            let den_sq: f64 = atv
                .iter()
                .zip(&ctx.tables.sobolev_sq)
                .map(|(c, a2)| c * c / a2)
                .sum();
            if den_sq <= 0.0 {
                Err("‖𝓕*(𝓕x−y)‖_𝓗 = 0".into())
            } else {
                Ok(res * res / den_sq.sqrt())
            }
        }
        Method::Rm => {
            let t = surrogate_traces(ctx.surrogate, e.lambda)?;
            if t.tr_bsb <= 0.0 {
                Err("tr 𝓑*𝓑 = 0".into())
            } else {
                Ok(res / t.tr_bsb.powf(0.25))
            }
        }
        Method::Gml => {
            let t = surrogate_traces(ctx.surrogate, e.lambda)?;
            // det⁺ kept in log space: value = r²·exp(−log det⁺/l)
            Ok(res * res * (-t.log_det_plus / l).exp())
        }
        Method::Gcv | Method::Rgcv | Method::Srgcv => {
            let t = surrogate_traces(ctx.surrogate, e.lambda)?;
            let den = (t.tr_residual / l).powi(2);
            if den <= 0.0 {
                Err("tr(𝓘−𝓕𝓡) = 0".into())
            } else {
                let gcv = res * res / den;
                let factor = match method {
                    Method::Rgcv => RGCV_GAMMA + (1.0 - RGCV_GAMMA) * t.tr_fr_sq / l,
                    Method::Srgcv => SRGCV_GAMMA + (1.0 - SRGCV_GAMMA) * t.tr_fr_sq / l,
                    _ => 1.0,
                };
                Ok(gcv * factor)
            }
        }
        Method::Mgcv => {
            let t = surrogate_traces(ctx.surrogate, e.lambda)?;
            let den = ((l - MGCV_C * t.tr_fr) / l).powi(2);
            if den <= 0.0 {
                Err("tr(𝓘−c𝓕𝓡) = 0".into())
            } else {
                Ok(res * res / den)
            }
        }
        Method::Dp | Method::Tdp => unreachable!("scan methods handled by choose()"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{
        apply_forward, build_design_matrix, radius_for_height_km, reuter_grid, synth_truth,
    };
    use crate::noise::{add_white};
    use crate::select::{build_path, lambda_grid_short, max_index_white, PathSolver};
    use crate::solver::{precompute, SolverConfig};
    use approx::assert_relative_eq;
    use std::str::FromStr;

    struct Fixture {
        matrix: DesignMatrix,
        tables: DictionaryTables,
        weights: SobolevWeights,
        surrogate: SpectralSurrogate,
        y: DVector<f64>,
        epsilon: f64,
        path: RegularizationPath,
        k_hat: usize,
    }

    fn fixture(n2s: f64, seed: u64) -> Fixture {
        let r = radius_for_height_km(500.0);
        let g = reuter_grid(10, r).unwrap();
        let matrix = build_design_matrix(&g, 5).unwrap();
        let weights = SobolevWeights::new(5);
        let tables = precompute(&matrix, &weights).unwrap();
        let truth = synth_truth(5, 2.0, seed);
        let clean = apply_forward(&matrix, &truth).unwrap();
        let y = add_white(&clean, n2s, seed);
        let epsilon = n2s * clean.norm() / (clean.len() as f64).sqrt();
        let surrogate = SpectralSurrogate::new(r, 5, y.len()).unwrap();
        let grid = lambda_grid_short(20).unwrap();
        let path = build_path(
            &y,
            &matrix,
            &tables,
            &weights,
            &grid,
            PathSolver::Direct,
            &SolverConfig::new(0.0),
        )
        .unwrap();
        let k_hat = max_index_white(&surrogate, &grid);
        Fixture {
            matrix,
            tables,
            weights,
            surrogate,
            y,
            epsilon,
            path,
            k_hat,
        }
    }

    impl Fixture {
        fn ctx(&self) -> ChoiceContext<'_> {
            ChoiceContext {
                epsilon: self.epsilon,
                surrogate: &self.surrogate,
                k_hat: self.k_hat,
                matrix: &self.matrix,
                tables: &self.tables,
                weights: &self.weights,
                y: &self.y,
            }
        }
    }

    #[test]
    fn tdp_constants() {
        assert_relative_eq!(tdp_gamma(), 0.3248, epsilon = 1e-4);
        assert_relative_eq!(tdp_b(), 0.4872, epsilon = 1e-4);
    }

    #[test]
    fn dp_first_crossing() {
        // residual norms (5,3,1)·ε√l with τ = 1.5 → k_* = 3
        let f = fixture(0.05, 1);
        let mut path = f.path.clone();
        path.entries.truncate(3);
        let scale = f.epsilon * (f.y.len() as f64).sqrt();
        for (e, v) in path.entries.iter_mut().zip([5.0, 3.0, 1.0]) {
            e.residual_norm = v * scale;
        }
        let report = choose(Method::Dp, &path, &f.ctx()).unwrap();
        assert_eq!(report.k_star, Some(3));
        assert_eq!(report.criterion.len(), 3);
    }

    #[test]
    fn dp_truncation_invariance() {
        let f = fixture(0.05, 2);
        let full = choose(Method::Dp, &f.path, &f.ctx()).unwrap();
        let k = full.k_star.expect("DP should select on a noisy direct path");
        let mut truncated = f.path.clone();
        truncated.entries.truncate(k);
        let again = choose(Method::Dp, &truncated, &f.ctx()).unwrap();
        assert_eq!(again.k_star, Some(k));
    }

    #[test]
    fn dp_never_satisfied_reports_none_with_trace() {
        let f = fixture(0.05, 3);
        let mut ctx = f.ctx();
        ctx.epsilon = 1e-30;
        let report = choose(Method::Dp, &f.path, &ctx).unwrap();
        assert_eq!(report.k_star, None);
        assert_eq!(report.lambda_star, None);
        assert_eq!(report.criterion.len(), f.path.len());
    }

    #[test]
    fn scan_methods_match_exhaustive_scan() {
        let f = fixture(0.05, 4);
        let ctx = f.ctx();
        let l = f.y.len() as f64;
        // DP
        let dp = choose(Method::Dp, &f.path, &ctx).unwrap();
        let expect = (1..=f.path.len())
            .find(|&k| f.path.entry(k).residual_norm <= DP_TAU * f.epsilon * l.sqrt());
        assert_eq!(dp.k_star, expect);
        // TDP against an independent evaluation of every k
        let tdp = choose(Method::Tdp, &f.path, &ctx).unwrap();
        let expect = (1..=f.path.len()).find(|&k| {
            let e = f.path.entry(k);
            let v = &e.fit - &f.y;
            let factor = TikhonovFactor::new(&f.tables, f.matrix.n_max, e.lambda).unwrap();
            let rv = factor.solve(&f.matrix, &v).unwrap();
            sobolev_norm(&rv, &f.weights).unwrap()
                <= tdp_b() * f.epsilon * l.sqrt() / e.lambda.sqrt()
        });
        assert_eq!(tdp.k_star, expect);
    }

    #[test]
    fn minimizers_match_brute_force_and_respect_k_hat() {
        let f = fixture(0.05, 5);
        let ctx = f.ctx();
        for method in [
            Method::Qoc,
            Method::Lc,
            Method::Eem,
            Method::Rm,
            Method::Gml,
            Method::Gcv,
            Method::Rgcv,
            Method::Srgcv,
            Method::Mgcv,
        ] {
            let report = choose(method, &f.path, &ctx).unwrap();
            let k = report.k_star.unwrap_or_else(|| panic!("{method:?} selected nothing"));
            assert!(k <= f.k_hat, "{method:?}: k_* = {k} > K̂ = {}", f.k_hat);
            // brute force over the recorded criterion values
            let brute = report
                .criterion
                .iter()
                .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
                .unwrap()
                .k;
            assert_eq!(k, brute, "{method:?}");
        }
    }

    #[test]
    fn gcv_matches_from_scratch_formula() {
        let f = fixture(0.05, 6);
        let ctx = f.ctx();
        let l = f.y.len() as f64;
        let report = choose(Method::Gcv, &f.path, &ctx).unwrap();
        let brute = (1..=f.k_hat.min(f.path.len()))
            .map(|k| {
                let e = f.path.entry(k);
                let t = surrogate_traces(&f.surrogate, e.lambda).unwrap();
                (k, e.residual_norm.powi(2) / (t.tr_residual / l).powi(2))
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(report.k_star, Some(brute));
    }

    #[test]
    fn rgcv_factor_bounds() {
        // γ + (1−γ)·l⁻¹tr((𝓕𝓡)²) ∈ (γ, 1] since 0 < tr((𝓕𝓡)²) ≤ M ≤ l
        let f = fixture(0.05, 7);
        let l = f.y.len() as f64;
        for &lambda in &[1e-12, 1e-6, 1.0] {
            let t = surrogate_traces(&f.surrogate, lambda).unwrap();
            let factor = RGCV_GAMMA + (1.0 - RGCV_GAMMA) * t.tr_fr_sq / l;
            assert!(factor > RGCV_GAMMA && factor <= 1.0);
            // γ = 1 degenerates to plain GCV
            let gamma1 = 1.0 + (1.0 - 1.0) * t.tr_fr_sq / l;
            assert_eq!(gamma1, 1.0);
        }
    }

    #[test]
    fn eem_zero_residual_skipped() {
        let f = fixture(0.0, 8);
        // noise-free direct path: smallest λ fits exactly, 𝓕*v ≈ 0 there
        let report = choose(Method::Eem, &f.path, &f.ctx()).unwrap();
        // every evaluated k is either a valid criterion or a diagnosed skip
        assert_eq!(
            report.criterion.len() + report.skipped.len(),
            f.k_hat.min(f.path.len())
        );
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_str(m.name()).unwrap(), m);
            assert_eq!(Method::from_str(&m.name().to_lowercase()).unwrap(), m);
        }
        assert!(Method::from_str("nope").is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let f = fixture(0.05, 9);
        let report = choose(Method::Gcv, &f.path, &f.ctx()).unwrap();
        let json = report.to_json().unwrap();
        let back: SelectionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}

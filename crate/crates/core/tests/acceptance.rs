//! End-to-end acceptance suite. Each test prints exactly one PASS/FAIL line
//! for its criterion (visible with `--nocapture`; on failure the line is in
//! the captured output) and then asserts it.

use gravmp::bench::{
    aggregate, export_scenario, read_manifest, run_scenario, scenario_matrix, Scenario,
    TruthSource, DESK_SCALE,
};
use gravmp::forward::{
    apply_forward, build_design_matrix, radius_for_height_km, reuter_control_for_count,
    reuter_grid, synth_truth, GridKind, TrackSet,
};
use gravmp::noise::{add_colored, add_white, noise_level, ArAlpha, NoiseKind};
use gravmp::select::{
    build_path, choose, direct_tikhonov, lambda_grid, lambda_grid_short, max_index_white, rho2,
    rho_inf_sq, tdp_b, ChoiceContext, Method, PathSolver, SpectralSurrogate, TikhonovFactor,
    DP_TAU,
};
use gravmp::solver::{precompute, rfmp, rofmp, SolverConfig};
use gravmp::sphere::{sobolev_norm, HarmonicModel, SobolevWeights};
use nalgebra::DVector;
use std::time::Instant;

fn verdict(id: usize, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {id} [{tag}] {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn h_rel_error(got: &HarmonicModel, want: &HarmonicModel, w: &SobolevWeights) -> f64 {
    let diff = HarmonicModel::from_coeffs(
        got.max_degree,
        got.coeffs
            .iter()
            .zip(&want.coeffs)
            .map(|(a, b)| a - b)
            .collect(),
    )
    .unwrap();
    sobolev_norm(&diff, w).unwrap() / sobolev_norm(want, w).unwrap()
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    assert!(n > 0, "median of empty sample");
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn method_inefficiencies(run: &gravmp::bench::ScenarioRun, method: Method) -> Vec<f64> {
    run.results
        .iter()
        .flat_map(|r| {
            r.outcomes
                .iter()
                .filter(|o| o.method == method)
                .filter_map(|o| o.inefficiency)
        })
        .collect()
}

#[test]
fn criterion_1_rfmp_matches_direct_tikhonov() {
    let n_max = 10;
    let control = reuter_control_for_count(500, usize::MAX).unwrap();
    let grid = reuter_grid(control, radius_for_height_km(500.0)).unwrap();
    let matrix = build_design_matrix(&grid, n_max).unwrap();
    let weights = SobolevWeights::new(n_max);
    let tables = precompute(&matrix, &weights).unwrap();
    let truth = synth_truth(n_max, 4.0, 42);
    let clean = apply_forward(&matrix, &truth).unwrap();
    let y = add_white(&clean, 0.05, 7);

    let mut detail = format!("l = {}, M = {}", grid.len(), matrix.cols());
    let mut pass = true;
    for lambda in [1e-2, 1e-6] {
        let start = Instant::now();
        let mut cfg = SolverConfig::new(lambda);
        cfg.max_iter = 10_000;
        cfg.stop_alpha = 1e-300;
        cfg.stop_residual = 0.0;
        let sol = rfmp::run(&y, &matrix, &tables, &cfg).unwrap();
        let dense = direct_tikhonov(&y, &matrix, &tables, lambda).unwrap();
        let rel = h_rel_error(&sol.model, &dense, &weights);
        let secs = start.elapsed().as_secs_f64();
        detail.push_str(&format!(
            "; λ = {lambda:.0e}: rel 𝓗-error {rel:.2e} in {} iters, {secs:.1} s",
            sol.iterations
        ));
        pass &= rel < 1e-3 && secs <= 60.0;
    }
    verdict(1, "RFMP vs direct Tikhonov", pass, &detail);
}

#[test]
fn criterion_2_omp_orthogonality() {
    // toy dictionary: degree 6 → 49 columns on a coarse grid
    let n_max = 6;
    let grid = reuter_grid(12, radius_for_height_km(500.0)).unwrap();
    let matrix = build_design_matrix(&grid, n_max).unwrap();
    let weights = SobolevWeights::new(n_max);
    let tables = precompute(&matrix, &weights).unwrap();
    let truth = synth_truth(n_max, 3.0, 11);
    let clean = apply_forward(&matrix, &truth).unwrap();
    let y = add_white(&clean, 0.05, 5);
    let y_norm = y.norm();

    // λ = 0: residual stays orthogonal to every chosen column, every iteration
    let mut worst = 0.0f64;
    let mut state = rofmp::OrthoState::new(&y, &matrix, &tables).unwrap();
    for _ in 0..30 {
        match state.step(0.0).unwrap() {
            rofmp::StepOutcome::Applied { .. } | rofmp::StepOutcome::SkippedDegenerate { .. } => {}
            _ => break,
        }
        for &i in state.chosen_indices() {
            let dot = matrix.entries.column(i).dot(&state.residual).abs();
            worst = worst.max(dot);
        }
    }
    let ortho_ok = worst <= 1e-9 * y_norm && state.basis_size() >= 10;

    // λ > 0: the same run is, in general, not orthogonal
    let mut state = rofmp::OrthoState::new(&y, &matrix, &tables).unwrap();
    let mut reg_worst = 0.0f64;
    for _ in 0..10 {
        state.step(1e-2).unwrap();
        for &i in state.chosen_indices() {
            reg_worst = reg_worst.max(matrix.entries.column(i).dot(&state.residual).abs());
        }
    }
    let non_ortho_ok = reg_worst > 1e-6 * y_norm;
    verdict(
        2,
        "OMP orthogonality (λ=0) and loss of it (λ>0)",
        ortho_ok && non_ortho_ok,
        &format!(
            "max |⟨R, 𝓕d_i⟩|/‖y‖: λ=0 → {:.2e}, λ=1e-2 → {:.2e}",
            worst / y_norm,
            reg_worst / y_norm
        ),
    );
}

#[test]
fn criterion_3_lambda_grid_endpoints() {
    let grid = lambda_grid();
    let l1 = grid.lambda(1);
    let l100 = grid.lambda(100);
    let pass = grid.len() == 100
        && (l1 - 1.0).abs() / 1.0 < 1e-3
        && (l100 - 1e-14).abs() / 1e-14 < 0.05;
    verdict(
        3,
        "λ-grid endpoints",
        pass,
        &format!("λ_1 = {l1}, λ_100 = {l100:e}"),
    );
}

#[test]
fn criterion_4_maximal_index_rule() {
    let grid = lambda_grid_short(40).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for height in [500.0, 300.0] {
        let s = SpectralSurrogate::new(radius_for_height_km(height), 30, 2000).unwrap();
        let k_hat = max_index_white(&s, &grid);
        let half_sq = 0.25 * rho_inf_sq(&s);
        let below = rho2(&s, grid.lambda(k_hat)) < half_sq;
        let above = k_hat >= grid.len() || rho2(&s, grid.lambda(k_hat + 1)) >= half_sq;
        pass &= below && above && k_hat < grid.len();
        detail.push_str(&format!("h = {height} km: K̂ = {k_hat}; "));
    }
    // single-mode closed form: only the n = 0 harmonic, σ_0 = 1, so
    // ρ(λ) = 1/(1+λ) and ρ(∞) = 1; ρ < 1/2 requires λ > 1, which holds
    // only at the first grid point (λ_1 ≈ 1.00004, λ_2 ≈ 0.722)
    let s0 = SpectralSurrogate::new(2.0, 0, 100).unwrap();
    let full = lambda_grid();
    let k0 = max_index_white(&s0, &full);
    pass &= k0 == 1;
    pass &= (rho2(&s0, 0.5) - 1.0 / 1.5f64.powi(2)).abs() < 1e-15;
    pass &= (rho_inf_sq(&s0) - 1.0).abs() < 1e-15;
    detail.push_str(&format!("single-mode K̂ = {k0} (want 1)"));
    verdict(4, "maximal index K̂", pass, &detail);
}

/// Shared small selection fixture: degree 8 dictionary, ~300 Reuter points,
/// white noise, direct Tikhonov path on a 20-point grid.
struct Fixture {
    matrix: gravmp::forward::DesignMatrix,
    tables: gravmp::solver::DictionaryTables,
    weights: SobolevWeights,
    y: DVector<f64>,
    epsilon: f64,
    path: gravmp::select::RegularizationPath,
    surrogate: SpectralSurrogate,
    k_hat: usize,
}

fn fixture() -> Fixture {
    let n_max = 8;
    let grid_pts = reuter_grid(16, radius_for_height_km(500.0)).unwrap();
    let matrix = build_design_matrix(&grid_pts, n_max).unwrap();
    let weights = SobolevWeights::new(n_max);
    let tables = precompute(&matrix, &weights).unwrap();
    let truth = synth_truth(n_max, 4.0, 42);
    let clean = apply_forward(&matrix, &truth).unwrap();
    let y = add_white(&clean, 0.05, 3);
    let epsilon = noise_level(&clean, 0.05).unwrap();
    let grid = lambda_grid_short(20).unwrap();
    let base = SolverConfig::new(1.0);
    let path = build_path(
        &y,
        &matrix,
        &tables,
        &weights,
        &grid,
        PathSolver::Direct,
        &base,
    )
    .unwrap();
    let surrogate = SpectralSurrogate::new(grid_pts.radius, n_max, y.len()).unwrap();
    let k_hat = max_index_white(&surrogate, &grid);
    Fixture {
        matrix,
        tables,
        weights,
        y,
        epsilon,
        path,
        surrogate,
        k_hat,
    }
}

#[test]
fn criterion_5_method_definitional_cross_checks() {
    let f = fixture();
    let ctx = ChoiceContext {
        epsilon: f.epsilon,
        surrogate: &f.surrogate,
        k_hat: f.k_hat,
        matrix: &f.matrix,
        tables: &f.tables,
        weights: &f.weights,
        y: &f.y,
    };
    let l = f.y.len() as f64;
    let mut pass = true;
    let mut detail = format!("K̂ = {}", f.k_hat);

    // DP: exhaustive scan over all k, independent of the early-exit loop
    let dp = choose(Method::Dp, &f.path, &ctx).unwrap();
    let dp_exhaustive = (1..=f.path.len())
        .find(|&k| f.path.entry(k).residual_norm <= DP_TAU * f.epsilon * l.sqrt());
    pass &= dp.k_star == dp_exhaustive;
    detail.push_str(&format!("; DP k_* = {:?}", dp.k_star));

    // TDP: recompute the damped residual norm for every k from scratch
    let tdp = choose(Method::Tdp, &f.path, &ctx).unwrap();
    let tdp_exhaustive = (1..=f.path.len()).find(|&k| {
        let e = f.path.entry(k);
        let factor = TikhonovFactor::new(&f.tables, f.matrix.n_max, e.lambda).unwrap();
        let v = &e.fit - &f.y;
        let damped = factor.solve(&f.matrix, &v).unwrap();
        sobolev_norm(&damped, &f.weights).unwrap() <= tdp_b() * f.epsilon * l.sqrt() / e.lambda.sqrt()
    });
    pass &= tdp.k_star == tdp_exhaustive;
    detail.push_str(&format!(", TDP k_* = {:?}", tdp.k_star));

    // every minimizer equals the brute-force argmin of its own criterion
    for method in Method::ALL {
        if matches!(method, Method::Dp | Method::Tdp) {
            continue;
        }
        let report = choose(method, &f.path, &ctx).unwrap();
        let brute = report
            .criterion
            .iter()
            .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
            .map(|p| p.k);
        let in_range = report.criterion.iter().all(|p| p.k <= f.k_hat);
        pass &= report.k_star == brute && in_range;
        if report.k_star != brute {
            detail.push_str(&format!(
                ", {} mismatch ({:?} vs {:?})",
                method.name(),
                report.k_star,
                brute
            ));
        }
    }
    verdict(5, "DP/TDP scans and minimizer argmins", pass, &detail);
}

#[test]
fn criterion_6_noise_calibration() {
    // white: realized relative perturbation near the requested N2S
    let clean = DVector::from_element(8000, 1.0);
    let noisy = add_white(&clean, 0.1, 9);
    let realized = (&noisy - &clean).norm() / clean.norm();
    let white_ok = (realized - 0.1).abs() / 0.1 < 0.10;

    // AR(1): lag-1 sample autocorrelation of the driving sequence
    let n = 100_000;
    let clean = DVector::from_element(n, 1.0);
    let tracks = TrackSet::single(n);
    let alpha = 0.6;
    let (noisy, used) = add_colored(&clean, &tracks, 0.1, ArAlpha::Fixed(alpha), 13).unwrap();
    let eps: Vec<f64> = (0..n).map(|i| noisy[i] / clean[i] - 1.0).collect();
    let mean = eps.iter().sum::<f64>() / n as f64;
    let var: f64 = eps.iter().map(|e| (e - mean).powi(2)).sum();
    let cov: f64 = (1..n).map(|i| (eps[i] - mean) * (eps[i - 1] - mean)).sum();
    let lag1 = cov / var;
    let ar_ok = (lag1 - alpha).abs() < 0.05 && (used - alpha).abs() < 1e-12;

    verdict(
        6,
        "noise calibration",
        white_ok && ar_ok,
        &format!("white realized N2S = {realized:.4} (want 0.1); AR(1) lag-1 = {lag1:.3} (want 0.6)"),
    );
}

#[test]
fn criterion_7_desk_scale_ranking_white_reuter() {
    let start = Instant::now();
    let scenario = scenario_matrix(PathSolver::Rfmp, DESK_SCALE)
        .into_iter()
        .find(|s| s.label == "(500,5,wn,R)")
        .unwrap();
    let run = run_scenario(&scenario).unwrap();
    assert!(run.failures.is_empty(), "failures: {:?}", run.failures);

    let med = |m: Method| median(&method_inefficiencies(&run, m));
    let (gcv, lc, rm, rgcv, tdp) = (
        med(Method::Gcv),
        med(Method::Lc),
        med(Method::Rm),
        med(Method::Rgcv),
        med(Method::Tdp),
    );
    let secs = start.elapsed().as_secs_f64();
    let pass = gcv <= 2.0 && lc <= 2.0 && rm <= 2.0 && rgcv <= 2.0 && tdp > gcv && secs <= 1800.0;
    verdict(
        7,
        "(500,5,wn,R) ranking tendency",
        pass,
        &format!(
            "median ineff: GCV {gcv:.3}, LC {lc:.3}, RM {rm:.3}, RGCV {rgcv:.3}, TDP {tdp:.3}; {secs:.0} s"
        ),
    );
}

#[test]
fn criterion_8_showcase_order_colored_scattered() {
    let scenario = scenario_matrix(PathSolver::Rfmp, DESK_SCALE)
        .into_iter()
        .find(|s| s.label == "(500,5,cn,S)")
        .unwrap();
    let run = run_scenario(&scenario).unwrap();
    assert!(run.failures.is_empty(), "failures: {:?}", run.failures);

    let gcv = median(&method_inefficiencies(&run, Method::Gcv));
    let mgcv = median(&method_inefficiencies(&run, Method::Mgcv));
    let gml = median(&method_inefficiencies(&run, Method::Gml));
    let pass = gcv <= 1.5 && (mgcv > 2.0 || gml > 2.0);
    verdict(
        8,
        "(500,5,cn,S) showcase order",
        pass,
        &format!("median ineff: GCV {gcv:.3}, MGCV {mgcv:.3}, GML {gml:.3}"),
    );
}

#[test]
fn criterion_9_manifest_determinism() {
    let mut s = Scenario {
        label: String::new(),
        height_km: 500.0,
        n2s: 0.05,
        n2s_outside: None,
        noise: NoiseKind::White,
        ar_alpha: None,
        region: None,
        grid: GridKind::Reuter,
        solver: PathSolver::Direct,
        n_max: 4,
        surrogate_n_max: 4,
        target_points: 100,
        lambda_count: 8,
        realizations: 4,
        base_seed: 21,
        truth: TruthSource::Synth {
            power_exponent: 4.0,
            seed: 42,
        },
        max_iter: 200,
        restart_k: 50,
    };
    s.label = s.expected_label();
    let run = run_scenario(&s).unwrap();
    let stats = aggregate(&run).unwrap();
    let dir1 = tempfile::tempdir().unwrap();
    let files1 = export_scenario(&run, &stats, dir1.path()).unwrap();

    // reproduce purely from the manifest on disk
    let manifest = read_manifest(&dir1.path().join("manifest.json")).unwrap();
    let rerun = run_scenario(&manifest.scenario).unwrap();
    let stats2 = aggregate(&rerun).unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let files2 = export_scenario(&rerun, &stats2, dir2.path()).unwrap();

    let mut pass = files1.len() == files2.len();
    let mut n_files = 0;
    for (a, b) in files1.iter().zip(&files2) {
        pass &= std::fs::read(a).unwrap() == std::fs::read(b).unwrap();
        n_files += 1;
    }
    verdict(
        9,
        "manifest determinism",
        pass,
        &format!("{n_files} artifact files byte-identical"),
    );
}

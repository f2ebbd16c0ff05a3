//! Command-line interface: grid/data generation, single solves, paths,
//! parameter selection, and the benchmark harness.

use clap::{Args, Parser, Subcommand};
use gravmp::bench::{
    aggregate, boxplot_stats, export_scenario, read_manifest, run_scenario, scenario_grid,
    scenario_matrix, Scenario, TruthSource, DESK_SCALE, FULL_SCALE,
};
use gravmp::error::{Error, Result};
use gravmp::forward::{
    apply_forward, build_design_matrix, grid_to_csv, ingest_coefficients, synth_truth,
    write_coefficients, GridKind, PointGrid, TrackSet,
};
use gravmp::noise::{add_colored, add_local, add_white, noise_level, ArAlpha, LatLonBox, NoiseKind};
use gravmp::select::{
    build_path, choose, lambda_grid, lambda_grid_short, max_index_colored, max_index_white,
    ChoiceContext, Method, PathSolver, SpectralSurrogate,
};
use gravmp::solver::{precompute, rfmp, rofmp, SolverConfig};
use gravmp::sphere::{l2_norm, HarmonicModel, SobolevWeights};
use nalgebra::DVector;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "gravmp",
    version,
    about = "Greedy Tikhonov inversion of satellite gravity data on the sphere"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a point grid and export it as CSV (x,y,z,track_id)
    Grid {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate data for a truth model and add noise
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver at a single regularization parameter
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        lambda: f64,
        /// Output coefficient file
        #[arg(long)]
        out: PathBuf,
        /// Optional per-iteration diagnostics CSV
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Solve along the whole λ-grid and export the path summary
    Path {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 40)]
        lambda_count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all parameter-choice methods on a freshly computed path
    Select {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 40)]
        lambda_count: usize,
        /// Output directory for the per-method reports
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full benchmark scenario and export its artifacts
    Bench {
        /// Scenario label, e.g. "(500,5,wn,R)"
        #[arg(long, conflicts_with = "manifest")]
        scenario: Option<String>,
        /// Re-run the exact configuration stored in a manifest
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Shrunk preset (degree 30, ~2000 points, 40 λ, 8 realizations)
        #[arg(long, default_value_t = true)]
        desk_scale: bool,
        /// Full-size preset (degree 100, 8500 points, 100 λ, 32 realizations);
        /// expect a very long runtime
        #[arg(long, conflicts_with = "desk_scale")]
        full_scale: bool,
        /// Override the scenario base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Truth model: "synth" or a coefficient file path
        #[arg(long, default_value = "synth")]
        truth: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a per-realization inefficiency CSV into boxplot statistics
    Report {
        /// inefficiency.csv produced by `bench`
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Grid kind: reuter | scattered
    #[arg(long, default_value = "reuter")]
    kind: String,
    /// Approximate number of data points
    #[arg(long, default_value_t = 2000)]
    points: usize,
    #[arg(long, default_value_t = 500.0)]
    height_km: f64,
    /// Maximum spherical-harmonic degree
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truth model: "synth" or a coefficient file path
    #[arg(long, default_value = "synth")]
    truth: String,
    /// Spectral decay of the synthetic truth
    #[arg(long, default_value_t = 4.0)]
    power_exponent: f64,
}

#[derive(Args)]
struct NoiseArgs {
    /// Noise kind: white | colored | local
    #[arg(long, default_value = "white")]
    noise: String,
    #[arg(long, default_value_t = 0.05)]
    n2s: f64,
    /// Local noise: N2S outside the region
    #[arg(long)]
    n2s_outside: Option<f64>,
    /// Colored noise: fixed AR(1) α (drawn at random when omitted)
    #[arg(long)]
    ar_alpha: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    /// rfmp | rofmp | direct
    #[arg(long, default_value = "rfmp")]
    solver: String,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// ROFMP restart length
    #[arg(long, default_value_t = 50)]
    restart_k: usize,
}

struct Assembled {
    scenario: Scenario,
    grid: PointGrid,
    tracks: Option<TrackSet>,
    matrix: gravmp::forward::DesignMatrix,
    tables: gravmp::solver::DictionaryTables,
    weights: SobolevWeights,
    truth: HarmonicModel,
    clean: DVector<f64>,
}

fn parse_grid_kind(s: &str) -> Result<GridKind> {
    match s {
        "reuter" => Ok(GridKind::Reuter),
        "scattered" => Ok(GridKind::Scattered),
        other => Err(Error::input(format!("unknown grid kind '{other}'"))),
    }
}

fn parse_noise_kind(s: &str) -> Result<NoiseKind> {
    match s {
        "white" => Ok(NoiseKind::White),
        "colored" => Ok(NoiseKind::Colored),
        "local" => Ok(NoiseKind::Local),
        other => Err(Error::input(format!("unknown noise kind '{other}'"))),
    }
}

fn truth_source(spec: &str, power_exponent: f64) -> TruthSource {
    if spec == "synth" {
        TruthSource::Synth {
            power_exponent,
            seed: 42,
        }
    } else {
        TruthSource::Gfc { path: spec.into() }
    }
}

fn scenario_from_args(p: &ProblemArgs, n: &NoiseArgs, solver: &SolverArgs) -> Result<Scenario> {
    let noise = parse_noise_kind(&n.noise)?;
    let mut s = Scenario {
        label: String::new(),
        height_km: p.height_km,
        n2s: n.n2s,
        n2s_outside: n.n2s_outside.or((noise == NoiseKind::Local).then_some(0.01)),
        noise,
        ar_alpha: n.ar_alpha,
        region: (noise == NoiseKind::Local).then(LatLonBox::default),
        grid: parse_grid_kind(&p.kind)?,
        solver: PathSolver::from_str(&solver.solver)?,
        n_max: p.n_max,
        surrogate_n_max: p.n_max.max(100),
        target_points: p.points,
        lambda_count: 40,
        realizations: 1,
        base_seed: p.seed,
        truth: truth_source(&p.truth, p.power_exponent),
        max_iter: solver.max_iter,
        restart_k: solver.restart_k,
    };
    s.label = s.expected_label();
    s.validate()?;
    Ok(s)
}

fn assemble(s: &Scenario) -> Result<Assembled> {
    let (grid, tracks) = scenario_grid(s)?;
    let matrix = build_design_matrix(&grid, s.n_max)?;
    let weights = SobolevWeights::new(s.n_max);
    let tables = precompute(&matrix, &weights)?;
    let truth = match &s.truth {
        TruthSource::Synth {
            power_exponent,
            seed,
        } => synth_truth(s.n_max, *power_exponent, *seed),
        TruthSource::Gfc { path } => ingest_coefficients(path, s.n_max)?.model,
    };
    let clean = apply_forward(&matrix, &truth)?;
    Ok(Assembled {
        scenario: s.clone(),
        grid,
        tracks,
        matrix,
        tables,
        weights,
        truth,
        clean,
    })
}

/// Noisy data plus the AR(1) α if one was drawn.
fn add_noise(a: &Assembled, seed: u64) -> Result<(DVector<f64>, Option<f64>)> {
    let s = &a.scenario;
    match s.noise {
        NoiseKind::White => Ok((add_white(&a.clean, s.n2s, seed), None)),
        NoiseKind::Colored => {
            let tracks = a
                .tracks
                .as_ref()
                .ok_or_else(|| Error::input("colored noise needs a track grid"))?;
            let alpha = match s.ar_alpha {
                Some(v) => ArAlpha::Fixed(v),
                None => ArAlpha::Random,
            };
            let (y, used) = add_colored(&a.clean, tracks, s.n2s, alpha, seed)?;
            Ok((y, Some(used)))
        }
        NoiseKind::Local => {
            let region = s.region.unwrap_or_default();
            let out = s.n2s_outside.unwrap_or(s.n2s);
            let y = add_local(&a.clean, &a.grid, &region, s.n2s, out, seed)?;
            Ok((y, None))
        }
    }
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn solver_config(s: &Scenario, lambda: f64, y: &DVector<f64>) -> SolverConfig {
    let mut cfg = SolverConfig::new(lambda);
    cfg.max_iter = s.max_iter;
    cfg.restart_k = s.restart_k;
    cfg.stop_residual = s.n2s * y.norm();
    cfg
}

fn cmd_grid(problem: ProblemArgs, out: PathBuf) -> Result<()> {
    let noise = NoiseArgs {
        noise: "white".into(),
        n2s: 0.05,
        n2s_outside: None,
        ar_alpha: None,
    };
    let solver = SolverArgs {
        solver: "direct".into(),
        max_iter: 1,
        restart_k: 1,
    };
    let s = scenario_from_args(&problem, &noise, &solver)?;
    let (grid, tracks) = scenario_grid(&s)?;
    write_text(&out, &grid_to_csv(&grid, tracks.as_ref()))?;
    println!("wrote {} points to {}", grid.len(), out.display());
    Ok(())
}

fn cmd_simulate(problem: ProblemArgs, noise: NoiseArgs, out: PathBuf) -> Result<()> {
    let solver = SolverArgs {
        solver: "direct".into(),
        max_iter: 1,
        restart_k: 1,
    };
    let s = scenario_from_args(&problem, &noise, &solver)?;
    let a = assemble(&s)?;
    let (y, alpha) = add_noise(&a, s.base_seed)?;
    let mut track_of = vec![-1i64; a.grid.len()];
    if let Some(ts) = &a.tracks {
        for (t, track) in ts.tracks.iter().enumerate() {
            for &i in track {
                track_of[i] = t as i64;
            }
        }
    }
    let mut csv = String::from("x,y,z,track_id,clean,noisy\n");
    for (i, d) in a.grid.directions.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d[0], d[1], d[2], track_of[i], a.clean[i], y[i]
        ));
    }
    write_text(&out, &csv)?;
    if let Some(alpha) = alpha {
        println!("AR(1) alpha used: {alpha}");
    }
    println!("wrote {} rows to {}", a.grid.len(), out.display());
    Ok(())
}

fn run_single(
    a: &Assembled,
    y: &DVector<f64>,
    lambda: f64,
) -> Result<gravmp::solver::RegularizedSolution> {
    let cfg = solver_config(&a.scenario, lambda, y);
    match a.scenario.solver {
        PathSolver::Rfmp => rfmp::run(y, &a.matrix, &a.tables, &cfg),
        PathSolver::Rofmp => rofmp::run_with_restarts(y, &a.matrix, &a.tables, &cfg),
        PathSolver::Direct => {
            let model = gravmp::select::direct_tikhonov(y, &a.matrix, &a.tables, lambda)?;
            let fit = apply_forward(&a.matrix, &model)?;
            Ok(gravmp::solver::RegularizedSolution {
                residual: y - fit,
                model,
                stop: gravmp::solver::StopReason::Converged,
                iterations: 0,
                diagnostics: Vec::new(),
            })
        }
    }
}

fn cmd_solve(
    problem: ProblemArgs,
    noise: NoiseArgs,
    solver: SolverArgs,
    lambda: f64,
    out: PathBuf,
    diagnostics: Option<PathBuf>,
) -> Result<()> {
    let s = scenario_from_args(&problem, &noise, &solver)?;
    let a = assemble(&s)?;
    let (y, _) = add_noise(&a, s.base_seed)?;
    let sol = run_single(&a, &y, lambda)?;
    write_coefficients(&sol.model, &out)?;
    println!(
        "solver {} stopped after {} iterations ({:?}); residual norm {}",
        s.solver.name(),
        sol.iterations,
        sol.stop,
        sol.residual.norm()
    );
    if let Some(diag) = diagnostics {
        write_text(&diag, &sol.diagnostics_csv())?;
    }
    Ok(())
}

fn grid_for_count(count: usize) -> Result<gravmp::select::LambdaGrid> {
    if count == 100 {
        Ok(lambda_grid())
    } else {
        lambda_grid_short(count)
    }
}

fn cmd_path(
    problem: ProblemArgs,
    noise: NoiseArgs,
    solver: SolverArgs,
    lambda_count: usize,
    out: PathBuf,
) -> Result<()> {
    let s = scenario_from_args(&problem, &noise, &solver)?;
    let a = assemble(&s)?;
    let (y, _) = add_noise(&a, s.base_seed)?;
    let grid = grid_for_count(lambda_count)?;
    let base = solver_config(&s, 0.0, &y);
    let path = build_path(&y, &a.matrix, &a.tables, &a.weights, &grid, s.solver, &base)?;
    let mut csv = String::from("k,lambda,residual_norm,h_norm,iterations\n");
    for (i, e) in path.entries.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            e.lambda,
            e.residual_norm,
            e.h_norm,
            e.iterations
        ));
    }
    write_text(&out, &csv)?;
    println!("wrote path of {} entries to {}", path.len(), out.display());
    Ok(())
}

fn cmd_select(
    problem: ProblemArgs,
    noise: NoiseArgs,
    solver: SolverArgs,
    lambda_count: usize,
    out: PathBuf,
) -> Result<()> {
    let s = scenario_from_args(&problem, &noise, &solver)?;
    let a = assemble(&s)?;
    let (y, _) = add_noise(&a, s.base_seed)?;
    let grid = grid_for_count(lambda_count)?;
    let base = solver_config(&s, 0.0, &y);
    let path = build_path(&y, &a.matrix, &a.tables, &a.weights, &grid, s.solver, &base)?;
    let surrogate = SpectralSurrogate::new(a.grid.radius, s.n_max, y.len())?;
    let k_hat = match s.noise {
        NoiseKind::White => max_index_white(&surrogate, &grid),
        _ => {
            let (y2, _) = add_noise(&a, s.base_seed ^ 0x8000_0000_0000_0000)?;
            let path2 = build_path(&y2, &a.matrix, &a.tables, &a.weights, &grid, s.solver, &base)?;
            let m1: Vec<_> = path.entries.iter().map(|e| e.model.clone()).collect();
            let m2: Vec<_> = path2.entries.iter().map(|e| e.model.clone()).collect();
            max_index_colored(&m1, &m2, &a.weights, &grid)?
        }
    };
    let ctx = ChoiceContext {
        epsilon: noise_level(&a.clean, s.n2s)?,
        surrogate: &surrogate,
        k_hat,
        matrix: &a.matrix,
        tables: &a.tables,
        weights: &a.weights,
        y: &y,
    };
    std::fs::create_dir_all(&out).map_err(|e| Error::io(out.display().to_string(), e))?;
    // optimal index against the known truth, for reference
    let errors: Vec<f64> = path
        .entries
        .iter()
        .map(|e| {
            let diff: Vec<f64> = a
                .truth
                .coeffs
                .iter()
                .zip(&e.model.coeffs)
                .map(|(t, c)| t - c)
                .collect();
            l2_norm(&HarmonicModel::from_coeffs(s.n_max, diff).expect("aligned"))
        })
        .collect();
    let k_opt = errors
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).expect("finite"))
        .map(|(i, _)| i + 1)
        .expect("non-empty path");
    let mut summary = String::from("method,k_star,lambda_star,inefficiency\n");
    for method in Method::ALL {
        let report = choose(method, &path, &ctx)?;
        write_text(
            &out.join(format!("{}.json", method.name())),
            &report.to_json()?,
        )?;
        let (ks, ls, ineff) = match report.k_star {
            Some(k) => (
                k.to_string(),
                report.lambda_star.expect("set with k_star").to_string(),
                (errors[k - 1] / errors[k_opt - 1]).to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        summary.push_str(&format!("{},{},{},{}\n", method.name(), ks, ls, ineff));
    }
    write_text(&out.join("summary.csv"), &summary)?;
    println!("K-hat = {k_hat}, k_opt = {k_opt}; reports in {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    scenario: Option<String>,
    manifest: Option<PathBuf>,
    solver: SolverArgs,
    full_scale: bool,
    seed: Option<u64>,
    truth: String,
    out: PathBuf,
) -> Result<()> {
    let mut s = if let Some(path) = manifest {
        read_manifest(&path)?.scenario
    } else {
        let label = scenario.ok_or_else(|| Error::input("--scenario or --manifest required"))?;
        let scale = if full_scale { FULL_SCALE } else { DESK_SCALE };
        scenario_matrix(PathSolver::from_str(&solver.solver)?, scale)
            .into_iter()
            .find(|s| s.label == label)
            .ok_or_else(|| Error::input(format!("unknown scenario label '{label}'")))?
    };
    if let Some(seed) = seed {
        s.base_seed = seed;
    }
    if truth != "synth" {
        s.truth = TruthSource::Gfc { path: truth.into() };
    }
    let run = run_scenario(&s)?;
    let stats = aggregate(&run)?;
    let files = export_scenario(&run, &stats, &out)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    for failure in &run.failures {
        eprintln!("realization {} failed: {}", failure.seed, failure.message);
    }
    for (method, st) in &stats {
        match st {
            Some(st) => println!(
                "{:6} median inefficiency {:.3}",
                method.name(),
                10f64.powf(st.median)
            ),
            None => println!("{:6} too few selections to aggregate", method.name()),
        }
    }
    Ok(())
}

fn cmd_report(input: PathBuf, out: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&input).map_err(|e| Error::io(input.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::input("empty input"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::input(format!("missing column '{name}'")))
    };
    let (c_scen, c_method, c_ineff) = (find("scenario")?, find("method")?, find("inefficiency")?);
    let mut groups: Vec<((String, String), Vec<f64>)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno + 2,
                msg: "wrong number of fields".into(),
            });
        }
        let Ok(v) = fields[c_ineff].parse::<f64>() else {
            continue; // method selected nothing in this realization
        };
        let key = (fields[c_scen].to_string(), fields[c_method].to_string());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => vs.push(v.log10()),
            None => groups.push((key, vec![v.log10()])),
        }
    }
    let mut csv = String::from("scenario,method,median,q1,q3,wlow,whigh,n_outliers\n");
    for ((scen, method), values) in &groups {
        if values.len() < 4 {
            csv.push_str(&format!("{scen},{method},,,,,,\n"));
            continue;
        }
        let s = boxplot_stats(values)?;
        csv.push_str(&format!(
            "{scen},{method},{},{},{},{},{},{}\n",
            s.median,
            s.q1,
            s.q3,
            s.whisker_low,
            s.whisker_high,
            s.outliers.len()
        ));
    }
    write_text(&out, &csv)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Grid { problem, out } => cmd_grid(problem, out),
        Cmd::Simulate {
            problem,
            noise,
            out,
        } => cmd_simulate(problem, noise, out),
        Cmd::Solve {
            problem,
            noise,
            solver,
            lambda,
            out,
            diagnostics,
        } => cmd_solve(problem, noise, solver, lambda, out, diagnostics),
        Cmd::Path {
            problem,
            noise,
            solver,
            lambda_count,
            out,
        } => cmd_path(problem, noise, solver, lambda_count, out),
        Cmd::Select {
            problem,
            noise,
            solver,
            lambda_count,
            out,
        } => cmd_select(problem, noise, solver, lambda_count, out),
        Cmd::Bench {
            scenario,
            manifest,
            solver,
            desk_scale: _,
            full_scale,
            seed,
            truth,
            out,
        } => cmd_bench(scenario, manifest, solver, full_scale, seed, truth, out),
        Cmd::Report { input, out } => cmd_report(input, out),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

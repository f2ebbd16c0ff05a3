//! Artifact export: manifest, statistics CSVs, map grids, error curves.
//! All numbers are written with Rust's shortest-roundtrip float formatting,
//! so identical runs produce byte-identical files.

use crate::bench::scenario::ScenarioRun;
use crate::bench::stats::BoxplotStats;
use crate::error::{Error, Result};
use crate::select::Method;
use crate::sphere::HarmonicModel;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything needed to reproduce a run byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: crate::bench::scenario::Scenario,
    pub seeds: Vec<u64>,
    /// AR(1) α drawn per realization (colored noise only).
    pub alphas: Vec<Option<f64>>,
}

impl Manifest {
    pub fn for_run(run: &ScenarioRun) -> Manifest {
        Manifest {
            scenario: run.scenario.clone(),
            seeds: run.results.iter().map(|r| r.seed).collect(),
            alphas: run.results.iter().map(|r| r.alpha_used).collect(),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Columns: scenario,method,median,q1,q3,wlow,whigh,n_outliers.
pub fn stats_csv(run: &ScenarioRun, stats: &[(Method, Option<BoxplotStats>)]) -> String {
    let mut out = String::from("scenario,method,median,q1,q3,wlow,whigh,n_outliers\n");
    for (method, s) in stats {
        match s {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    run.scenario.label,
                    method.name(),
                    s.median,
                    s.q1,
                    s.q3,
                    s.whisker_low,
                    s.whisker_high,
                    s.outliers.len()
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,,,,", run.scenario.label, method.name());
            }
        }
    }
    out
}

/// One row per realization and method.
pub fn inefficiency_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("scenario,seed,method,k_star,k_opt,k_hat,inefficiency\n");
    for r in &run.results {
        for o in &r.outcomes {
            let k_star = o.k_star.map_or(String::new(), |k| k.to_string());
            let ineff = o.inefficiency.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                run.scenario.label,
                r.seed,
                o.method.name(),
                k_star,
                r.k_opt,
                r.k_hat,
                ineff
            );
        }
    }
    out
}

/// ‖x − x_k^ε‖ against k, per realization.
pub fn error_vs_k_csv(run: &ScenarioRun) -> String {
    let mut out = String::from("seed,k,lambda,error\n");
    for r in &run.results {
        for (i, err) in r.errors_vs_k.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", r.seed, i + 1, run.lambda[i], err);
        }
    }
    out
}

/// Field values on a 1° grid: 181 latitudes × 360 longitudes.
pub fn map_csv(model: &HarmonicModel) -> Result<String> {
    let mut out = String::from("lat,lon,value\n");
    for ilat in 0..=180 {
        let lat = 90.0 - ilat as f64;
        let (slat, clat) = lat.to_radians().sin_cos();
        for lon in 0..360 {
            let (slon, clon) = (lon as f64).to_radians().sin_cos();
            let dir = [clat * clon, clat * slon, slat];
            let value = model.eval(&dir)?;
            let _ = writeln!(out, "{lat},{lon},{value}");
        }
    }
    Ok(out)
}

fn model_diff(a: &HarmonicModel, b: &HarmonicModel) -> Result<HarmonicModel> {
    HarmonicModel::from_coeffs(
        a.max_degree,
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
    )
}

/// Writes all artifacts of a scenario run into `dir`; returns the paths.
pub fn export_scenario(
    run: &ScenarioRun,
    stats: &[(Method, Option<BoxplotStats>)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };
    emit(
        "manifest.json",
        serde_json::to_string_pretty(&Manifest::for_run(run))?,
    )?;
    emit("stats.csv", stats_csv(run, stats))?;
    emit("inefficiency.csv", inefficiency_csv(run))?;
    emit("error_vs_k.csv", error_vs_k_csv(run))?;
    emit("map_truth.csv", map_csv(&run.truth)?)?;
    if let Some(approx) = &run.showcase_model {
        emit("map_approx.csv", map_csv(approx)?)?;
        emit("map_diff.csv", map_csv(&model_diff(&run.truth, approx)?)?)?;
    }
    Ok(written)
}

//! Boxplot statistics of log-scale inefficiencies.

use crate::bench::scenario::ScenarioRun;
use crate::error::{Error, Result};
use crate::select::Method;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest value within Q1 − 1.5·IQR.
    pub whisker_low: f64,
    /// Largest value within Q3 + 1.5·IQR.
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile (R type 7) of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - h.floor()) * (sorted[hi] - sorted[lo])
}

/// Tukey boxplot of raw values (no transformation applied here).
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats> {
    if values.len() < 4 {
        return Err(Error::input(format!(
            "need at least 4 values for boxplot statistics, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value in boxplot input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v >= lo_fence && v <= hi_fence)
        .collect();
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < lo_fence || v > hi_fence)
        .collect();
    Ok(BoxplotStats {
        median,
        q1,
        q3,
        whisker_low: *inside.first().expect("quartiles lie inside the fences"),
        whisker_high: *inside.last().expect("quartiles lie inside the fences"),
        outliers,
    })
}

/// Per-method boxplots of log10(inefficiency). Methods with fewer than 4
/// selecting realizations are reported as `None`.
pub fn aggregate(run: &ScenarioRun) -> Result<Vec<(Method, Option<BoxplotStats>)>> {
    if run.results.len() < 4 {
        return Err(Error::input(format!(
            "need at least 4 realizations to aggregate, got {}",
            run.results.len()
        )));
    }
    let mut out = Vec::with_capacity(Method::ALL.len());
    for method in Method::ALL {
        let values: Vec<f64> = run
            .results
            .iter()
            .flat_map(|r| {
                r.outcomes
                    .iter()
                    .find(|o| o.method == method)
                    .and_then(|o| o.inefficiency)
            })
            .filter(|v| v.is_finite())
            .map(|v| v.log10())
            .collect();
        let stats = if values.len() >= 4 {
            Some(boxplot_stats(&values)?)
        } else {
            None
        };
        out.push((method, stats));
    }
    Ok(out)
}

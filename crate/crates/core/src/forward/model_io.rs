//! Ground-truth models: gfc-style coefficient files and a synthetic
//! power-law generator.
//!
//! File format: whitespace-separated text with lines `gfc n m C_{nm} S_{nm}`.
//! Lines starting with `#` are comments; anything before the first line
//! beginning with `gfc` is treated as header and skipped. Real EGM2008-style
//! files therefore load unchanged (truncated at the requested degree).

use crate::error::{Error, Result};
use crate::sphere::{coeff_len, HarmonicIndex, HarmonicModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct IngestResult {
    pub model: HarmonicModel,
    /// Degrees <= n_max with no coefficient line in the file (filled with 0).
    pub missing_degrees: usize,
}

/// Parses gfc-style text into a model truncated at `n_max`.
pub fn parse_coefficients(text: &str, n_max: usize) -> Result<IngestResult> {
    let mut model = HarmonicModel::zero(n_max);
    let mut seen_degree = vec![false; n_max + 1];
    let mut in_body = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !line.starts_with("gfc") {
            if in_body {
                // trailing non-gfc rows inside the body are malformed
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected 'gfc' row, got: {line}"),
                });
            }
            continue; // header
        }
        in_body = true;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 'gfc n m C S', got {} fields", fields.len()),
            });
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad integer '{s}': {e}"),
            })
        };
        let parse_f64 = |s: &str| {
            // gfc files sometimes use Fortran D exponents
            s.replace(['D', 'd'], "E").parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("bad number '{s}': {e}"),
            })
        };
        let n = parse_usize(fields[1])?;
        let m = parse_usize(fields[2])?;
        let c = parse_f64(fields[3])?;
        let s = parse_f64(fields[4])?;
        if m > n {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("order {m} exceeds degree {n}"),
            });
        }
        if n > n_max {
            continue; // truncation
        }
        seen_degree[n] = true;
        model.set(HarmonicIndex::new(n, m as i64)?, c);
        if m > 0 {
            model.set(HarmonicIndex::new(n, -(m as i64))?, s);
        }
    }
    let missing_degrees = seen_degree.iter().filter(|&&s| !s).count();
    Ok(IngestResult {
        model,
        missing_degrees,
    })
}

pub fn ingest_coefficients(path: &Path, n_max: usize) -> Result<IngestResult> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_coefficients(&text, n_max)
}

/// Serializes a model in the same gfc column layout (bit-exact round trip).
pub fn export_coefficients(model: &HarmonicModel) -> String {
    let mut out = String::from("# spherical-harmonic coefficients\n");
    for n in 0..=model.max_degree {
        for m in 0..=n {
            let c = model.get(HarmonicIndex { degree: n, order: m as i64 });
            let s = if m > 0 {
                model.get(HarmonicIndex {
                    degree: n,
                    order: -(m as i64),
                })
            } else {
                0.0
            };
            out.push_str(&format!("gfc {n} {m} {c:e} {s:e}\n"));
        }
    }
    out
}

pub fn write_coefficients(model: &HarmonicModel, path: &Path) -> Result<()> {
    std::fs::write(path, export_coefficients(model))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Synthetic truth with per-coefficient variance ∝ (n+1)^{-power_exponent},
/// deterministic per seed.
pub fn synth_truth(n_max: usize, power_exponent: f64, seed: u64) -> HarmonicModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut coeffs = Vec::with_capacity(coeff_len(n_max));
    for n in 0..=n_max {
        let sigma = (n as f64 + 1.0).powf(-0.5 * power_exponent);
        for _ in 0..(2 * n + 1) {
            coeffs.push(sigma * normal.sample(&mut rng));
        }
    }
    HarmonicModel {
        max_degree: n_max,
        coeffs,
    }
}

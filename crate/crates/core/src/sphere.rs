//! Real spherical harmonics and the Sobolev space used as the penalty norm.
//!
//! The basis is real, fully normalized and orthonormal in L²(Ω) (unit sphere,
//! surface measure), without the Condon-Shortley phase:
//!
//!   Y_{n,0}  = P̄_{n,0}(cos θ)
//!   Y_{n,j}  = √2 P̄_{n,|j|}(cos θ) cos(jφ)   for j > 0
//!   Y_{n,j}  = √2 P̄_{n,|j|}(cos θ) sin(|j|φ) for j < 0
//!
//! where P̄ are the normalized associated Legendre functions evaluated with the
//! standard three-term recurrence, stable well beyond degree 100.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Degree/order pair identifying one real spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub degree: usize,
    pub order: i64,
}

impl HarmonicIndex {
    pub fn new(degree: usize, order: i64) -> Result<Self> {
        if order.unsigned_abs() as usize > degree {
            return Err(Error::input(format!(
                "order {order} out of range for degree {degree}"
            )));
        }
        Ok(HarmonicIndex { degree, order })
    }

    /// Flat index n² + n + j, a bijection onto 0..(N_max+1)²-1.
    pub fn flat(&self) -> usize {
        (self.degree * self.degree) as usize + (self.degree as i64 + self.order) as usize
    }

    /// Inverse of [`flat`](Self::flat).
    pub fn from_flat(flat: usize) -> Self {
        let n = (flat as f64).sqrt() as usize;
        // guard against rounding at perfect squares
        let n = if (n + 1) * (n + 1) <= flat { n + 1 } else { n };
        let j = flat as i64 - (n * n + n) as i64;
        HarmonicIndex {
            degree: n,
            order: j,
        }
    }
}

/// Number of harmonics up to and including degree `n_max`.
pub fn coeff_len(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 1)
}

/// A real spherical-harmonic expansion up to a maximal degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicModel {
    pub max_degree: usize,
    pub coeffs: Vec<f64>,
}

impl HarmonicModel {
    pub fn zero(max_degree: usize) -> Self {
        HarmonicModel {
            max_degree,
            coeffs: vec![0.0; coeff_len(max_degree)],
        }
    }

    pub fn from_coeffs(max_degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != coeff_len(max_degree) {
            return Err(Error::dimension(format!(
                "expected {} coefficients for degree {}, got {}",
                coeff_len(max_degree),
                max_degree,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("non-finite coefficient"));
        }
        Ok(HarmonicModel { max_degree, coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, idx: HarmonicIndex) -> f64 {
        self.coeffs[idx.flat()]
    }

    pub fn set(&mut self, idx: HarmonicIndex, value: f64) {
        self.coeffs[idx.flat()] = value;
    }

    /// Pointwise evaluation Σ c_{n,j} Y_{n,j}(dir).
    pub fn eval(&self, dir: &[f64; 3]) -> Result<f64> {
        let table = eval_all(self.max_degree, dir)?;
        Ok(self
            .coeffs
            .iter()
            .zip(table.iter())
            .map(|(c, y)| c * y)
            .sum())
    }
}

/// Per-degree Sobolev weights a_n = (n + 1/2)²; the 𝓗 inner product uses a_n².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevWeights {
    pub a: Vec<f64>,
}

impl SobolevWeights {
    pub fn new(n_max: usize) -> Self {
        SobolevWeights {
            a: (0..=n_max).map(|n| (n as f64 + 0.5) * (n as f64 + 0.5)).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.a.len() - 1
    }

    /// a_n² for the degree of a flat-indexed dictionary element.
    pub fn weight_sq(&self, flat: usize) -> f64 {
        let n = HarmonicIndex::from_flat(flat).degree;
        self.a[n] * self.a[n]
    }

    /// All a_n² expanded to flat-index order.
    pub fn flat_weights_sq(&self) -> Vec<f64> {
        let n_max = self.n_max();
        let mut out = Vec::with_capacity(coeff_len(n_max));
        for n in 0..=n_max {
            let w = self.a[n] * self.a[n];
            for _ in 0..(2 * n + 1) {
                out.push(w);
            }
        }
        out
    }
}

fn check_unit(dir: &[f64; 3]) -> Result<()> {
    let norm2 = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
    if (norm2.sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!(
            "direction is not a unit vector (|dir| = {})",
            norm2.sqrt()
        )));
    }
    Ok(())
}

/// Normalized associated Legendre functions P̄_{n,m}(cos θ) for all n ≤ n_max,
/// 0 ≤ m ≤ n, such that Y_{n,0} = P̄_{n,0} and Y_{n,±m} = √2 P̄_{n,m}·{cos,sin}(mφ).
///
/// Output layout: p[m] holds P̄_{n,m} for n = m..=n_max.
fn legendre_table(n_max: usize, cos_t: f64, sin_t: f64) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 0..=n_max {
        if m > 0 {
            // sectoral step P̄_{m,m} = sin θ √((2m+1)/(2m)) P̄_{m-1,m-1}
            pmm *= sin_t * ((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt();
        }
        let mut col = Vec::with_capacity(n_max - m + 1);
        col.push(pmm);
        if m < n_max {
            let p_m1 = (2.0 * m as f64 + 3.0).sqrt() * cos_t * pmm;
            col.push(p_m1);
            let (mut prev2, mut prev1) = (pmm, p_m1);
            for n in (m + 2)..=n_max {
                let nf = n as f64;
                let mf = m as f64;
                let a = ((2.0 * nf - 1.0) * (2.0 * nf + 1.0) / ((nf - mf) * (nf + mf))).sqrt();
                let b = ((2.0 * nf + 1.0) * (nf - 1.0 - mf) * (nf - 1.0 + mf)
                    / ((nf - mf) * (nf + mf) * (2.0 * nf - 3.0)))
                    .sqrt();
                let val = a * cos_t * prev1 - b * prev2;
                prev2 = prev1;
                prev1 = val;
                col.push(val);
            }
        }
        p.push(col);
    }
    p
}

/// Evaluates all Y_{n,j}(dir) for n ≤ n_max into flat-index order.
pub fn eval_all(n_max: usize, dir: &[f64; 3]) -> Result<Vec<f64>> {
    check_unit(dir)?;
    let cos_t = dir[2].clamp(-1.0, 1.0);
    let sin_t = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let phi = dir[1].atan2(dir[0]);
    let p = legendre_table(n_max, cos_t, sin_t);
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0; coeff_len(n_max)];
    for n in 0..=n_max {
        let base = n * n + n;
        out[base] = p[0][n];
        for m in 1..=n {
            let pv = sqrt2 * p[m][n - m];
            let (s, c) = (m as f64 * phi).sin_cos();
            out[base + m] = pv * c;
            out[(base as i64 - m as i64) as usize] = pv * s;
        }
    }
    Ok(out)
}

/// Evaluates a single Y_{n,j}(dir).
pub fn eval_sh(idx: HarmonicIndex, dir: &[f64; 3]) -> Result<f64> {
    check_unit(dir)?;
    let table = eval_all(idx.degree, dir)?;
    Ok(table[idx.flat()])
}

fn check_same_degree(a: &HarmonicModel, b: &HarmonicModel) -> Result<()> {
    if a.max_degree != b.max_degree {
        return Err(Error::dimension(format!(
            "max degrees differ: {} vs {}",
            a.max_degree, b.max_degree
        )));
    }
    Ok(())
}

/// ⟨A, B⟩_𝓗 = Σ_{n,j} a_n² Â_{n,j} B̂_{n,j}, summed in ascending flat order.
pub fn sobolev_inner(a: &HarmonicModel, b: &HarmonicModel, w: &SobolevWeights) -> Result<f64> {
    check_same_degree(a, b)?;
    if w.n_max() != a.max_degree {
        return Err(Error::dimension("weight table degree mismatch"));
    }
    let mut acc = 0.0;
    for n in 0..=a.max_degree {
        let wn = w.a[n] * w.a[n];
        let base = n * n;
        for k in 0..(2 * n + 1) {
            acc += wn * a.coeffs[base + k] * b.coeffs[base + k];
        }
    }
    Ok(acc)
}

pub fn sobolev_norm(a: &HarmonicModel, w: &SobolevWeights) -> Result<f64> {
    Ok(sobolev_inner(a, a, w)?.sqrt())
}

/// L²(Ω) inner product; by Parseval this is the Euclidean coefficient product.
pub fn l2_inner(a: &HarmonicModel, b: &HarmonicModel) -> Result<f64> {
    check_same_degree(a, b)?;
    Ok(a.coeffs
        .iter()
        .zip(b.coeffs.iter())
        .map(|(x, y)| x * y)
        .sum())
}

pub fn l2_norm(a: &HarmonicModel) -> f64 {
    a.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt()
}

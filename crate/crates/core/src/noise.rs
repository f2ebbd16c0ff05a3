//! Noise generation: white, AR(1)-colored per satellite track, and local
//! (region-dependent) white noise, all at a prescribed noise-to-signal ratio.
//!
//! Every generator is a pure function of (inputs, seed). Colored noise uses
//! one RNG substream per track, so the output does not depend on track
//! iteration order.

use crate::error::{Error, Result};
use crate::forward::grid::{latitude, longitude, PointGrid, TrackSet};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

/// AR(1) correlation: fixed, or drawn uniformly in (-1, 1) once per data set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArAlpha {
    Fixed(f64),
    Random,
}

/// Latitude-longitude box on the sphere, angles in degrees.
/// The default covers the South Atlantic, extended to the South pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLonBox {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
}

impl Default for LatLonBox {
    fn default() -> Self {
        LatLonBox {
            lat_min_deg: -90.0,
            lat_max_deg: 0.0,
            lon_min_deg: -90.0,
            lon_max_deg: 0.0,
        }
    }
}

impl LatLonBox {
    pub fn contains(&self, dir: &[f64; 3]) -> bool {
        let lat = latitude(dir).to_degrees();
        let lon = longitude(dir).to_degrees();
        lat >= self.lat_min_deg
            && lat <= self.lat_max_deg
            && lon >= self.lon_min_deg
            && lon <= self.lon_max_deg
    }

    /// Solid angle of the box in steradians.
    pub fn solid_angle(&self) -> f64 {
        let dlon = (self.lon_max_deg - self.lon_min_deg).to_radians();
        let band = self.lat_max_deg.to_radians().sin() - self.lat_min_deg.to_radians().sin();
        dlon * band
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    White,
    Colored,
    Local,
}

/// Full description of one noise scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub n2s: f64,
    /// Local noise only: N2S outside the region.
    #[serde(default)]
    pub n2s_outside: Option<f64>,
    /// Colored noise only.
    #[serde(default)]
    pub ar_alpha: Option<ArAlpha>,
    /// Local noise only.
    #[serde(default)]
    pub region: Option<LatLonBox>,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.n2s >= 0.0 && self.n2s < 1.0) {
            return Err(Error::input(format!("n2s {} out of [0,1)", self.n2s)));
        }
        if let Some(ArAlpha::Fixed(a)) = self.ar_alpha {
            if a.abs() >= 1.0 {
                return Err(Error::input(format!("AR(1) alpha {a} not in (-1,1)")));
            }
        }
        Ok(())
    }
}

/// ε = N2S·‖y‖/√l.
pub fn noise_level(y: &DVector<f64>, n2s: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::input("empty data vector"));
    }
    Ok(n2s * y.norm() / (y.len() as f64).sqrt())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multiplicative white noise y_i^ε = (1 + N2S·ϵ_i) y_i with ϵ_i ~ 𝒩(0,1).
pub fn add_white(y: &DVector<f64>, n2s: f64, seed: u64) -> DVector<f64> {
    let mut rng = stream_rng(seed, 0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    DVector::from_iterator(
        y.len(),
        y.iter().map(|&yi| (1.0 + n2s * normal.sample(&mut rng)) * yi),
    )
}

/// AR(1)-colored noise, one independent sequence per track in chronological
/// order: ϵ_1 ~ 𝒩(0,1), ϵ_i = α ϵ_{i-1} + ε_i. Returns the noisy data and
/// the α actually used (drawn uniformly in (-1,1) when `alpha` is `Random`).
pub fn add_colored(
    y: &DVector<f64>,
    tracks: &TrackSet,
    n2s: f64,
    alpha: ArAlpha,
    seed: u64,
) -> Result<(DVector<f64>, f64)> {
    tracks.validate(y.len())?;
    let alpha_used = match alpha {
        ArAlpha::Fixed(a) => {
            if a.abs() >= 1.0 {
                return Err(Error::input(format!("AR(1) alpha {a} not in (-1,1)")));
            }
            a
        }
        // drawn once per data set from a dedicated substream
        ArAlpha::Random => stream_rng(seed, u64::MAX).gen_range(-1.0..1.0),
    };
    let mut out = y.clone();
    for (t, track) in tracks.tracks.iter().enumerate() {
        let mut rng = stream_rng(seed, t as u64);
        let mut eps: f64 = rng.sample(StandardNormal);
        for (pos, &i) in track.iter().enumerate() {
            if pos > 0 {
                let innovation: f64 = rng.sample(StandardNormal);
                eps = alpha_used * eps + innovation;
            }
            out[i] = (1.0 + n2s * eps) * y[i];
        }
    }
    Ok((out, alpha_used))
}

/// White noise with `n2s_in` inside the region and `n2s_out` outside.
pub fn add_local(
    y: &DVector<f64>,
    grid: &PointGrid,
    region: &LatLonBox,
    n2s_in: f64,
    n2s_out: f64,
    seed: u64,
) -> Result<DVector<f64>> {
    if grid.len() != y.len() {
        return Err(Error::dimension("grid/data length mismatch"));
    }
    let mut rng = stream_rng(seed, 0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut out = y.clone();
    for i in 0..y.len() {
        let n2s = if region.contains(&grid.directions[i]) {
            n2s_in
        } else {
            n2s_out
        };
        out[i] = (1.0 + n2s * normal.sample(&mut rng)) * y[i];
    }
    Ok(out)
}

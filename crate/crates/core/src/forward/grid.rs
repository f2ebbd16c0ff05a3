//! Point grids at satellite height: the Reuter grid and a procedural
//! satellite-track ("scattered") grid.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Reuter,
    Scattered,
}

/// Unit-sphere directions with a common orbit radius factor r > 1
/// (measured in Earth radii; r = 1 is permitted only for tests).
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    pub directions: Vec<[f64; 3]>,
    pub radius: f64,
    pub kind: GridKind,
}

impl PointGrid {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// An ordered partition of grid point indices into satellite tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSet {
    pub tracks: Vec<Vec<usize>>,
}

impl TrackSet {
    /// One track covering 0..len in order.
    pub fn single(len: usize) -> Self {
        TrackSet {
            tracks: vec![(0..len).collect()],
        }
    }

    pub fn total_points(&self) -> usize {
        self.tracks.iter().map(|t| t.len()).sum()
    }

    /// Checks that the tracks cover 0..l exactly once.
    pub fn validate(&self, l: usize) -> Result<()> {
        let mut seen = vec![false; l];
        for t in &self.tracks {
            for &i in t {
                if i >= l || seen[i] {
                    return Err(Error::input(format!(
                        "tracks do not partition 0..{l} (index {i})"
                    )));
                }
                seen[i] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::input(format!("tracks do not cover all {l} points")))
        }
    }
}

fn spherical_dir(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Reuter grid: poles plus latitude rings θ_k = kπ/control, each ring holding
/// ⌊2π / arccos((cos δ − cos² θ_k)/sin² θ_k)⌋ equispaced longitudes with
/// δ = π/control and a half-spacing longitude offset alternating per ring.
pub fn reuter_grid(control: usize, radius: f64) -> Result<PointGrid> {
    if control < 2 {
        return Err(Error::input("Reuter control parameter must be >= 2"));
    }
    if radius <= 0.0 {
        return Err(Error::input("radius must be positive"));
    }
    let delta = PI / control as f64;
    let mut directions = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    for k in 1..control {
        let theta = k as f64 * delta;
        let (st, ct) = (theta.sin(), theta.cos());
        let arg = ((delta.cos() - ct * ct) / (st * st)).clamp(-1.0, 1.0);
        let ring_count = (2.0 * PI / arg.acos()).floor() as usize;
        let spacing = 2.0 * PI / ring_count as f64;
        let offset = if k % 2 == 0 { 0.5 * spacing } else { 0.0 };
        for i in 0..ring_count {
            directions.push(spherical_dir(theta, offset + i as f64 * spacing));
        }
    }
    Ok(PointGrid {
        directions,
        radius,
        kind: GridKind::Reuter,
    })
}

/// Number of points of the Reuter grid for a given control parameter.
pub fn reuter_count(control: usize) -> Result<usize> {
    Ok(reuter_grid(control, 2.0)?.len())
}

/// Finds the Reuter control parameter whose point count falls inside the
/// target range, by bisection on the (monotone) count.
pub fn reuter_control_for_count(min_count: usize, max_count: usize) -> Result<usize> {
    let (mut lo, mut hi) = (2usize, 4096usize);
    if reuter_count(hi)? < min_count {
        return Err(Error::input("target count out of reach"));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        let c = reuter_count(mid)?;
        if c < min_count {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let c = reuter_count(lo)?;
    if c < min_count || c > max_count {
        return Err(Error::input(format!(
            "no Reuter control yields a count in [{min_count}, {max_count}] (nearest: {c})"
        )));
    }
    Ok(lo)
}

/// Configuration for [`scattered_track_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteredConfig {
    /// Short high-latitude tracks, alternating north/south caps.
    pub n_tracks_polar: usize,
    /// Full polar great circles crossing the equatorial belt.
    pub n_tracks_equatorial: usize,
    pub pts_per_track: usize,
    pub seed: u64,
}

impl ScatteredConfig {
    /// Defaults matching an 8500-point grid: 50 full circles + 120 polar arcs,
    /// 50 points each.
    pub fn default_full() -> Self {
        ScatteredConfig {
            n_tracks_polar: 120,
            n_tracks_equatorial: 50,
            pts_per_track: 50,
            seed: 0,
        }
    }
}

fn rotate_about_z(v: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Procedural satellite-track grid: full polar great circles with random
/// ascending nodes, plus shorter arcs confined to the polar caps, so that the
/// equatorial belt (|lat| < 30°) is crossed by fewer tracks and the caps
/// accumulate data points. Deterministic for a fixed seed.
pub fn scattered_track_grid(
    config: &ScatteredConfig,
    radius: f64,
) -> Result<(PointGrid, TrackSet)> {
    if config.n_tracks_polar + config.n_tracks_equatorial == 0 {
        return Err(Error::input("at least one track required"));
    }
    if config.pts_per_track == 0 {
        return Err(Error::input("pts_per_track must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut directions = Vec::new();
    let mut tracks = Vec::new();
    let m = config.pts_per_track;

    // full polar great circles, sampled pole to pole and back
    for _ in 0..config.n_tracks_equatorial {
        let node: f64 = rng.gen::<f64>() * 2.0 * PI;
        let jitter: f64 = rng.gen::<f64>();
        let mut track = Vec::with_capacity(m);
        for i in 0..m {
            let t = 2.0 * PI * (i as f64 + jitter) / m as f64;
            // meridian plane through the node, parameter t runs around the circle
            let v = [t.sin(), 0.0, t.cos()];
            track.push(directions.len());
            directions.push(rotate_about_z(v, node));
        }
        tracks.push(track);
    }

    // short polar arcs: colatitude sweeps over one pole, |lat| >= 30°
    for k in 0..config.n_tracks_polar {
        let node: f64 = rng.gen::<f64>() * 2.0 * PI;
        let jitter: f64 = rng.gen::<f64>();
        let south = k % 2 == 1;
        let span = PI / 3.0; // 60° of colatitude through the pole on each side
        let mut track = Vec::with_capacity(m);
        for i in 0..m {
            let s = (i as f64 + jitter) / m as f64; // in (0, 1)
            let t = span * (2.0 * s - 1.0); // -60°..60° through the pole
            let v = [t.sin(), 0.0, t.cos()];
            let v = if south { [v[0], v[1], -v[2]] } else { v };
            track.push(directions.len());
            directions.push(rotate_about_z(v, node));
        }
        tracks.push(track);
    }

    let grid = PointGrid {
        directions,
        radius,
        kind: GridKind::Scattered,
    };
    let set = TrackSet { tracks };
    set.validate(grid.len())?;
    Ok((grid, set))
}

/// Grid export rows "x,y,z,track_id"; points outside any track get id -1.
pub fn grid_to_csv(grid: &PointGrid, tracks: Option<&TrackSet>) -> String {
    let mut id = vec![-1i64; grid.len()];
    if let Some(ts) = tracks {
        for (t, track) in ts.tracks.iter().enumerate() {
            for &i in track {
                id[i] = t as i64;
            }
        }
    }
    let mut out = String::from("x,y,z,track_id\n");
    for (i, d) in grid.directions.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", d[0], d[1], d[2], id[i]));
    }
    out
}

/// Geographic latitude (rad) of a unit direction.
pub fn latitude(dir: &[f64; 3]) -> f64 {
    dir[2].clamp(-1.0, 1.0).asin()
}

/// Longitude (rad) in (-π, π].
pub fn longitude(dir: &[f64; 3]) -> f64 {
    dir[1].atan2(dir[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reuter_control_2_is_poles_plus_equator() {
        let g = reuter_grid(2, 1.1).unwrap();
        // 2 poles + one equator ring
        assert_eq!(g.directions[0], [0.0, 0.0, 1.0]);
        assert_eq!(g.directions[1], [0.0, 0.0, -1.0]);
        assert!(g.len() > 2);
        for d in &g.directions[2..] {
            assert!(d[2].abs() < 1e-12, "ring point off the equator");
        }
    }

    #[test]
    fn reuter_control_below_2_rejected() {
        assert!(reuter_grid(1, 1.1).is_err());
    }

    #[test]
    fn reuter_count_near_reference_grid() {
        let control = reuter_control_for_count(8400, 8600).unwrap();
        let count = reuter_count(control).unwrap();
        assert!((8400..=8600).contains(&count), "count {count}");
    }

    #[test]
    fn reuter_points_are_unit() {
        let g = reuter_grid(20, 1.05).unwrap();
        for d in &g.directions {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reuter_spacing_ratio_bounded() {
        // nearest-neighbor spacing max/min ratio <= 2 at ~2000 points
        let control = reuter_control_for_count(1900, 2100).unwrap();
        let g = reuter_grid(control, 1.05).unwrap();
        let mut nn = Vec::with_capacity(g.len());
        for (i, a) in g.directions.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (j, b) in g.directions.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
                best = best.min(d2);
            }
            nn.push(best.sqrt());
        }
        let max = nn.iter().cloned().fold(f64::MIN, f64::max);
        let min = nn.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 2.0, "spacing ratio {}", max / min);
    }

    #[test]
    fn scattered_default_totals_8500() {
        let (g, ts) = scattered_track_grid(&ScatteredConfig::default_full(), 1.08).unwrap();
        assert_eq!(g.len(), 8500);
        assert_eq!(ts.total_points(), 8500);
        ts.validate(g.len()).unwrap();
    }

    #[test]
    fn scattered_polar_density_dominates() {
        let (g, _) = scattered_track_grid(&ScatteredConfig::default_full(), 1.08).unwrap();
        let cap_lat = (60f64).to_radians();
        let belt_lat = (30f64).to_radians();
        let mut cap = 0usize;
        let mut belt = 0usize;
        for d in &g.directions {
            let lat = latitude(d);
            if lat.abs() > cap_lat {
                cap += 1;
            } else if lat.abs() < belt_lat {
                belt += 1;
            }
        }
        // solid angles: caps 4π(1 - cos 30°), belt 4π sin 30°
        let omega_cap = 4.0 * PI * (1.0 - (30f64).to_radians().cos());
        let omega_belt = 4.0 * PI * (30f64).to_radians().sin();
        let cap_density = cap as f64 / omega_cap;
        let belt_density = belt as f64 / omega_belt;
        assert!(
            cap_density >= 2.0 * belt_density,
            "cap {cap_density:.1}/sr vs belt {belt_density:.1}/sr"
        );
    }

    #[test]
    fn scattered_single_track() {
        let cfg = ScatteredConfig {
            n_tracks_polar: 0,
            n_tracks_equatorial: 1,
            pts_per_track: 10,
            seed: 4,
        };
        let (g, ts) = scattered_track_grid(&cfg, 1.08).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(ts.tracks.len(), 1);
        assert_eq!(ts.tracks[0], (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn scattered_zero_tracks_rejected() {
        let cfg = ScatteredConfig {
            n_tracks_polar: 0,
            n_tracks_equatorial: 0,
            pts_per_track: 10,
            seed: 0,
        };
        assert!(scattered_track_grid(&cfg, 1.08).is_err());
    }

    #[test]
    fn scattered_deterministic_per_seed() {
        let cfg = ScatteredConfig::default_full();
        let (a, ta) = scattered_track_grid(&cfg, 1.08).unwrap();
        let (b, tb) = scattered_track_grid(&cfg, 1.08).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn track_partition_validation() {
        let ts = TrackSet {
            tracks: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(ts.validate(3).is_err());
        let ts = TrackSet {
            tracks: vec![vec![0, 2], vec![1]],
        };
        assert!(ts.validate(3).is_ok());
    }
}

//! Independent numerical-quadrature oracle for the spherical-harmonic basis:
//! Gauss–Legendre nodes in the polar direction crossed with a uniform
//! longitude rule. Both rules are exact for the band-limited integrands
//! tested here, so any disagreement beyond round-off is a basis bug.

use gravmp::sphere::{eval_all, eval_sh, l2_inner, coeff_len, HarmonicIndex, HarmonicModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] via Newton iteration on the
/// three-term recurrence. Exact for polynomials of degree ≤ 2n − 1.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess for the i-th root (descending order)
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // recompute derivative at the converged node for the weight
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Quadrature points (unit vectors) and weights summing to 4π, exact for
/// integrands that are polynomials of degree ≤ 2·n_theta − 1 in cos θ times
/// trigonometric polynomials of order < n_phi in φ.
fn sphere_rule(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let (nodes, weights) = gauss_legendre(n_theta);
    let mut rule = Vec::with_capacity(n_theta * n_phi);
    for (t, wt) in nodes.iter().zip(&weights) {
        let st = (1.0 - t * t).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            let dir = [st * phi.cos(), st * phi.sin(), *t];
            rule.push((dir, wt * 2.0 * PI / n_phi as f64));
        }
    }
    rule
}

#[test]
fn gauss_legendre_weights_integrate_monomials() {
    let (nodes, weights) = gauss_legendre(8);
    assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    for p in [2usize, 4, 8, 14] {
        let num: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(p as i32))
            .sum();
        let exact = 2.0 / (p as f64 + 1.0);
        assert!((num - exact).abs() < 1e-13, "x^{p}: {num} vs {exact}");
    }
}

#[test]
fn basis_is_orthonormal_under_independent_quadrature() {
    let n_max = 6;
    let m = coeff_len(n_max);
    // products of degree-6 harmonics: degree ≤ 12 in cos θ, order ≤ 12 in φ
    let rule = sphere_rule(16, 32);
    let mut gram = vec![vec![0.0; m]; m];
    for (dir, w) in &rule {
        let y = eval_all(n_max, dir).unwrap();
        for a in 0..m {
            for b in a..m {
                gram[a][b] += w * y[a] * y[b];
            }
        }
    }
    for a in 0..m {
        for b in a..m {
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!(
                (gram[a][b] - expect).abs() < 1e-8,
                "⟨Y_{a}, Y_{b}⟩ = {}",
                gram[a][b]
            );
        }
    }
}

#[test]
fn single_harmonic_integrates_to_one() {
    let idx = HarmonicIndex::new(2, 1).unwrap();
    let rule = sphere_rule(8, 16);
    let integral: f64 = rule
        .iter()
        .map(|(dir, w)| {
            let v = eval_sh(idx, dir).unwrap();
            w * v * v
        })
        .sum();
    assert!((integral - 1.0).abs() < 1e-10, "∫Y_{{2,1}}² = {integral}");
}

#[test]
fn addition_theorem_holds_at_random_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).sqrt();
        let dir = [s * phi.cos(), s * phi.sin(), z];
        let y = eval_all(10, &dir).unwrap();
        for n in 0..=10usize {
            let sum: f64 = (0..(2 * n + 1)).map(|k| y[n * n + k] * y[n * n + k]).sum();
            let expect = (2.0 * n as f64 + 1.0) / (4.0 * PI);
            assert!((sum - expect).abs() < 1e-11, "degree {n}: {sum} vs {expect}");
        }
    }
}

#[test]
fn parseval_matches_quadrature_of_products() {
    let n_max = 5;
    let m = coeff_len(n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let ca: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cb: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let a = HarmonicModel::from_coeffs(n_max, ca).unwrap();
    let b = HarmonicModel::from_coeffs(n_max, cb).unwrap();
    let rule = sphere_rule(12, 24);
    let integral: f64 = rule
        .iter()
        .map(|(dir, w)| w * a.eval(dir).unwrap() * b.eval(dir).unwrap())
        .sum();
    let coeff = l2_inner(&a, &b).unwrap();
    assert!(
        (integral - coeff).abs() < 1e-10 * coeff.abs().max(1.0),
        "{integral} vs {coeff}"
    );
}

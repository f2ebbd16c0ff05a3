//! Geometric regularization-parameter grid.

use crate::error::{Error, Result};

/// Strictly decreasing grid λ_k, 1-based: `values[0]` is λ_1.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
}

impl LambdaGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// λ_k for 1-based k.
    pub fn lambda(&self, k: usize) -> f64 {
        self.values[k - 1]
    }
}

/// The reference grid λ_k = λ_0·q^k for k = 1..100 with λ_0 = 1.3849 and
/// q = 0.7221, running from λ_1 ≈ 1 down to λ_100 ≈ 1e-14.
pub fn lambda_grid() -> LambdaGrid {
    const LAMBDA_0: f64 = 1.3849;
    const Q: f64 = 0.7221;
    let values = (1..=100).map(|k| LAMBDA_0 * Q.powi(k)).collect();
    LambdaGrid { values }
}

/// A shorter grid with the same geometric structure and the same endpoints
/// λ_1 = 1, λ_count = 1e-14.
pub fn lambda_grid_short(count: usize) -> Result<LambdaGrid> {
    if count < 2 {
        return Err(Error::input("lambda grid needs at least 2 values"));
    }
    let q = 1e-14f64.powf(1.0 / (count as f64 - 1.0));
    let values = (0..count).map(|i| q.powi(i as i32)).collect();
    Ok(LambdaGrid { values })
}

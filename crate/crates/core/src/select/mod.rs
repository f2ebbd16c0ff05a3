//! Regularization-parameter selection: λ-grid, dense Tikhonov oracle,
//! spectral surrogates, the maximal index K̂, and the choice methods.

pub mod lambda;
pub mod methods;
pub mod path;
pub mod surrogate;
pub mod tikhonov;

pub use lambda::{lambda_grid, lambda_grid_short, LambdaGrid};
pub use methods::{
    choose, tdp_b, tdp_gamma, ChoiceContext, CriterionPoint, Method, SelectionReport,
    SkippedPoint, DP_TAU, MGCV_C, RGCV_GAMMA, SRGCV_GAMMA,
};
pub use path::{build_path, PathEntry, PathSolver, RegularizationPath};
pub use surrogate::{
    max_index_colored, max_index_white, rho2, rho_inf_sq, surrogate_traces, SpectralSurrogate,
    SurrogateTraces,
};
pub use tikhonov::{direct_tikhonov, TikhonovFactor};

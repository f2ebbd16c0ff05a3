//! Benchmark harness: scenario matrix, realization loop, boxplot statistics,
//! and artifact export.

pub mod export;
pub mod scenario;
pub mod stats;

pub use export::{
    error_vs_k_csv, export_scenario, inefficiency_csv, map_csv, read_manifest, stats_csv, Manifest,
};
pub use scenario::{
    desk_scenarios, run_scenario, scenario_grid, scenario_matrix, MethodOutcome,
    RealizationFailure, RealizationResult, ScalePreset, Scenario, ScenarioRun, TruthSource,
    DESK_SCALE, FULL_SCALE,
};
pub use stats::{aggregate, boxplot_stats, BoxplotStats};

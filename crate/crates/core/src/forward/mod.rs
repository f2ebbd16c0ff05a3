//! Grids, the discretized upward-continuation operator, and ground-truth
//! model ingestion/synthesis.

pub mod grid;
pub mod model_io;
pub mod operator;

pub use grid::{
    grid_to_csv, reuter_control_for_count, reuter_count, reuter_grid, scattered_track_grid,
    GridKind, PointGrid, ScatteredConfig, TrackSet,
};
pub use model_io::{
    export_coefficients, ingest_coefficients, parse_coefficients, synth_truth, write_coefficients,
    IngestResult,
};
pub use operator::{
    apply_forward, build_design_matrix, radius_for_height_km, singular_values, DesignMatrix,
};

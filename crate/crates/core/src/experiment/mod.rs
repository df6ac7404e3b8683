//! Experiment orchestration: configuration, noise sweeps, modulation scans
//! and plots.

mod config;
mod plot;
mod sweep;

pub use config::{
    log_grid, ExperimentConfig, GateName, ModulationSpec, NoiseSweep, OutputPaths, RecipeSource, StateSpec,
    TuningSpec, UnprotectedDrive, FIGURE_GRID, PRESETS, SCHEMA_VERSION,
};
pub use plot::{emit_plot, PlotSpec};
pub use sweep::{
    build_recipes, modulate_recipes, read_csv, run_modulation, run_sweep, sweep_recipes, to_csv_string, with_modulation,
    write_csv, ModulationRow, SweepRow,
};

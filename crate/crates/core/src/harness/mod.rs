//! Configuration-driven experiments: load a TOML config, sweep one
//! parameter, compare each Monte-Carlo point against its closed form, and
//! write plot-ready files.

pub mod config;
pub mod fit;
pub mod output;
pub mod sweep;

pub use config::{load_config, parse_config, ExperimentConfig, PulsedMethod, SweepSpec, SweepVariable};
pub use fit::{fit_fringe, fit_fringe_free_period, FringeFit};
pub use output::{emit_outputs, read_data_file, strip_timestamp, DataFile, OutputPaths};
pub use sweep::{
    point_settings, run_sweep, scenario_setup, stationary_analytic, ComparisonReport, SinglesRow, Summary, SweepRow,
    MAX_Z, POINT_Z,
};

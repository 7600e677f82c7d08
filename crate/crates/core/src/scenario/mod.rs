//! Declarative scenarios: configuration, presets, execution and output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{InitialState, ScenarioConfig, Solver, System, SystemKind, Term, TimeGrid, Toggles, SCHEMA_VERSION};
pub use presets::{list_presets, preset_value, scaling_preset, scenario_preset_names, PresetInfo, ScalingConfig, SCALING_STUDY};
pub use run::{execute, initial_stats, run_scenario, write_outputs, BoundTable, Method, MomentumSeries, RunReport, ScenarioResult, StatsMhz};
pub use sweep::{run_scaling, sweep, write_scaling_csv, write_sweep_csv, SweepRow};

use crate::error::Result;

/// Parse a configuration document, expanding `"preset"` references.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    config::parse_config_with(text, preset_value)
}

pub fn preset_config(name: &str) -> Result<ScenarioConfig> {
    config::from_value(preset_value(name)?)
}

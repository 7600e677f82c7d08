use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::output::{format_f64, write_csv};
use super::presets::ScalingConfig;
use super::run::initial_stats;
use crate::bounds::orthogonalization_times;
use crate::error::{QslError, Result};
use crate::freefermion::{scaling_study, ScalingRecord};
use crate::par::{self, Execution};
use crate::spectral::{classify_regime, phase_point};
use crate::units::angular_to_mhz;

/// One row of a phase-diagram sweep. Times in ns, energies in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub regime: String,
    pub t_mt_ns: f64,
    pub t_ml_ns: f64,
    pub t_mlstar_ns: f64,
    pub delta_e_mhz: f64,
    pub e_minus_emin_mhz: f64,
    pub emax_minus_e_mhz: f64,
}

/// Energy statistics, regime and orthogonalization times of the initial
/// state for each value of `parameter` ("omega" or "W", in MHz).
pub fn sweep(cfg: &ScenarioConfig, parameter: &str, values: &[f64], exec: Execution) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(QslError::EmptyInput("sweep values"));
    }
    let configs = values
        .iter()
        .map(|&v| cfg.with_parameter(parameter, v))
        .collect::<Result<Vec<_>>>()?;
    par::map(exec, &configs, |c| {
        let stats = initial_stats(c)?;
        let (x, y) = phase_point(&stats)?;
        let times = orthogonalization_times(&stats);
        Ok(SweepRow {
            parameter: parameter.to_string(),
            value: 0.0,
            x,
            y,
            regime: classify_regime(&stats)?.label.as_str().to_string(),
            t_mt_ns: times.t_mt,
            t_ml_ns: times.t_ml,
            t_mlstar_ns: times.t_mlstar,
            delta_e_mhz: angular_to_mhz(stats.delta_e),
            e_minus_emin_mhz: angular_to_mhz(stats.gap_below()),
            emax_minus_e_mhz: angular_to_mhz(stats.gap_above()),
        })
    })
    .into_iter()
    .zip(values)
    .map(|(row, &v)| row.map(|r| SweepRow { value: v, ..r }))
    .collect::<Result<Vec<_>>>()
    .map_err(|e| e.in_scenario(&cfg.name))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let header: Vec<String> = [
        "parameter",
        "value_mhz",
        "x",
        "y",
        "regime",
        "t_mt_ns",
        "t_ml_ns",
        "t_mlstar_ns",
        "delta_e_mhz",
        "e_minus_emin_mhz",
        "emax_minus_e_mhz",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body = rows.iter().map(|r| {
        vec![
            r.parameter.clone(),
            format_f64(r.value),
            format_f64(r.x),
            format_f64(r.y),
            r.regime.clone(),
            format_f64(r.t_mt_ns),
            format_f64(r.t_ml_ns),
            format_f64(r.t_mlstar_ns),
            format_f64(r.delta_e_mhz),
            format_f64(r.e_minus_emin_mhz),
            format_f64(r.emax_minus_e_mhz),
        ]
    });
    write_csv(path, &header, body)
}

pub fn run_scaling(cfg: &ScalingConfig, exec: Execution) -> Result<Vec<ScalingRecord>> {
    scaling_study(&cfg.geometries, cfg.j1_mhz, cfg.j2_mhz, (cfg.w_lo_mhz, cfg.w_hi_mhz), exec)
}

pub fn write_scaling_csv(path: &Path, records: &[ScalingRecord]) -> Result<()> {
    let header: Vec<String> = [
        "geometry",
        "nx",
        "ny",
        "delta_e_analytic_mhz",
        "delta_e_numeric_mhz",
        "w_star_mhz",
        "phase_x",
        "phase_y",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let body = records.iter().map(|r| {
        let (nx, ny) = r.geometry.dims();
        vec![
            r.geometry.name().to_string(),
            nx.to_string(),
            ny.to_string(),
            format_f64(r.delta_e_analytic_mhz),
            format_f64(r.delta_e_numeric_mhz),
            format_f64(r.w_star_mhz),
            format_f64(r.phase_x),
            format_f64(r.phase_y),
        ]
    });
    write_csv(path, &header, body)
}

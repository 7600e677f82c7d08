//! Named figure scenarios and the size-scaling study.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{QslError, Result};
use crate::freefermion::Geometry;

pub const SCALING_STUDY: &str = "scaling_study";

const SUPPFIG_CHAIN_LENGTHS: [usize; 5] = [6, 12, 24, 48, 96];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetInfo {
    pub name: String,
    pub description: String,
}

/// Geometries and couplings of the scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub geometries: Vec<Geometry>,
    pub j1_mhz: f64,
    pub j2_mhz: f64,
    pub w_lo_mhz: f64,
    pub w_hi_mhz: f64,
}

pub fn scaling_preset() -> ScalingConfig {
    let mut geometries: Vec<Geometry> = [6, 8, 10, 12, 16, 24, 48, 96]
        .into_iter()
        .map(|length| Geometry::Chain { length })
        .collect();
    geometries.push(Geometry::Grid { nx: 3, ny: 3 });
    geometries.push(Geometry::Grid { nx: 4, ny: 4 });
    ScalingConfig {
        geometries,
        j1_mhz: -2.0,
        j2_mhz: 0.597,
        w_lo_mhz: 0.0,
        w_hi_mhz: 40.0,
    }
}

fn qubit(name: &str, omega: f64) -> Value {
    json!({
        "name": name, "system": "qubit", "omega_mhz": omega, "delta_mhz": 12.5,
        "initial_state": {"kind": "amplitudes", "re": [1.0, 1.0]},
    })
}

fn qutrit(name: &str, omega: f64) -> Value {
    let c = 3.0 / std::f64::consts::SQRT_2;
    json!({
        "name": name, "system": "qutrit", "omega_mhz": omega, "eta_mhz": -212.0,
        "initial_state": {"kind": "amplitudes", "re": [1.0, c, c]},
    })
}

fn chain(name: &str, w: f64) -> Value {
    json!({
        "name": name, "system": "chain1d", "length": 6, "j1_mhz": -2.0, "w_mhz": w,
        "initial_state": {"kind": "superposition", "terms": [
            {"re": 0.5, "state": "101010"},
            {"re": 3f64.sqrt() / 2.0, "state": "010101"},
        ]},
    })
}

fn lattice(name: &str, w: f64) -> Value {
    json!({
        "name": name, "system": "lattice2d", "nx": 3, "ny": 3, "j1_mhz": -2.0, "j2_mhz": 0.597,
        "w_mhz": w,
        "initial_state": {"kind": "fock", "state": "101010101"},
        "toggles": {"hamming": true},
    })
}

fn suppfig_chain(length: usize) -> Value {
    let name = format!("suppfig_chain_L{length}");
    // The hardcore-boson density matrix costs O(L²N³) per time point.
    let stride = if length > 48 { 4 } else { 1 };
    json!({
        "name": name, "system": "freefermion_chain", "length": length, "j1_mhz": -2.0, "w_mhz": 0.0,
        "initial_state": {"kind": "density_wave"},
        "time": {"stop_ns": 100.0, "step_ns": 0.5},
        "toggles": {"momentum": true},
        "momentum_stride": stride,
    })
}

struct Entry {
    name: String,
    description: String,
    body: Option<Value>,
}

fn entries() -> Vec<Entry> {
    let mut out = Vec::new();
    let mut add = |name: &str, description: String, body: Option<Value>| {
        out.push(Entry {
            name: name.to_string(),
            description,
            body,
        })
    };
    for (suffix, omega) in [("d", -2.5), ("e", 0.0), ("f", 2.5)] {
        let name = format!("fig1{suffix}");
        add(
            &name,
            format!("driven qubit, Ω/2π = {omega} MHz, Δ/2π = 12.5 MHz, |+⟩"),
            Some(qubit(&name, omega)),
        );
    }
    for (suffix, omega) in [("d", -15.0), ("e", -5.0), ("f", 8.5)] {
        let name = format!("fig2{suffix}");
        add(
            &name,
            format!("driven qutrit, Ω/2π = {omega} MHz, η/2π = −212 MHz, (|0⟩ + 3(|1⟩+|2⟩)/√2)/√10"),
            Some(qutrit(&name, omega)),
        );
    }
    for (suffix, w) in [("d", 0.0), ("e", 1.8), ("f", 8.0)] {
        let name = format!("fig3{suffix}");
        add(
            &name,
            format!("6-site chain, J1/2π = −2 MHz, W/2π = {w} MHz, (|101010⟩ + √3|010101⟩)/2"),
            Some(chain(&name, w)),
        );
    }
    for (suffix, w) in [("d", 0.0), ("e", 3.4), ("f", 6.5)] {
        let name = format!("fig4{suffix}");
        add(
            &name,
            format!("3×3 lattice, J1/2π = −2 MHz, J2/2π = 0.597 MHz, W/2π = {w} MHz, checkerboard, Hamming distribution"),
            Some(lattice(&name, w)),
        );
    }
    for length in SUPPFIG_CHAIN_LENGTHS {
        let name = format!("suppfig_chain_L{length}");
        add(
            &name,
            format!("free-fermion chain, L = {length}, W = 0, density wave, overlap and momentum distribution"),
            Some(suppfig_chain(length)),
        );
    }
    add(
        SCALING_STUDY,
        "ΔE and crossover W* for chains L = 6..96 and 3×3, 4×4 lattices".to_string(),
        None,
    );
    out
}

pub fn list_presets() -> Vec<PresetInfo> {
    entries()
        .into_iter()
        .map(|e| PresetInfo {
            name: e.name,
            description: e.description,
        })
        .collect()
}

/// Names of the presets that describe a single scenario.
pub fn scenario_preset_names() -> Vec<String> {
    entries().into_iter().filter(|e| e.body.is_some()).map(|e| e.name).collect()
}

/// The configuration document of a scenario preset.
pub fn preset_value(name: &str) -> Result<Value> {
    let entry = entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| QslError::UnknownPreset(name.to_string()))?;
    entry.body.ok_or_else(|| {
        QslError::config("preset", format!("{name:?} is not a single-scenario preset"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::System;
    use crate::scenario::{parse_config, preset_config};

    #[test]
    fn required_names_unique() {
        let names: Vec<String> = list_presets().into_iter().map(|p| p.name).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for fig in 1..=4 {
            for s in ["d", "e", "f"] {
                assert!(names.contains(&format!("fig{fig}{s}")));
            }
        }
        for l in [6, 12, 24, 48, 96] {
            assert!(names.contains(&format!("suppfig_chain_L{l}")));
        }
        assert!(names.contains(&SCALING_STUDY.to_string()));
    }

    #[test]
    fn every_scenario_preset_parses_and_round_trips() {
        for name in scenario_preset_names() {
            let cfg = preset_config(&name).unwrap();
            assert_eq!(cfg.name, name);
            assert_eq!(parse_config(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn preset_contents() {
        let fig2e = preset_config("fig2e").unwrap();
        assert_eq!(fig2e.system, System::Qutrit { omega_mhz: -5.0, eta_mhz: -212.0 });
        let fig4e = preset_config("fig4e").unwrap();
        assert!(matches!(
            fig4e.system,
            System::Lattice2d { nx: 3, ny: 3, num_excitations: 5, w_mhz, j2_mhz, .. } if w_mhz == 3.4 && j2_mhz == 0.597
        ));
        assert!(fig4e.toggles.hamming);
        let fig3e = parse_config(r#"{"preset":"fig3e"}"#).unwrap();
        assert!(matches!(
            fig3e.system,
            System::Chain1d { length: 6, j1_mhz, w_mhz, .. } if j1_mhz == -2.0 && w_mhz == 1.8
        ));
        assert!(matches!(fig3e.initial_state, crate::scenario::InitialState::Superposition { ref terms } if terms.len() == 2));
        assert!(matches!(parse_config(r#"{"preset":"nope"}"#), Err(QslError::UnknownPreset(_))));
        assert!(parse_config(r#"{"preset":"scaling_study"}"#).is_err());
    }
}

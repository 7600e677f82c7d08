//! Scenario configuration: a flat, versioned JSON document.
//!
//! ```json
//! {"schema_version": 1, "system": "qubit", "omega_mhz": 0, "delta_mhz": 12.5}
//! ```
//!
//! A `"preset"` key expands a named preset; any other keys in the same
//! document override the preset's values.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::bounds::default_alpha_grid;
use crate::dynamics::DEFAULT_ORTHOGONALIZATION_EPS;
use crate::error::{QslError, Result};
use crate::hamiltonians::Stagger;
use crate::hilbert::FockState;

pub const SCHEMA_VERSION: u32 = 1;

/// Upper limit on the number of time points in a grid.
pub const MAX_TIME_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Qubit,
    Qutrit,
    Chain1d,
    Lattice2d,
    FreefermionChain,
}

/// Time grid t_k = start + k·step for t_k ≤ stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start_ns: f64,
    pub stop_ns: f64,
    pub step_ns: f64,
}

impl TimeGrid {
    pub fn new(start_ns: f64, stop_ns: f64, step_ns: f64) -> Self {
        TimeGrid { start_ns, stop_ns, step_ns }
    }

    fn validate(&self, path: &str) -> Result<()> {
        for (field, value) in [("start_ns", self.start_ns), ("stop_ns", self.stop_ns), ("step_ns", self.step_ns)] {
            if !value.is_finite() {
                return Err(QslError::config(format!("{path}.{field}"), "must be finite"));
            }
        }
        if self.start_ns < 0.0 {
            return Err(QslError::config(format!("{path}.start_ns"), "must be nonnegative"));
        }
        if self.step_ns <= 0.0 {
            return Err(QslError::config(format!("{path}.step_ns"), "must be positive"));
        }
        if self.stop_ns < self.start_ns {
            return Err(QslError::config(format!("{path}.stop_ns"), "must not precede start_ns"));
        }
        if (self.stop_ns - self.start_ns) / self.step_ns >= MAX_TIME_POINTS as f64 {
            return Err(QslError::config(
                format!("{path}.step_ns"),
                format!("grid exceeds {MAX_TIME_POINTS} points"),
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_ns - self.start_ns) / self.step_ns + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start_ns + k as f64 * self.step_ns).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub state: FockState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Amplitudes over the basis in its natural order (normalized on use).
    Amplitudes {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
    Fock { state: FockState },
    Superposition { terms: Vec<Term> },
    /// Row-major |1010…⟩.
    DensityWave,
}

impl InitialState {
    fn num_excitations(&self) -> Option<usize> {
        match self {
            InitialState::Fock { state } => Some(state.num_excitations()),
            InitialState::Superposition { terms } => terms.first().map(|t| t.state.num_excitations()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Qubit {
        omega_mhz: f64,
        delta_mhz: f64,
    },
    Qutrit {
        omega_mhz: f64,
        eta_mhz: f64,
    },
    Chain1d {
        length: usize,
        num_excitations: usize,
        j1_mhz: f64,
        w_mhz: f64,
        stagger: Stagger,
    },
    Lattice2d {
        nx: usize,
        ny: usize,
        num_excitations: usize,
        j1_mhz: f64,
        j2_mhz: f64,
        w_mhz: f64,
        stagger: Stagger,
    },
    FreefermionChain {
        length: usize,
        j1_mhz: f64,
        w_mhz: f64,
        stagger: Stagger,
    },
}

impl System {
    pub fn kind(&self) -> SystemKind {
        match self {
            System::Qubit { .. } => SystemKind::Qubit,
            System::Qutrit { .. } => SystemKind::Qutrit,
            System::Chain1d { .. } => SystemKind::Chain1d,
            System::Lattice2d { .. } => SystemKind::Lattice2d,
            System::FreefermionChain { .. } => SystemKind::FreefermionChain,
        }
    }

    pub fn num_sites(&self) -> usize {
        match *self {
            System::Qubit { .. } | System::Qutrit { .. } => 1,
            System::Chain1d { length, .. } | System::FreefermionChain { length, .. } => length,
            System::Lattice2d { nx, ny, .. } => nx * ny,
        }
    }
}

/// Output toggles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Toggles {
    pub bounds: bool,
    pub hamming: bool,
    pub momentum: bool,
    pub phase_diagram: bool,
    /// Per-α generalized bound columns in the overlap CSV.
    pub per_alpha_columns: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            bounds: true,
            hamming: false,
            momentum: false,
            phase_diagram: true,
            per_alpha_columns: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: System,
    pub initial_state: InitialState,
    pub time: TimeGrid,
    pub alphas: Vec<f64>,
    pub toggles: Toggles,
    pub orthogonalization_eps: f64,
    pub sandwich_tol: f64,
    /// The momentum distribution is evaluated at every n-th time point.
    pub momentum_stride: usize,
    pub solver: Solver,
    pub output_dir: Option<String>,
}

/// Eigensolver choice for many-body systems. `Auto` diagonalizes densely
/// up to [`crate::spectral::DENSE_DIMENSION_LIMIT`] and uses Lanczos above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Auto,
    Dense,
    Krylov,
}

/// The on-disk form. Every field is optional here; [`parse_config`] fills
/// defaults and checks which fields the chosen system needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<SystemKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ny: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_excitations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j1_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j2_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w_mhz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stagger: Option<Stagger>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_state: Option<InitialState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<TimeGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    toggles: Option<Toggles>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orthogonalization_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sandwich_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    momentum_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<Solver>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<String>,
}

fn required<T>(value: Option<T>, field: &str, system: &str) -> Result<T> {
    value.ok_or_else(|| QslError::config(field, format!("required for system \"{system}\"")))
}

fn finite(value: f64, field: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(QslError::config(field, "must be finite"))
    }
}

fn reject(present: bool, field: &str, system: &str) -> Result<()> {
    if present {
        Err(QslError::config(field, format!("not used by system \"{system}\"")))
    } else {
        Ok(())
    }
}

fn default_time(kind: SystemKind) -> TimeGrid {
    match kind {
        SystemKind::Qutrit => TimeGrid::new(0.0, 10.0, 0.02),
        SystemKind::Lattice2d => TimeGrid::new(0.0, 300.0, 0.5),
        _ => TimeGrid::new(0.0, 250.0, 0.5),
    }
}

/// Parse a configuration document. Preset references are expanded through
/// `expand_preset`, which returns the preset's own document.
pub fn parse_config_with(text: &str, expand_preset: impl Fn(&str) -> Result<Value>) -> Result<ScenarioConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| QslError::config("$", e.to_string()))?;
    let value = match value.get("preset").and_then(Value::as_str) {
        Some(name) => {
            let mut base = expand_preset(name)?;
            let overrides = value.as_object().cloned().unwrap_or_default();
            merge(&mut base, overrides);
            base
        }
        None => value,
    };
    from_value(value)
}

fn merge(base: &mut Value, overrides: Map<String, Value>) {
    let Some(obj) = base.as_object_mut() else {
        *base = Value::Object(overrides);
        return;
    };
    for (key, value) in overrides {
        if key == "preset" {
            continue;
        }
        match (obj.get_mut(&key), value) {
            (Some(existing @ Value::Object(_)), Value::Object(inner)) if key != "initial_state" => merge(existing, inner),
            (_, value) => {
                obj.insert(key, value);
            }
        }
    }
}

pub(crate) fn from_value(value: Value) -> Result<ScenarioConfig> {
    let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        QslError::config(if path.is_empty() { "$".into() } else { path }, e.into_inner().to_string())
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ScenarioConfig> {
    match raw.schema_version {
        None | Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(QslError::config(
                "schema_version",
                format!("unsupported version {v}, expected {SCHEMA_VERSION}"),
            ))
        }
    }
    let kind = raw.system.ok_or_else(|| QslError::config("system", "missing field"))?;
    let label = serde_json::to_value(kind).unwrap().as_str().unwrap().to_string();
    let s = label.as_str();
    let initial_state = raw.initial_state.clone();
    let excitations_hint = raw
        .num_excitations
        .or_else(|| initial_state.as_ref().and_then(InitialState::num_excitations));

    let system = match kind {
        SystemKind::Qubit | SystemKind::Qutrit => {
            for (present, field) in [
                (raw.length.is_some(), "length"),
                (raw.nx.is_some(), "nx"),
                (raw.ny.is_some(), "ny"),
                (raw.num_excitations.is_some(), "num_excitations"),
                (raw.j1_mhz.is_some(), "j1_mhz"),
                (raw.j2_mhz.is_some(), "j2_mhz"),
                (raw.w_mhz.is_some(), "w_mhz"),
                (raw.stagger.is_some(), "stagger"),
            ] {
                reject(present, field, s)?;
            }
            let omega_mhz = finite(required(raw.omega_mhz, "omega_mhz", s)?, "omega_mhz")?;
            if kind == SystemKind::Qubit {
                reject(raw.eta_mhz.is_some(), "eta_mhz", s)?;
                System::Qubit {
                    omega_mhz,
                    delta_mhz: finite(required(raw.delta_mhz, "delta_mhz", s)?, "delta_mhz")?,
                }
            } else {
                reject(raw.delta_mhz.is_some(), "delta_mhz", s)?;
                System::Qutrit {
                    omega_mhz,
                    eta_mhz: finite(required(raw.eta_mhz, "eta_mhz", s)?, "eta_mhz")?,
                }
            }
        }
        SystemKind::Chain1d | SystemKind::FreefermionChain | SystemKind::Lattice2d => {
            for (present, field) in [
                (raw.omega_mhz.is_some(), "omega_mhz"),
                (raw.delta_mhz.is_some(), "delta_mhz"),
                (raw.eta_mhz.is_some(), "eta_mhz"),
            ] {
                reject(present, field, s)?;
            }
            let j1_mhz = finite(required(raw.j1_mhz, "j1_mhz", s)?, "j1_mhz")?;
            let w_mhz = finite(raw.w_mhz.unwrap_or(0.0), "w_mhz")?;
            let stagger = raw.stagger.unwrap_or_default();
            match kind {
                SystemKind::Lattice2d => {
                    reject(raw.length.is_some(), "length", s)?;
                    let nx = required(raw.nx, "nx", s)?;
                    let ny = required(raw.ny, "ny", s)?;
                    System::Lattice2d {
                        nx,
                        ny,
                        num_excitations: excitations_hint.unwrap_or(nx * ny / 2),
                        j1_mhz,
                        j2_mhz: finite(raw.j2_mhz.unwrap_or(0.0), "j2_mhz")?,
                        w_mhz,
                        stagger,
                    }
                }
                _ => {
                    reject(raw.nx.is_some(), "nx", s)?;
                    reject(raw.ny.is_some(), "ny", s)?;
                    reject(raw.j2_mhz.is_some(), "j2_mhz", s)?;
                    let length = required(raw.length, "length", s)?;
                    if kind == SystemKind::Chain1d {
                        System::Chain1d {
                            length,
                            num_excitations: excitations_hint.unwrap_or(length / 2),
                            j1_mhz,
                            w_mhz,
                            stagger,
                        }
                    } else {
                        reject(raw.num_excitations.is_some(), "num_excitations", s)?;
                        System::FreefermionChain {
                            length,
                            j1_mhz,
                            w_mhz,
                            stagger,
                        }
                    }
                }
            }
        }
    };

    let initial_state = match initial_state {
        Some(state) => state,
        None => match kind {
            SystemKind::Qubit => InitialState::Amplitudes { re: vec![1.0, 1.0], im: None },
            SystemKind::Qutrit => InitialState::Amplitudes { re: vec![1.0, 0.0, 0.0], im: None },
            _ => InitialState::DensityWave,
        },
    };
    validate_state(&initial_state, &system)?;

    let time = raw.time.unwrap_or_else(|| default_time(kind));
    time.validate("time")?;

    let alphas = raw.alphas.unwrap_or_else(default_alpha_grid);
    if alphas.is_empty() {
        return Err(QslError::config("alphas", "must not be empty"));
    }
    for (i, a) in alphas.iter().enumerate() {
        if !(a.is_finite() && *a > 0.0) {
            return Err(QslError::config(format!("alphas[{i}]"), "must be positive and finite"));
        }
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QslError::config("alphas", "must be strictly ascending"));
    }

    let toggles = raw.toggles.unwrap_or_default();
    if toggles.momentum && kind != SystemKind::FreefermionChain {
        return Err(QslError::config("toggles.momentum", "available only for freefermion_chain"));
    }
    if toggles.hamming && matches!(kind, SystemKind::Qubit | SystemKind::Qutrit | SystemKind::FreefermionChain) {
        return Err(QslError::config("toggles.hamming", "available only for chain1d and lattice2d"));
    }

    let orthogonalization_eps = raw.orthogonalization_eps.unwrap_or(DEFAULT_ORTHOGONALIZATION_EPS);
    if !(orthogonalization_eps > 0.0 && orthogonalization_eps <= 0.1) {
        return Err(QslError::config("orthogonalization_eps", "must lie in (0, 0.1]"));
    }
    let sandwich_tol = raw.sandwich_tol.unwrap_or(1e-9);
    if !(sandwich_tol >= 0.0 && sandwich_tol.is_finite()) {
        return Err(QslError::config("sandwich_tol", "must be nonnegative and finite"));
    }
    let momentum_stride = raw.momentum_stride.unwrap_or(1);
    if momentum_stride == 0 {
        return Err(QslError::config("momentum_stride", "must be positive"));
    }
    let solver = raw.solver.unwrap_or_default();
    if solver != Solver::Auto && kind == SystemKind::FreefermionChain {
        return Err(QslError::config("solver", "freefermion_chain has its own solver"));
    }
    if solver == Solver::Krylov && toggles.hamming {
        return Err(QslError::config("toggles.hamming", "needs a dense eigendecomposition"));
    }
    let name = raw.name.or(raw.preset).unwrap_or_else(|| "scenario".to_string());
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(QslError::config("name", "use letters, digits, '_' or '-'"));
    }

    Ok(ScenarioConfig {
        name,
        system,
        initial_state,
        time,
        alphas,
        toggles,
        orthogonalization_eps,
        sandwich_tol,
        momentum_stride,
        solver,
        output_dir: raw.output_dir,
    })
}

fn validate_state(state: &InitialState, system: &System) -> Result<()> {
    let sites = system.num_sites();
    let check_fock = |s: &FockState, field: String| -> Result<()> {
        if s.num_sites() != sites {
            return Err(QslError::config(field, format!("expected {sites} sites, found {}", s.num_sites())));
        }
        let max_level = if matches!(system, System::Qutrit { .. }) { 2 } else { 1 };
        if s.occupations().iter().any(|&o| o > max_level) {
            return Err(QslError::config(field, "occupation exceeds the local dimension"));
        }
        Ok(())
    };
    match state {
        InitialState::Amplitudes { re, im } => {
            if let Some(im) = im {
                if im.len() != re.len() {
                    return Err(QslError::config("initial_state.im", "length must match initial_state.re"));
                }
            }
            if re.iter().chain(im.iter().flatten()).any(|x| !x.is_finite()) {
                return Err(QslError::config("initial_state", "amplitudes must be finite"));
            }
            if matches!(system, System::FreefermionChain { .. }) {
                return Err(QslError::config("initial_state.kind", "freefermion_chain needs a product state"));
            }
        }
        InitialState::Fock { state } => check_fock(state, "initial_state.state".into())?,
        InitialState::Superposition { terms } => {
            if terms.is_empty() {
                return Err(QslError::config("initial_state.terms", "must not be empty"));
            }
            for (i, t) in terms.iter().enumerate() {
                check_fock(&t.state, format!("initial_state.terms[{i}].state"))?;
                if !(t.re.is_finite() && t.im.is_finite()) {
                    return Err(QslError::config(format!("initial_state.terms[{i}]"), "must be finite"));
                }
            }
            if matches!(system, System::FreefermionChain { .. }) && terms.len() > 1 {
                return Err(QslError::config("initial_state.kind", "freefermion_chain needs a product state"));
            }
        }
        InitialState::DensityWave => {
            if matches!(system, System::Qubit { .. } | System::Qutrit { .. }) {
                return Err(QslError::config("initial_state.kind", "density_wave needs a lattice system"));
            }
        }
    }
    let n = match system {
        System::Chain1d { num_excitations, .. } | System::Lattice2d { num_excitations, .. } => Some(*num_excitations),
        _ => None,
    };
    if let (Some(n), Some(m)) = (n, state.num_excitations()) {
        if n != m {
            return Err(QslError::config("num_excitations", format!("initial state has {m} excitations")));
        }
    }
    if let (Some(n), InitialState::DensityWave) = (n, state) {
        let m = sites.div_ceil(2);
        if n != m {
            return Err(QslError::config("num_excitations", format!("density wave has {m} excitations")));
        }
    }
    Ok(())
}

impl ScenarioConfig {
    fn to_raw(&self) -> RawConfig {
        let mut raw = RawConfig {
            schema_version: Some(SCHEMA_VERSION),
            name: Some(self.name.clone()),
            system: Some(self.system.kind()),
            initial_state: Some(self.initial_state.clone()),
            time: Some(self.time),
            alphas: Some(self.alphas.clone()),
            toggles: Some(self.toggles),
            orthogonalization_eps: Some(self.orthogonalization_eps),
            sandwich_tol: Some(self.sandwich_tol),
            momentum_stride: Some(self.momentum_stride),
            solver: Some(self.solver),
            output_dir: self.output_dir.clone(),
            ..RawConfig::default()
        };
        match self.system {
            System::Qubit { omega_mhz, delta_mhz } => {
                raw.omega_mhz = Some(omega_mhz);
                raw.delta_mhz = Some(delta_mhz);
            }
            System::Qutrit { omega_mhz, eta_mhz } => {
                raw.omega_mhz = Some(omega_mhz);
                raw.eta_mhz = Some(eta_mhz);
            }
            System::Chain1d { length, num_excitations, j1_mhz, w_mhz, stagger } => {
                raw.length = Some(length);
                raw.num_excitations = Some(num_excitations);
                raw.j1_mhz = Some(j1_mhz);
                raw.w_mhz = Some(w_mhz);
                raw.stagger = Some(stagger);
            }
            System::Lattice2d { nx, ny, num_excitations, j1_mhz, j2_mhz, w_mhz, stagger } => {
                raw.nx = Some(nx);
                raw.ny = Some(ny);
                raw.num_excitations = Some(num_excitations);
                raw.j1_mhz = Some(j1_mhz);
                raw.j2_mhz = Some(j2_mhz);
                raw.w_mhz = Some(w_mhz);
                raw.stagger = Some(stagger);
            }
            System::FreefermionChain { length, j1_mhz, w_mhz, stagger } => {
                raw.length = Some(length);
                raw.j1_mhz = Some(j1_mhz);
                raw.w_mhz = Some(w_mhz);
                raw.stagger = Some(stagger);
            }
        }
        raw
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self.to_raw()).expect("config serializes")
    }

    /// Pretty JSON that [`parse_config_with`] maps back to `self`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("config serializes")
    }

    /// Replace a physical parameter by name ("omega" or "W").
    pub fn with_parameter(&self, parameter: &str, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = self.clone();
        match (parameter, &mut cfg.system) {
            ("omega", System::Qubit { omega_mhz, .. } | System::Qutrit { omega_mhz, .. }) => *omega_mhz = value,
            (
                "W",
                System::Chain1d { w_mhz, .. } | System::Lattice2d { w_mhz, .. } | System::FreefermionChain { w_mhz, .. },
            ) => *w_mhz = value,
            ("omega" | "W", _) => {
                return Err(QslError::InvalidParameter(format!(
                    "parameter {parameter} does not apply to {:?}",
                    cfg.system.kind()
                )))
            }
            _ => {
                return Err(QslError::InvalidParameter(format!(
                    "unknown sweep parameter {parameter:?}; expected \"omega\" or \"W\""
                )))
            }
        }
        if !value.is_finite() {
            return Err(QslError::InvalidParameter(format!("{parameter} must be finite")));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config_with(text, |name| Err(QslError::UnknownPreset(name.into())))
    }

    fn field_of(err: QslError) -> String {
        match err {
            QslError::Config { path, .. } => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_qubit() {
        let cfg = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":12.5}"#).unwrap();
        assert_eq!(cfg.system, System::Qubit { omega_mhz: 0.0, delta_mhz: 12.5 });
        assert_eq!(cfg.time, TimeGrid::new(0.0, 250.0, 0.5));
        assert_eq!(cfg.alphas.len(), 25);
        assert_eq!(cfg.orthogonalization_eps, 1e-4);
        assert_eq!(cfg.initial_state, InitialState::Amplitudes { re: vec![1.0, 1.0], im: None });
        assert!(cfg.toggles.bounds && !cfg.toggles.hamming);
    }

    #[test]
    fn field_paths() {
        let e = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":12.5,"time":{"stop_ns":10,"step_ns":-1}}"#);
        assert_eq!(field_of(e.unwrap_err()), "time.step_ns");
        let e = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":12.5,"bogus":1}"#);
        assert!(matches!(e.unwrap_err(), QslError::Config { .. }));
        let e = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":12.5,"time":{"stop_ns":10,"step_ns":1,"x":2}}"#);
        assert_eq!(field_of(e.unwrap_err()), "time.x");
        let e = parse(r#"{"system":"qubit","omega_mhz":"fast","delta_mhz":12.5}"#);
        assert_eq!(field_of(e.unwrap_err()), "omega_mhz");
        let e = parse(r#"{"system":"qubit","omega_mhz":0}"#);
        assert_eq!(field_of(e.unwrap_err()), "delta_mhz");
        let e = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":1,"length":3}"#);
        assert_eq!(field_of(e.unwrap_err()), "length");
        let e = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":1,"alphas":[1,0]}"#);
        assert_eq!(field_of(e.unwrap_err()), "alphas[1]");
        let e = parse(r#"{"schema_version":7,"system":"qubit","omega_mhz":0,"delta_mhz":1}"#);
        assert_eq!(field_of(e.unwrap_err()), "schema_version");
        let e = parse(
            r#"{"system":"chain1d","length":6,"j1_mhz":-2,"initial_state":{"kind":"fock","state":"1010"}}"#,
        );
        assert_eq!(field_of(e.unwrap_err()), "initial_state.state");
        let e = parse(r#"{"system":"chain1d","length":6,"j1_mhz":-2,"toggles":{"momentum":true}}"#);
        assert_eq!(field_of(e.unwrap_err()), "toggles.momentum");
    }

    #[test]
    fn excitations_follow_state() {
        let cfg = parse(
            r#"{"system":"lattice2d","nx":3,"ny":3,"j1_mhz":-2,"j2_mhz":0.597,"w_mhz":3.4,
                "initial_state":{"kind":"fock","state":"101010101"}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.system, System::Lattice2d { num_excitations: 5, .. }));
    }

    #[test]
    fn round_trip() {
        let text = r#"{"system":"chain1d","length":6,"j1_mhz":-2,"w_mhz":1.8,"stagger":"odd_positive",
            "initial_state":{"kind":"superposition","terms":[{"re":0.5,"state":"101010"},{"re":0.8,"im":0.1,"state":"010101"}]},
            "time":{"start_ns":1,"stop_ns":5,"step_ns":0.25},"toggles":{"hamming":true}}"#;
        let cfg = parse(text).unwrap();
        let again = parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn preset_overrides_merge() {
        let preset = serde_json::json!({
            "name": "base", "system": "chain1d", "length": 6, "j1_mhz": -2.0, "w_mhz": 1.8,
            "time": {"stop_ns": 250.0, "step_ns": 0.5}
        });
        let cfg = parse_config_with(r#"{"preset":"base","w_mhz":3.0,"time":{"step_ns":1.0}}"#, |_| Ok(preset.clone())).unwrap();
        assert!(matches!(cfg.system, System::Chain1d { w_mhz, .. } if w_mhz == 3.0));
        assert_eq!(cfg.time, TimeGrid::new(0.0, 250.0, 1.0));
        assert_eq!(cfg.name, "base");
    }

    #[test]
    fn grid_points() {
        assert_eq!(TimeGrid::new(0.0, 1.0, 0.25).points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(TimeGrid::new(0.0, 250.0, 0.5).points().len(), 501);
        assert_eq!(TimeGrid::new(0.0, 10.0, 0.02).points().len(), 501);
        assert_eq!(TimeGrid::new(2.0, 2.0, 1.0).points(), vec![2.0]);
    }

    #[test]
    fn parameter_override() {
        let cfg = parse(r#"{"system":"qubit","omega_mhz":0,"delta_mhz":12.5}"#).unwrap();
        assert!(matches!(cfg.with_parameter("omega", 2.0).unwrap().system, System::Qubit { omega_mhz, .. } if omega_mhz == 2.0));
        assert!(cfg.with_parameter("W", 2.0).is_err());
        assert!(cfg.with_parameter("J", 2.0).is_err());
    }
}

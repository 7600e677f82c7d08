use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::config::{InitialState, ScenarioConfig, Solver, System, SystemKind, SCHEMA_VERSION};
use super::output::{format_f64, format_opt, write_csv, write_json};
use crate::bounds::{
    envelope, generalized_bound_curves, generalized_phase_data, orthogonalization_times, standard_bound_curves,
    BoundCurve, BoundName, OrthogonalizationTimes,
};
use crate::dynamics::{
    detect_orthogonalization, detect_orthogonalization_with, evolve_overlap, hamming_distribution, verify_sandwich,
    HammingDistribution, OverlapSeries,
};
use crate::error::{QslError, Result};
use crate::freefermion::{
    cat_overlap, cat_overlap_series, hcb_density_matrix, momentum_distribution, operator_product_stats,
    single_particle_hamiltonian, CatState, SingleParticleHamiltonian,
};
use crate::hamiltonians::{
    driven_qubit, driven_qutrit, lattice_2d_with_pattern, xy_chain, HermitianOperator, PotentialPattern,
};
use crate::hilbert::{make_product_state, make_superposition, Basis, FockState, QuantumState};
use crate::par::{self, Execution};
use crate::spectral::{
    classify_regime, diagonalize, krylov_measure, moments_over_grid, phase_point, Regime, SpectralData,
    SpectralMeasure, SpectralStats, DENSE_DIMENSION_LIMIT,
};
use crate::units::angular_to_mhz;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Krylov,
    FreeFermion,
}

/// Energy statistics in MHz (linear frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsMhz {
    pub mean: f64,
    pub delta_e: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub e_minus_emin: f64,
    pub emax_minus_e: f64,
}

impl From<&SpectralStats> for StatsMhz {
    fn from(s: &SpectralStats) -> Self {
        StatsMhz {
            mean: angular_to_mhz(s.mean),
            delta_e: angular_to_mhz(s.delta_e),
            e_min: angular_to_mhz(s.e_min),
            e_max: angular_to_mhz(s.e_max),
            e_minus_emin: angular_to_mhz(s.gap_below()),
            emax_minus_e: angular_to_mhz(s.gap_above()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub name: String,
    pub system: SystemKind,
    pub method: Method,
    /// Many-body Hilbert-space dimension.
    pub dimension: u128,
    pub stats_mhz: StatsMhz,
    pub regime: Option<Regime>,
    /// (x, y) = ((E − E_min)/(E_max − E_min), ΔE/(E_max − E_min))
    pub phase_point: Option<(f64, f64)>,
    pub orthogonalization_times_ns: OrthogonalizationTimes,
    pub orthogonalization_eps: f64,
    pub detected_t_perp_ns: Option<f64>,
    pub sandwich_checked: bool,
    pub sandwich_violations: usize,
    pub max_violation: f64,
    pub krylov_steps: Option<usize>,
    /// Time average of Π(d, t) for d = 0..=d_max.
    pub hamming_time_average: Option<Vec<f64>>,
    pub files: Vec<String>,
}

/// Bound curves on the scenario grid with their envelopes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    pub standard: [BoundCurve; 3],
    /// (lower, upper) per α; empty on the free-fermion path.
    pub generalized: Vec<(BoundCurve, BoundCurve)>,
    pub generalized_lower: Option<Vec<f64>>,
    pub generalized_upper: Option<Vec<f64>>,
    /// Envelopes over every curve, used for the sandwich check.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSeries {
    pub t: Vec<f64>,
    /// n_k at k = 2πj/L, one row per time.
    pub n_k: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub report: RunReport,
    pub series: OverlapSeries,
    pub bounds: Option<BoundTable>,
    pub hamming: Option<HammingDistribution>,
    pub momentum: Option<MomentumSeries>,
}

enum Prepared {
    Dense {
        sd: SpectralData,
        psi: QuantumState,
        measure: SpectralMeasure,
    },
    Krylov {
        measure: SpectralMeasure,
        steps: usize,
        dim: usize,
    },
    FreeFermion {
        sph: SingleParticleHamiltonian,
        cat: CatState,
        stats: SpectralStats,
        dim: u128,
    },
}

pub(crate) fn build_operator(system: &System) -> Result<HermitianOperator> {
    match *system {
        System::Qubit { omega_mhz, delta_mhz } => Ok(driven_qubit(omega_mhz, delta_mhz)),
        System::Qutrit { omega_mhz, eta_mhz } => Ok(driven_qutrit(omega_mhz, eta_mhz)),
        System::Chain1d {
            length,
            num_excitations,
            j1_mhz,
            w_mhz,
            stagger,
        } => xy_chain(
            length,
            num_excitations,
            j1_mhz,
            &PotentialPattern::staggered(length, w_mhz, stagger),
        ),
        System::Lattice2d {
            nx,
            ny,
            num_excitations,
            j1_mhz,
            j2_mhz,
            w_mhz,
            stagger,
        } => lattice_2d_with_pattern(
            nx,
            ny,
            num_excitations,
            j1_mhz,
            j2_mhz,
            &PotentialPattern::checkerboard(nx, ny, w_mhz, stagger),
        ),
        System::FreefermionChain { .. } => Err(QslError::InvalidParameter(
            "freefermion_chain has no many-body operator".into(),
        )),
    }
}

fn density_wave(num_sites: usize) -> Result<FockState> {
    let sites: Vec<usize> = (0..num_sites).step_by(2).collect();
    FockState::from_sites(num_sites, &sites)
}

pub(crate) fn build_state(state: &InitialState, basis: &Arc<Basis>) -> Result<QuantumState> {
    match state {
        InitialState::Amplitudes { re, im } => {
            if re.len() != basis.dim() {
                return Err(QslError::config(
                    "initial_state.re",
                    format!("expected {} amplitudes, found {}", basis.dim(), re.len()),
                ));
            }
            let amplitudes = re
                .iter()
                .enumerate()
                .map(|(i, &r)| C64::new(r, im.as_ref().map_or(0.0, |v| v[i])))
                .collect();
            QuantumState::from_amplitudes(Arc::clone(basis), amplitudes)
        }
        InitialState::Fock { state } => make_product_state(basis, state),
        InitialState::Superposition { terms } => {
            let terms: Vec<(C64, FockState)> = terms
                .iter()
                .map(|t| (C64::new(t.re, t.im), t.state.clone()))
                .collect();
            make_superposition(basis, &terms)
        }
        InitialState::DensityWave => make_product_state(basis, &density_wave(basis.num_sites())?),
    }
}

fn cat_state(state: &InitialState, length: usize) -> Result<CatState> {
    match state {
        InitialState::Fock { state } => CatState::from_fock(&[(C64::new(1.0, 0.0), state.clone())]),
        InitialState::Superposition { terms } => CatState::from_fock(
            &terms
                .iter()
                .map(|t| (C64::new(t.re, t.im), t.state.clone()))
                .collect::<Vec<_>>(),
        ),
        InitialState::DensityWave => CatState::from_fock(&[(C64::new(1.0, 0.0), density_wave(length)?)]),
        InitialState::Amplitudes { .. } => Err(QslError::NotAProductState),
    }
}

fn hamming_needs_dense() -> QslError {
    QslError::InvalidParameter(format!(
        "the Hamming distribution needs a dense eigendecomposition (dimension ≤ {DENSE_DIMENSION_LIMIT})"
    ))
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    if let System::FreefermionChain {
        length,
        j1_mhz,
        w_mhz,
        stagger,
    } = cfg.system
    {
        let sph = single_particle_hamiltonian(length, j1_mhz, &PotentialPattern::staggered(length, w_mhz, stagger))?;
        let cat = cat_state(&cfg.initial_state, length)?;
        if cat.components.len() != 1 {
            return Err(QslError::NotAProductState);
        }
        let occupied = &cat.components[0].1;
        let stats = sph.product_state_stats(occupied)?;
        let dim = binomial_u128(length, occupied.len());
        return Ok(Prepared::FreeFermion { sph, cat, stats, dim });
    }
    let op = build_operator(&cfg.system)?;
    let psi = build_state(&cfg.initial_state, op.basis())?;
    let dense = match cfg.solver {
        Solver::Auto => op.dim() <= DENSE_DIMENSION_LIMIT,
        Solver::Dense => true,
        Solver::Krylov => false,
    };
    if cfg.toggles.hamming && !dense {
        return Err(hamming_needs_dense());
    }
    if dense {
        let sd = diagonalize(&op)?;
        let measure = sd.measure(&psi)?;
        Ok(Prepared::Dense { sd, psi, measure })
    } else {
        let km = krylov_measure(&op, &psi, &Default::default())?;
        Ok(Prepared::Krylov {
            measure: km.measure,
            steps: km.steps,
            dim: op.dim(),
        })
    }
}

/// Energy statistics of the configured initial state, without dynamics.
/// Product states in large spaces skip the full spectral measure.
pub fn initial_stats(cfg: &ScenarioConfig) -> Result<SpectralStats> {
    if let System::FreefermionChain { .. } = cfg.system {
        return match prepare(cfg)? {
            Prepared::FreeFermion { stats, .. } => Ok(stats),
            _ => unreachable!("free-fermion systems prepare the free-fermion path"),
        };
    }
    let op = build_operator(&cfg.system)?;
    if cfg.solver == Solver::Krylov || (cfg.solver == Solver::Auto && op.dim() > DENSE_DIMENSION_LIMIT) {
        let psi = build_state(&cfg.initial_state, op.basis())?;
        if let Some(index) = psi.as_fock_index() {
            return operator_product_stats(&op, &op.basis().fock_state(index));
        }
        return Ok(krylov_measure(&op, &psi, &Default::default())?.measure.stats());
    }
    let psi = build_state(&cfg.initial_state, op.basis())?;
    Ok(diagonalize(&op)?.measure(&psi)?.stats())
}

fn bound_table(
    cfg: &ScenarioConfig,
    stats: &SpectralStats,
    series: &OverlapSeries,
    measure: Option<&SpectralMeasure>,
    exec: Execution,
) -> Result<BoundTable> {
    let standard = standard_bound_curves(stats, &series.t)?;
    let generalized = match measure {
        Some(m) => {
            let moments = moments_over_grid(m, &cfg.alphas, exec)?;
            let pd = generalized_phase_data(series, stats, &cfg.alphas)?;
            generalized_bound_curves(&pd, &moments, exec)?
        }
        None => Vec::new(),
    };
    let mut all: Vec<BoundCurve> = standard.to_vec();
    let (generalized_lower, generalized_upper) = if generalized.is_empty() {
        (None, None)
    } else {
        let flat: Vec<BoundCurve> = generalized
            .iter()
            .flat_map(|(lo, up)| [lo.clone(), up.clone()])
            .collect();
        let (lo, up) = envelope(&flat)?;
        all.extend(flat);
        (Some(lo), Some(up))
    };
    let (lower, upper) = envelope(&all)?;
    Ok(BoundTable {
        standard,
        generalized,
        generalized_lower,
        generalized_upper,
        lower,
        upper,
    })
}

/// Run a scenario in memory. `report.files` is left empty.
pub fn execute(cfg: &ScenarioConfig, exec: Execution) -> Result<ScenarioResult> {
    execute_inner(cfg, exec).map_err(|e| e.in_scenario(&cfg.name))
}

fn execute_inner(cfg: &ScenarioConfig, exec: Execution) -> Result<ScenarioResult> {
    let t_grid = cfg.time.points();
    let prepared = prepare(cfg)?;
    let (stats, measure, method, dimension, krylov_steps) = match &prepared {
        Prepared::Dense { measure, sd, .. } => (measure.stats(), Some(measure), Method::Dense, sd.dim() as u128, None),
        Prepared::Krylov { measure, steps, dim } => {
            (measure.stats(), Some(measure), Method::Krylov, *dim as u128, Some(*steps))
        }
        Prepared::FreeFermion { stats, dim, .. } => (*stats, None, Method::FreeFermion, *dim, None),
    };

    let series = match (&prepared, measure) {
        (Prepared::FreeFermion { sph, cat, .. }, _) => {
            OverlapSeries::from_amplitudes(t_grid.clone(), &cat_overlap_series(sph, cat, &t_grid, exec))?
        }
        (_, Some(m)) => evolve_overlap(m, &t_grid, exec)?,
        _ => unreachable!("many-body paths carry a spectral measure"),
    };

    let detected = match (&prepared, measure) {
        (Prepared::FreeFermion { sph, cat, .. }, _) => detect_orthogonalization_with(
            |t| cat_overlap(&sph.propagator(t), cat).norm(),
            &series,
            cfg.orthogonalization_eps,
        )?,
        (_, Some(m)) => detect_orthogonalization(m, &series, cfg.orthogonalization_eps)?,
        _ => None,
    };

    let (regime, phase) = if cfg.toggles.phase_diagram {
        (Some(classify_regime(&stats)?), Some(phase_point(&stats)?))
    } else {
        (None, None)
    };

    let bounds = if cfg.toggles.bounds {
        Some(bound_table(cfg, &stats, &series, measure, exec)?)
    } else {
        None
    };
    let violations = match &bounds {
        Some(b) => verify_sandwich(&series, &b.lower, &b.upper, cfg.sandwich_tol)?,
        None => Vec::new(),
    };

    let hamming = if cfg.toggles.hamming {
        match &prepared {
            Prepared::Dense { sd, psi, .. } => Some(hamming_distribution(sd, psi, &t_grid, exec)?),
            _ => return Err(hamming_needs_dense()),
        }
    } else {
        None
    };

    let momentum = match (&prepared, cfg.toggles.momentum) {
        (Prepared::FreeFermion { sph, cat, .. }, true) => {
            let occupied = &cat.components[0].1;
            let times: Vec<f64> = t_grid.iter().copied().step_by(cfg.momentum_stride).collect();
            let n_k = par::map(exec, &times, |&t| {
                momentum_distribution(&hcb_density_matrix(&sph.propagator(t), occupied)?)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            Some(MomentumSeries { t: times, n_k })
        }
        _ => None,
    };

    let hamming_time_average = hamming.as_ref().map(|h| {
        (0..=h.d_max)
            .map(|d| h.probabilities.iter().map(|row| row[d]).sum::<f64>() / h.probabilities.len() as f64)
            .collect()
    });

    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        system: cfg.system.kind(),
        method,
        dimension,
        stats_mhz: StatsMhz::from(&stats),
        regime,
        phase_point: phase,
        orthogonalization_times_ns: orthogonalization_times(&stats),
        orthogonalization_eps: cfg.orthogonalization_eps,
        detected_t_perp_ns: detected,
        sandwich_checked: bounds.is_some(),
        sandwich_violations: violations.len(),
        max_violation: violations.iter().map(|v| v.excess).fold(0.0, f64::max),
        krylov_steps,
        hamming_time_average,
        files: Vec::new(),
    };
    Ok(ScenarioResult {
        report,
        series,
        bounds,
        hamming,
        momentum,
    })
}

fn alpha_label(alpha: f64) -> String {
    format!("{alpha:.4}")
}

fn overlap_table(result: &ScenarioResult, per_alpha: bool) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = [
        "t_ns",
        "overlap",
        "theta_rad",
        "mt",
        "ml",
        "mlstar",
        "gen_lower",
        "gen_upper",
        "lower_env",
        "upper_env",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let s = &result.series;
    let b = result.bounds.as_ref();
    let alpha_curves: &[(BoundCurve, BoundCurve)] = match b {
        Some(b) if per_alpha => &b.generalized,
        _ => &[],
    };
    for (lo, _) in alpha_curves {
        if let BoundName::Generalized(a) = lo.name {
            header.push(format!("lower_alpha_{}", alpha_label(a)));
            header.push(format!("upper_alpha_{}", alpha_label(a)));
        }
    }
    let rows = (0..s.len())
        .map(|i| {
            let std = |k: usize| format_opt(b.and_then(|b| b.standard[k].values[i]));
            let vec_at = |v: Option<&Vec<f64>>| format_opt(v.map(|v| v[i]));
            let mut row = vec![
                format_f64(s.t[i]),
                format_f64(s.overlap[i]),
                format_f64(s.theta[i]),
                std(0),
                std(1),
                std(2),
                vec_at(b.and_then(|b| b.generalized_lower.as_ref())),
                vec_at(b.and_then(|b| b.generalized_upper.as_ref())),
                vec_at(b.map(|b| &b.lower)),
                vec_at(b.map(|b| &b.upper)),
            ];
            for (lo, up) in alpha_curves {
                row.push(format_opt(lo.values[i]));
                row.push(format_opt(up.values[i]));
            }
            row
        })
        .collect();
    (header, rows)
}

/// Write the CSV files and the JSON report into `dir`, recording the file
/// names in `result.report.files`.
pub fn write_outputs(result: &mut ScenarioResult, cfg: &ScenarioConfig, dir: &Path) -> Result<()> {
    let name = &cfg.name;
    let mut files = Vec::new();

    let (header, rows) = overlap_table(result, cfg.toggles.per_alpha_columns);
    let file = format!("{name}_overlap.csv");
    write_csv(&dir.join(&file), &header, rows)?;
    files.push(file);

    if let Some(h) = &result.hamming {
        let mut header = vec!["t_ns".to_string()];
        header.extend((0..=h.d_max).map(|d| format!("d_{d}")));
        let rows = h.t.iter().zip(&h.probabilities).map(|(t, row)| {
            std::iter::once(format_f64(*t))
                .chain(row.iter().map(|&p| format_f64(p)))
                .collect()
        });
        let file = format!("{name}_hamming.csv");
        write_csv(&dir.join(&file), &header, rows)?;
        files.push(file);
    }

    if let Some(m) = &result.momentum {
        let l = m.n_k.first().map_or(0, Vec::len);
        let mut header = vec!["t_ns".to_string()];
        header.extend((0..l).map(|j| format!("n_k_{j}")));
        let rows = m.t.iter().zip(&m.n_k).map(|(t, row)| {
            std::iter::once(format_f64(*t))
                .chain(row.iter().map(|&x| format_f64(x)))
                .collect()
        });
        let file = format!("{name}_momentum.csv");
        write_csv(&dir.join(&file), &header, rows)?;
        files.push(file);
    }

    let file = format!("{name}_report.json");
    files.push(file.clone());
    result.report.files = files;
    write_json(&dir.join(&file), &result.report)
}

/// [`execute`] followed by [`write_outputs`].
pub fn run_scenario(cfg: &ScenarioConfig, dir: &Path, exec: Execution) -> Result<ScenarioResult> {
    let mut result = execute(cfg, exec)?;
    write_outputs(&mut result, cfg, dir).map_err(|e| e.in_scenario(&cfg.name))?;
    Ok(result)
}

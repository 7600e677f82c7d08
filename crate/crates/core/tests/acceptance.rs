//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#![allow(clippy::needless_range_loop)]

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use qsl_core::bounds::{orthogonalization_times, standard_bound_curves};
use qsl_core::dynamics::{evolve_overlap, hamming_distribution};
use qsl_core::freefermion::{
    analytic_delta_e, cat_overlap_series, crossover_w, single_particle_hamiltonian, CatState, Geometry,
};
use qsl_core::hamiltonians::{fock_energy, lattice_2d, xy_chain, HermitianOperator, PotentialPattern, Stagger};
use qsl_core::hilbert::{make_product_state, make_superposition, Basis, FockState, QuantumState};
use qsl_core::par::Execution;
use qsl_core::scenario::{execute, preset_config, run_scaling, scaling_preset};
use qsl_core::spectral::{diagonalize, mt_blockage_check, spectral_stats, SpectralData};
use qsl_core::units::angular_to_mhz;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// ED reference from tests/oracles/fock_confinement.py: time average of
/// Σ_{d>4} Π(d, t) over 0..=300 ns (step 0.5) for the 3×3 density wave.
const TAIL_ORACLE_W6P5: f64 = 0.009450307181652058;
const TAIL_ORACLE_W0: f64 = 0.40346716140828476;

const EXEC: Execution = Execution::Parallel;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("runtime {elapsed:.2?} exceeds {limit:?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn grid(stop: f64, step: f64) -> Vec<f64> {
    let n = (stop / step).round() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// GUE-like matrix with energies of order 1 rad/ns.
fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> SpectralData {
    let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        m[i][i] = C64::new(rng.sample(StandardNormal), 0.0);
        for j in 0..i {
            let z = gaussian_c(rng) * std::f64::consts::FRAC_1_SQRT_2;
            m[i][j] = z;
            m[j][i] = z.conj();
        }
    }
    let basis = Arc::new(Basis::abstract_space(dim).unwrap());
    diagonalize(&HermitianOperator::from_dense(basis, &m).unwrap()).unwrap()
}

fn state_from_coefficients(sd: &SpectralData, c: &[C64]) -> QuantumState {
    QuantumState::from_amplitudes(sd.basis().clone(), sd.synthesize(c)).unwrap()
}

fn qubit_orthogonalization() -> Check {
    let start = Instant::now();
    let result = execute(&preset_config("fig1e").map_err(e)?, EXEC).map_err(e)?;
    let elapsed = start.elapsed();
    let t_perp = result.report.detected_t_perp_ns.ok_or("no orthogonalization detected")?;
    ensure((t_perp - 40.0).abs() <= 0.01, || format!("t_perp = {t_perp} ns"))?;
    let bounds = result.bounds.ok_or("bounds disabled")?;
    let mut max_dev: f64 = 0.0;
    let mut compared = 0;
    for (f, mt) in result.series.overlap.iter().zip(&bounds.standard[0].values) {
        if let Some(mt) = mt {
            max_dev = max_dev.max((f - mt).abs());
            compared += 1;
        }
    }
    ensure(compared > 1 && max_dev <= 1e-9, || format!("max |F − MT| = {max_dev:e} over {compared} points"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("t_perp = {t_perp:.6} ns, max |F − MT| = {max_dev:.1e}, {elapsed:.2?}"))
}

fn lattice_stats(w: f64) -> qsl_core::Result<qsl_core::spectral::SpectralStats> {
    let op = lattice_2d(3, 3, 5, -2.0, 0.597, w)?;
    let sd = diagonalize(&op)?;
    let psi = make_product_state(op.basis(), &"101010101".parse()?)?;
    spectral_stats(&sd, &psi)
}

fn crossover_2d() -> Check {
    let start = Instant::now();
    let w_star = crossover_w(lattice_stats, 0.0, 7.0).map_err(e)?;
    let delta_e = angular_to_mhz(lattice_stats(w_star).map_err(e)?.delta_e);
    let elapsed = start.elapsed();
    ensure((w_star - 3.4).abs() <= 0.2, || format!("W* = {w_star} MHz"))?;
    let ratio = delta_e / (2.0 * w_star);
    ensure((ratio - 1.0).abs() < 0.05, || format!("ΔE/(2W*) = {ratio}"))?;
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("W* = {w_star:.4} MHz, ΔE/(2W*) = {ratio:.4}, {elapsed:.2?}"))
}

fn analytic_delta_e_check() -> Check {
    let start = Instant::now();
    let cases: [(Geometry, f64, &str); 2] = [
        (Geometry::Chain { length: 6 }, 2.0 * 5f64.sqrt(), "101010"),
        (Geometry::Grid { nx: 3, ny: 3 }, 4.0 * 3f64.sqrt(), "101010101"),
    ];
    let mut worst: f64 = 0.0;
    for (geometry, expected, fock) in cases {
        let analytic = angular_to_mhz(analytic_delta_e(geometry, -2.0, 0.597).map_err(e)?);
        let rel = (analytic - expected).abs() / expected;
        ensure(rel <= 1e-8, || format!("{geometry:?}: analytic {analytic} vs {expected}"))?;
        for w in [0.0, 2.0, 4.0, 8.0] {
            let op = match geometry {
                Geometry::Chain { length } => {
                    xy_chain(length, 3, -2.0, &PotentialPattern::staggered(length, w, Stagger::EvenPositive))
                }
                Geometry::Grid { nx, ny } => lattice_2d(nx, ny, 5, -2.0, 0.597, w),
            }
            .map_err(e)?;
            let sd = diagonalize(&op).map_err(e)?;
            let psi = make_product_state(op.basis(), &fock.parse().map_err(e)?).map_err(e)?;
            let numeric = angular_to_mhz(spectral_stats(&sd, &psi).map_err(e)?.delta_e);
            let rel = (numeric - expected).abs() / expected;
            worst = worst.max(rel);
            ensure(rel <= 1e-8, || format!("{geometry:?} W = {w}: numeric {numeric} vs {expected}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("2√5 and 4√3 MHz, worst relative deviation {worst:.1e}, {elapsed:.2?}"))
}

fn sandwich_suite() -> Check {
    let start = Instant::now();
    let mut checked = 0;
    for fig in 1..=4 {
        for panel in ["d", "e", "f"] {
            let name = format!("fig{fig}{panel}");
            let cfg = preset_config(&name).map_err(e)?;
            ensure(cfg.sandwich_tol == 1e-9, || format!("{name}: tolerance {}", cfg.sandwich_tol))?;
            let report = execute(&cfg, EXEC).map_err(e)?.report;
            ensure(report.sandwich_checked, || format!("{name}: sandwich not checked"))?;
            ensure(report.sandwich_violations == 0, || {
                format!("{name}: {} violations, max {:e}", report.sandwich_violations, report.max_violation)
            })?;
            checked += 1;
        }
    }
    let records = run_scaling(&scaling_preset(), EXEC).map_err(e)?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("{checked} presets clean, scaling study {} geometries, {elapsed:.2?}", records.len()))
}

fn short_time_mt_dominance() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157_0001);
    let mut min_delta = f64::INFINITY;
    for _ in 0..500 {
        let dim = rng.gen_range(2..=64);
        let sd = random_hermitian(&mut rng, dim);
        let amps = (0..dim).map(|_| gaussian_c(&mut rng)).collect();
        let psi = QuantumState::from_amplitudes(sd.basis().clone(), amps).map_err(e)?;
        let stats = spectral_stats(&sd, &psi).map_err(e)?;
        let times = orthogonalization_times(&stats);
        let t_end = times.t_mt.min(times.t_ml) / 4.0;
        ensure(t_end.is_finite() && t_end > 0.0, || format!("degenerate system, t_end = {t_end}"))?;
        let t_grid: Vec<f64> = (1..=200).map(|k| t_end * k as f64 / 200.0).collect();
        let [mt, ml, _] = standard_bound_curves(&stats, &t_grid).map_err(e)?;
        for (a, b) in mt.values.iter().zip(&ml.values) {
            let (a, b) = (a.ok_or("MT vacuous")?, b.ok_or("ML vacuous")?);
            min_delta = min_delta.min(a - b);
        }
    }
    let elapsed = start.elapsed();
    ensure(min_delta >= -1e-12, || format!("min δ = {min_delta:e}"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("500 systems, min δ = {min_delta:.2e}, {elapsed:.2?}"))
}

fn mt_blockage() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157_0002);
    let mut max_extreme: f64 = 0.0;
    for _ in 0..200 {
        let dim = rng.gen_range(2..=64);
        let sd = random_hermitian(&mut rng, dim);
        let mut c = vec![C64::new(0.0, 0.0); dim];
        c[0] = gaussian_c(&mut rng);
        c[dim - 1] = gaussian_c(&mut rng);
        let psi = state_from_coefficients(&sd, &c);
        let check = mt_blockage_check(&sd.measure(&psi).map_err(e)?);
        max_extreme = max_extreme.max(check.gap.abs());
        ensure(check.gap.abs() < 1e-10 && check.saturates, || format!("extreme superposition D = {:e}", check.gap))?;
    }
    let mut min_interior = f64::INFINITY;
    for _ in 0..200 {
        let dim = rng.gen_range(3..=64);
        let sd = random_hermitian(&mut rng, dim);
        let mut c: Vec<C64> = (0..dim)
            .map(|_| if rng.gen_bool(0.5) { gaussian_c(&mut rng) } else { C64::new(0.0, 0.0) })
            .collect();
        let k = rng.gen_range(1..dim - 1);
        c[k] = gaussian_c(&mut rng) + C64::new(0.5, 0.0);
        let psi = state_from_coefficients(&sd, &c);
        let check = mt_blockage_check(&sd.measure(&psi).map_err(e)?);
        min_interior = min_interior.min(check.gap);
        ensure(check.gap > 0.0 && !check.saturates, || format!("interior state D = {:e}", check.gap))?;
    }
    let elapsed = start.elapsed();
    Ok(format!("max |D| extreme = {max_extreme:.1e}, min D interior = {min_interior:.1e}, {elapsed:.2?}"))
}

fn free_fermion_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157_0003);
    let t_grid = grid(250.0, 0.5);
    let mut worst: f64 = 0.0;
    for length in [6, 8, 10, 12] {
        let w = rng.gen_range(0.0..8.0);
        let stagger = if rng.gen_bool(0.5) { Stagger::EvenPositive } else { Stagger::OddPositive };
        let pattern = PotentialPattern::staggered(length, w, stagger);
        let even: FockState = "10".repeat(length / 2).parse().map_err(e)?;
        let odd: FockState = "01".repeat(length / 2).parse().map_err(e)?;
        let terms = [(C64::new(0.5, 0.0), even), (C64::new(3f64.sqrt() / 2.0, 0.0), odd)];

        let op = xy_chain(length, length / 2, -2.0, &pattern).map_err(e)?;
        let sd = diagonalize(&op).map_err(e)?;
        let psi = make_superposition(op.basis(), &terms).map_err(e)?;
        let ed = evolve_overlap(&sd.measure(&psi).map_err(e)?, &t_grid, EXEC).map_err(e)?;

        let sph = single_particle_hamiltonian(length, -2.0, &pattern).map_err(e)?;
        let cat = CatState::from_fock(&terms).map_err(e)?;
        let ff = cat_overlap_series(&sph, &cat, &t_grid, EXEC);
        for (a, b) in ed.overlap.iter().zip(&ff) {
            worst = worst.max((a - b.norm()).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("L = 6..12, max |F_ED − F_FF| = {worst:.1e}, {elapsed:.2?}"))
}

fn tail_weight(w: f64) -> Result<f64, String> {
    let op = lattice_2d(3, 3, 5, -2.0, 0.597, w).map_err(e)?;
    let sd = diagonalize(&op).map_err(e)?;
    let psi = make_product_state(op.basis(), &"101010101".parse().map_err(e)?).map_err(e)?;
    let pi = hamming_distribution(&sd, &psi, &grid(300.0, 0.5), EXEC).map_err(e)?;
    Ok(pi.mean_tail_weight(4))
}

fn fock_confinement() -> Check {
    let confined = tail_weight(6.5)?;
    let free = tail_weight(0.0)?;
    ensure((confined - TAIL_ORACLE_W6P5).abs() <= 1e-9, || {
        format!("W = 6.5 tail {confined} differs from reference {TAIL_ORACLE_W6P5}")
    })?;
    ensure((free - TAIL_ORACLE_W0).abs() <= 1e-9, || format!("W = 0 tail {free} differs from reference {TAIL_ORACLE_W0}"))?;
    ensure(confined <= TAIL_ORACLE_W6P5 + 1e-9, || format!("tail {confined} above reference"))?;
    ensure(free >= 5.0 * confined, || format!("W = 0 tail {free} is not 5× {confined}"))?;
    Ok(format!("tail(6.5) = {confined:.6}, tail(0) = {free:.6}, ratio {:.1}", free / confined))
}

fn degenerate_subspace() -> Check {
    let w = 6.5;
    let pattern = PotentialPattern::checkerboard(3, 3, w, Stagger::EvenPositive);
    let basis = Basis::sector(9, 5).map_err(e)?;
    let target = 3.0 * pattern.values()[0];
    let mut count = 0;
    for i in 0..basis.dim() {
        let energy = fock_energy(&basis.fock_state(i), &pattern).map_err(e)?;
        if (energy - target).abs() <= 1e-12 * target.abs() {
            count += 1;
        }
    }
    ensure(count == 20, || format!("{count} states at E_s = 3W"))?;
    Ok(format!("{count} of {} states at E_s = 3W", basis.dim()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 qubit orthogonalization", qubit_orthogonalization),
        ("2 2d crossover", crossover_2d),
        ("3 analytic vs numeric ΔE", analytic_delta_e_check),
        ("4 sandwich suite", sandwich_suite),
        ("5 short-time MT dominance", short_time_mt_dominance),
        ("6 MT blockage", mt_blockage),
        ("7 free-fermion equivalence", free_fermion_equivalence),
        ("8 Fock-space confinement", fock_confinement),
        ("9 degenerate subspace", degenerate_subspace),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

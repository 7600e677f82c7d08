//! Orthogonalization times and overlap bound curves: the standard MT, ML
//! and ML* curves and the generalized L^α family.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::OverlapSeries;
use crate::error::{QslError, Result};
use crate::par::{self, Execution};
use crate::spectral::SpectralStats;

/// Denominators below this are treated as zero (time becomes +∞).
pub const TIME_DENOMINATOR_TOL: f64 = 1e-14;

/// |d′_α| or |d″_α| below this makes the corresponding branch vacuous.
pub const PHASE_DENOMINATOR_TOL: f64 = 1e-12;

/// Minimal orthogonalization times (ns); +∞ when the bound never binds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalizationTimes {
    #[serde(with = "crate::serde_f64")]
    pub t_mt: f64,
    #[serde(with = "crate::serde_f64")]
    pub t_ml: f64,
    #[serde(with = "crate::serde_f64")]
    pub t_mlstar: f64,
    #[serde(with = "crate::serde_f64")]
    pub t_u: f64,
}

fn quarter_period(rate: f64) -> f64 {
    if rate < TIME_DENOMINATOR_TOL {
        f64::INFINITY
    } else {
        PI / (2.0 * rate)
    }
}

pub fn orthogonalization_times(stats: &SpectralStats) -> OrthogonalizationTimes {
    let t_mt = quarter_period(stats.delta_e);
    let t_ml = quarter_period(stats.gap_below());
    let t_mlstar = quarter_period(stats.gap_above());
    OrthogonalizationTimes {
        t_mt,
        t_ml,
        t_mlstar,
        t_u: t_mt.max(t_ml).max(t_mlstar),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundName {
    Mt,
    Ml,
    MlStar,
    /// The moments about E_min and about E_max combined by the sign of
    /// (d′_α, d″_α).
    Generalized(f64),
}

/// Bound values on a time grid; `None` marks points where the bound is
/// vacuous.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub name: BoundName,
    pub values: Vec<Option<f64>>,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(QslError::EmptyInput("time grid"));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(QslError::GridMismatch("times must be finite and nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QslError::GridMismatch("times must be strictly ascending".into()));
    }
    Ok(())
}

fn cosine_until_zero(arg: f64) -> Option<f64> {
    (arg <= FRAC_PI_2).then(|| arg.cos().max(0.0))
}

/// Lower curves cos(ΔE t), cos(√(π(E−E_min)t/2)) and cos(√(π(E_max−E)t/2)),
/// each vacuous once its argument passes π/2.
pub fn standard_bound_curves(stats: &SpectralStats, t_grid: &[f64]) -> Result<[BoundCurve; 3]> {
    check_grid(t_grid)?;
    let curve = |name, f: &dyn Fn(f64) -> f64| BoundCurve {
        kind: BoundKind::Lower,
        name,
        values: t_grid.iter().map(|&t| cosine_until_zero(f(t))).collect(),
    };
    let (below, above) = (stats.gap_below().max(0.0), stats.gap_above().max(0.0));
    Ok([
        curve(BoundName::Mt, &|t| stats.delta_e * t),
        curve(BoundName::Ml, &|t| (FRAC_PI_2 * below * t).sqrt()),
        curve(BoundName::MlStar, &|t| (FRAC_PI_2 * above * t).sqrt()),
    ])
}

/// d_α = cos φ − (2α/π) sin φ
pub fn phase_denominator(phase: f64, alpha: f64) -> f64 {
    phase.cos() - 2.0 * alpha / PI * phase.sin()
}

/// Phases entering the generalized bounds on a time grid, with d′_α and
/// d″_α stored per α (outer index) and per time (inner index).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedPhaseData {
    pub t: Vec<f64>,
    pub overlap: Vec<f64>,
    pub theta: Vec<f64>,
    /// θ′ = θ + E_min t
    pub theta_min: Vec<f64>,
    /// θ″ = −θ − E_max t
    pub theta_max: Vec<f64>,
    pub alphas: Vec<f64>,
    pub d_min: Vec<Vec<f64>>,
    pub d_max: Vec<Vec<f64>>,
}

pub fn generalized_phase_data(
    series: &OverlapSeries,
    stats: &SpectralStats,
    alphas: &[f64],
) -> Result<GeneralizedPhaseData> {
    if let Some(&a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(QslError::InvalidAlpha(a));
    }
    let theta_min: Vec<f64> = series
        .t
        .iter()
        .zip(&series.theta)
        .map(|(t, th)| th + stats.e_min * t)
        .collect();
    let theta_max: Vec<f64> = series
        .t
        .iter()
        .zip(&series.theta)
        .map(|(t, th)| -th - stats.e_max * t)
        .collect();
    let table = |phases: &[f64]| -> Vec<Vec<f64>> {
        alphas
            .iter()
            .map(|&a| phases.iter().map(|&p| phase_denominator(p, a)).collect())
            .collect()
    };
    Ok(GeneralizedPhaseData {
        t: series.t.clone(),
        overlap: series.overlap.clone(),
        theta: series.theta.clone(),
        d_min: table(&theta_min),
        d_max: table(&theta_max),
        theta_min,
        theta_max,
        alphas: alphas.to_vec(),
    })
}

/// 1 − 2 (t·E_α/π)^α
fn generalized_numerator(t: f64, moment: f64, alpha: f64) -> f64 {
    1.0 - 2.0 * (t * moment / PI).powf(alpha)
}

/// Bound implied by one family at one point: `(lower, upper)`, at most one
/// of which is present depending on the sign of `d`.
pub fn generalized_branch(t: f64, d: f64, moment: f64, alpha: f64) -> (Option<f64>, Option<f64>) {
    if d.abs() < PHASE_DENOMINATOR_TOL {
        return (None, None);
    }
    let b = generalized_numerator(t, moment, alpha) / d;
    if d > 0.0 {
        (Some(b.max(0.0)), None)
    } else {
        (None, Some(b.min(1.0)))
    }
}

fn fold_opt(a: Option<f64>, b: Option<f64>, f: fn(f64, f64) -> f64) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(f(x, y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// For each α, the combined lower and upper curves: a positive d selects a
/// lower bound from its family, a negative d an upper bound, and bounds of
/// the same kind are combined by max (lower) or min (upper).
pub fn generalized_bound_curves(
    pd: &GeneralizedPhaseData,
    moments: &[(f64, f64)],
    exec: Execution,
) -> Result<Vec<(BoundCurve, BoundCurve)>> {
    if moments.len() != pd.alphas.len() {
        return Err(QslError::LengthMismatch {
            expected: pd.alphas.len(),
            found: moments.len(),
        });
    }
    let curves = par::map_range(exec, pd.alphas.len(), |k| {
        let alpha = pd.alphas[k];
        let (e_a, e_a_star) = moments[k];
        let mut lower = Vec::with_capacity(pd.t.len());
        let mut upper = Vec::with_capacity(pd.t.len());
        for (i, &t) in pd.t.iter().enumerate() {
            let (lo1, up1) = generalized_branch(t, pd.d_min[k][i], e_a, alpha);
            let (lo2, up2) = generalized_branch(t, pd.d_max[k][i], e_a_star, alpha);
            lower.push(fold_opt(lo1, lo2, f64::max));
            upper.push(fold_opt(up1, up2, f64::min));
        }
        (
            BoundCurve {
                kind: BoundKind::Lower,
                name: BoundName::Generalized(alpha),
                values: lower,
            },
            BoundCurve {
                kind: BoundKind::Upper,
                name: BoundName::Generalized(alpha),
                values: upper,
            },
        )
    });
    Ok(curves)
}

/// t ≥ γ^{1/α} π / (2^{1/α} E_α) with γ = max(0, 1 − F d_α).
pub fn generalized_orthogonalization_time(overlap: f64, d: f64, alpha: f64, moment: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(QslError::InvalidAlpha(alpha));
    }
    let gamma = (1.0 - overlap * d).max(0.0);
    if moment < TIME_DENOMINATOR_TOL {
        return Ok(if gamma == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(gamma.powf(1.0 / alpha) * PI / (2f64.powf(1.0 / alpha) * moment))
}

/// Pointwise max of lower curves (floor 0) and min of upper curves
/// (ceiling 1), ignoring vacuous points.
pub fn envelope(curves: &[BoundCurve]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = curves
        .first()
        .ok_or(QslError::EmptyInput("bound curves"))?
        .values
        .len();
    if let Some(c) = curves.iter().find(|c| c.values.len() != n) {
        return Err(QslError::GridMismatch(format!(
            "curve {:?} has {} points, expected {n}",
            c.name,
            c.values.len()
        )));
    }
    let mut lower = vec![0.0f64; n];
    let mut upper = vec![1.0f64; n];
    for c in curves {
        for (i, v) in c.values.iter().enumerate() {
            if let Some(v) = *v {
                match c.kind {
                    BoundKind::Lower => lower[i] = lower[i].max(v),
                    BoundKind::Upper => upper[i] = upper[i].min(v),
                }
            }
        }
    }
    Ok((lower, upper))
}

/// 25 logarithmically spaced exponents in [0.2, 5].
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(0.2, 5.0, 25)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_overlap;
    use crate::hamiltonians::{driven_qubit, xy_chain, PotentialPattern, Stagger};
    use crate::hilbert::{make_product_state, Basis, QuantumState};
    use crate::spectral::{diagonalize, moment_alpha, spectral_stats};
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn stats(mean: f64, delta_e: f64, e_min: f64, e_max: f64) -> SpectralStats {
        SpectralStats { mean, delta_e, e_min, e_max }
    }

    #[test]
    fn qubit_times() {
        let sd = diagonalize(&driven_qubit(0.0, 12.5)).unwrap();
        let plus = QuantumState::from_amplitudes(
            sd.basis().clone(),
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
        )
        .unwrap();
        let times = orthogonalization_times(&spectral_stats(&sd, &plus).unwrap());
        for t in [times.t_mt, times.t_ml, times.t_mlstar, times.t_u] {
            assert!((t - 40.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenstate_times() {
        // interior eigenstate: no spread, but both gaps are finite
        let times = orthogonalization_times(&stats(0.5, 0.0, 0.0, 1.0));
        assert!(times.t_mt.is_infinite() && times.t_u.is_infinite());
        assert!((times.t_ml - PI).abs() < 1e-15);
        let ground = orthogonalization_times(&stats(0.0, 0.0, 0.0, 1.0));
        assert!(ground.t_ml.is_infinite());
        assert!((ground.t_mlstar - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn standard_curves() {
        let s = stats(0.3, 0.2, 0.0, 1.0);
        let grid: Vec<f64> = (0..200).map(|k| 0.1 * k as f64).collect();
        let curves = standard_bound_curves(&s, &grid).unwrap();
        for c in &curves {
            assert_eq!(c.values[0], Some(1.0));
            assert!(c.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        }
        let mt = &curves[0].values;
        let cutoff = FRAC_PI_2 / 0.2;
        for (t, v) in grid.iter().zip(mt) {
            assert_eq!(v.is_some(), *t <= cutoff);
        }
        assert!(standard_bound_curves(&s, &[1.0, 0.5]).is_err());
        assert!(standard_bound_curves(&s, &[]).is_err());
    }

    #[test]
    fn alpha_grid() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[24], 5.0);
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }

    #[test]
    fn branch_signs() {
        assert_eq!(generalized_branch(0.0, 1.0, 3.0, 0.5), (Some(1.0), None));
        assert_eq!(generalized_branch(1.0, 1e-13, 3.0, 0.5), (None, None));
        let (lo, up) = generalized_branch(0.1, -0.5, 1.0, 1.0);
        assert!(lo.is_none());
        assert!((up.unwrap() - (1.0 - 0.2 / PI) / -0.5).abs() < 1e-15);
    }

    #[test]
    fn orthogonalization_at_zero_overlap() {
        for alpha in [0.3, 1.0, 2.0, 4.5] {
            let t = generalized_orthogonalization_time(0.0, 0.7, alpha, 2.0).unwrap();
            let expected = PI / (2f64.powf(1.0 / alpha) * 2.0);
            assert!((t - expected).abs() < 1e-15);
        }
        let t_ml = generalized_orthogonalization_time(0.0, -0.3, 1.0, 0.25).unwrap();
        assert!((t_ml - PI / (2.0 * 0.25)).abs() < 1e-15);
        assert!(generalized_orthogonalization_time(0.5, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn linear_lower_curve_at_alpha_one() {
        let s = stats(0.4, 0.3, 0.0, 2.0);
        let series = OverlapSeries {
            t: vec![0.0, 0.5, 1.0],
            overlap: vec![1.0, 0.9, 0.8],
            theta: vec![0.0, 0.0, 0.0],
        };
        let pd = generalized_phase_data(&series, &s, &[1.0]).unwrap();
        let curves = generalized_bound_curves(&pd, &[(0.4, 1.6)], Execution::Sequential).unwrap();
        for (i, &t) in series.t.iter().enumerate() {
            let expected = (1.0 - 2.0 * t * 0.4 / PI).max(0.0);
            let got = curves[0].0.values[i].unwrap();
            assert!(got >= expected - 1e-15);
            let (lo1, _) = generalized_branch(t, 1.0, 0.4, 1.0);
            assert!((lo1.unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_basics() {
        let c = BoundCurve {
            kind: BoundKind::Lower,
            name: BoundName::Mt,
            values: vec![Some(1.0), Some(0.5), None],
        };
        let (lo, up) = envelope(std::slice::from_ref(&c)).unwrap();
        assert_eq!(lo, vec![1.0, 0.5, 0.0]);
        assert_eq!(up, vec![1.0; 3]);
        let twice = envelope(&[c.clone(), c.clone()]).unwrap();
        assert_eq!(twice, (lo, up));
        assert!(envelope(&[]).is_err());
        let short = BoundCurve { values: vec![None], ..c.clone() };
        assert!(envelope(&[c, short]).is_err());
    }

    #[test]
    fn deep_ml_chain_crossing() {
        // W = 8 MHz: MT dominates first, then ML overtakes it
        let pattern = PotentialPattern::staggered(6, 8.0, Stagger::EvenPositive);
        let h = xy_chain(6, 3, -2.0, &pattern).unwrap();
        let sd = diagonalize(&h).unwrap();
        let psi = crate::hilbert::make_superposition(
            h.basis(),
            &[
                (C64::new(0.5, 0.0), "101010".parse().unwrap()),
                (C64::new(3f64.sqrt() / 2.0, 0.0), "010101".parse().unwrap()),
            ],
        )
        .unwrap();
        let s = spectral_stats(&sd, &psi).unwrap();
        let grid: Vec<f64> = (0..=200).map(|k| 0.1 * k as f64).collect();
        let [mt, ml, _] = standard_bound_curves(&s, &grid).unwrap();
        let first_ml_win = grid
            .iter()
            .enumerate()
            .find(|(i, _)| matches!((mt.values[*i], ml.values[*i]), (Some(a), Some(b)) if b > a) || (mt.values[*i].is_none() && ml.values[*i].is_some()))
            .map(|(_, t)| *t)
            .unwrap();
        assert!(first_ml_win > 1.0 && first_ml_win < 15.0, "{first_ml_win}");
        assert!(mt.values[1].unwrap() > ml.values[1].unwrap());
    }

    fn random_system(seed: u64, n: usize) -> (crate::spectral::SpectralData, QuantumState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            m[i][i] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in 0..i {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[i][j] = z;
                m[j][i] = z.conj();
            }
        }
        let basis = Arc::new(Basis::abstract_space(n).unwrap());
        let h = crate::hamiltonians::HermitianOperator::from_dense(basis.clone(), &m).unwrap();
        let amps = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        (diagonalize(&h).unwrap(), QuantumState::from_amplitudes(basis, amps).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sandwich_on_random_systems(seed in any::<u64>(), n in 2usize..=16) {
            let (sd, psi) = random_system(seed, n);
            let s = spectral_stats(&sd, &psi).unwrap();
            let m = sd.measure(&psi).unwrap();
            let grid: Vec<f64> = (0..400).map(|k| 0.05 * k as f64).collect();
            let series = evolve_overlap(&m, &grid, Execution::Sequential).unwrap();
            let alphas = default_alpha_grid();
            let moments: Vec<(f64, f64)> = alphas.iter().map(|&a| moment_alpha(&m, a).unwrap()).collect();
            let pd = generalized_phase_data(&series, &s, &alphas).unwrap();
            let mut curves: Vec<BoundCurve> = standard_bound_curves(&s, &grid).unwrap().into();
            for (lo, up) in generalized_bound_curves(&pd, &moments, Execution::Sequential).unwrap() {
                curves.push(lo);
                curves.push(up);
            }
            let (lo, up) = envelope(&curves).unwrap();
            for i in 0..grid.len() {
                prop_assert!(series.overlap[i] >= lo[i] - 1e-9, "lower at t={}", grid[i]);
                prop_assert!(series.overlap[i] <= up[i] + 1e-9, "upper at t={}", grid[i]);
            }
        }

        #[test]
        fn phase_data_is_exact(seed in any::<u64>(), n in 2usize..=8) {
            let (sd, psi) = random_system(seed, n);
            let s = spectral_stats(&sd, &psi).unwrap();
            let m = sd.measure(&psi).unwrap();
            let grid: Vec<f64> = (0..50).map(|k| 0.3 * k as f64).collect();
            let series = evolve_overlap(&m, &grid, Execution::Sequential).unwrap();
            let pd = generalized_phase_data(&series, &s, &[0.5, 2.0]).unwrap();
            prop_assert_eq!(pd.d_min[0][0], 1.0);
            prop_assert_eq!(pd.d_max[1][0], 1.0);
            for i in 0..grid.len() {
                let p = series.theta[i] + s.e_min * grid[i];
                prop_assert!((pd.d_min[1][i] - (p.cos() - 4.0 / PI * p.sin())).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn density_wave_lower_bound_is_one_at_start() {
        let h = xy_chain(4, 2, -2.0, &PotentialPattern::zeros(4)).unwrap();
        let sd = diagonalize(&h).unwrap();
        let psi = make_product_state(h.basis(), &"1010".parse().unwrap()).unwrap();
        let m = sd.measure(&psi).unwrap();
        let s = m.stats();
        let series = evolve_overlap(&m, &[0.0, 1.0], Execution::Sequential).unwrap();
        let alphas = default_alpha_grid();
        let moments: Vec<(f64, f64)> = alphas.iter().map(|&a| moment_alpha(&m, a).unwrap()).collect();
        let pd = generalized_phase_data(&series, &s, &alphas).unwrap();
        for (lo, _) in generalized_bound_curves(&pd, &moments, Execution::Parallel).unwrap() {
            assert_eq!(lo.values[0], Some(1.0));
        }
    }
}

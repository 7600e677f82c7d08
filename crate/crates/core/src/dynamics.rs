//! Exact time evolution in the eigenbasis: overlap series, evolved states,
//! Hamming-distance distributions and orthogonalization detection.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::hilbert::{hamming_distance, QuantumState};
use crate::par::{self, Execution};
use crate::rootfind::bisect;
use crate::spectral::{SpectralData, SpectralMeasure};

/// Default overlap threshold for orthogonalization detection.
pub const DEFAULT_ORTHOGONALIZATION_EPS: f64 = 1e-4;

/// Bisection tolerance for the detected crossing time (ns).
pub const DETECTION_TOL_NS: f64 = 1e-6;

/// F(t) = |⟨ψ(0)|ψ(t)⟩| and its principal phase θ(t) on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    pub t: Vec<f64>,
    pub overlap: Vec<f64>,
    pub theta: Vec<f64>,
}

impl OverlapSeries {
    pub fn from_amplitudes(t: Vec<f64>, amplitudes: &[C64]) -> Result<Self> {
        if t.len() != amplitudes.len() {
            return Err(QslError::LengthMismatch {
                expected: t.len(),
                found: amplitudes.len(),
            });
        }
        Ok(OverlapSeries {
            t,
            overlap: amplitudes.iter().map(|a| a.norm().min(1.0)).collect(),
            theta: amplitudes.iter().map(|a| a.arg()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Overlap series of a state whose spectral measure is `measure`.
pub fn evolve_overlap(measure: &SpectralMeasure, t_grid: &[f64], exec: Execution) -> Result<OverlapSeries> {
    if t_grid.is_empty() {
        return Err(QslError::EmptyInput("time grid"));
    }
    let amplitudes = par::map(exec, t_grid, |&t| measure.overlap(t));
    OverlapSeries::from_amplitudes(t_grid.to_vec(), &amplitudes)
}

/// ψ(t) = V e^{−iΛt} V† ψ0
pub fn evolve_state(sd: &SpectralData, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    let coefficients = sd.coefficients(psi0)?;
    Ok(evolve_coefficients(sd, &coefficients, t))
}

fn evolve_coefficients(sd: &SpectralData, coefficients: &[C64], t: f64) -> QuantumState {
    let phased: Vec<C64> = coefficients
        .iter()
        .zip(sd.eigenvalues())
        .map(|(c, &e)| c * C64::from_polar(1.0, -e * t))
        .collect();
    QuantumState::from_amplitudes(sd.basis().clone(), sd.synthesize(&phased))
        .expect("unitary evolution preserves the norm")
}

/// Π(d, t): probability of finding the evolved state at Hamming distance d
/// from the initial Fock state. Rows are times, columns d = 0..=d_max.
#[derive(Debug, Clone, PartialEq)]
pub struct HammingDistribution {
    pub t: Vec<f64>,
    pub d_max: usize,
    pub probabilities: Vec<Vec<f64>>,
}

impl HammingDistribution {
    /// Time average of Σ_{d > threshold} Π(d, t) over the grid points.
    pub fn mean_tail_weight(&self, threshold: usize) -> f64 {
        let total: f64 = self
            .probabilities
            .iter()
            .map(|row| row.iter().skip(threshold + 1).sum::<f64>())
            .sum();
        total / self.probabilities.len() as f64
    }
}

pub fn hamming_distribution(
    sd: &SpectralData,
    psi0: &QuantumState,
    t_grid: &[f64],
    exec: Execution,
) -> Result<HammingDistribution> {
    if t_grid.is_empty() {
        return Err(QslError::EmptyInput("time grid"));
    }
    let index = psi0.as_fock_index().ok_or(QslError::NotAProductState)?;
    let basis = sd.basis();
    let origin = basis.fock_state(index);
    let distances: Vec<usize> = (0..basis.dim())
        .map(|i| hamming_distance(&basis.fock_state(i), &origin))
        .collect::<Result<_>>()?;
    let d_max = basis.max_hamming_distance();
    let coefficients = sd.coefficients(psi0)?;
    let probabilities = par::map(exec, t_grid, |&t| {
        let psi = evolve_coefficients(sd, &coefficients, t);
        let mut row = vec![0.0; d_max + 1];
        for (a, &d) in psi.amplitudes().iter().zip(&distances) {
            row[d] += a.norm_sqr();
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        row
    });
    Ok(HammingDistribution {
        t: t_grid.to_vec(),
        d_max,
        probabilities,
    })
}

/// First time F drops to `eps`, refined by bisection between the
/// bracketing grid points using the exact overlap of `measure`.
pub fn detect_orthogonalization(
    measure: &SpectralMeasure,
    series: &OverlapSeries,
    eps: f64,
) -> Result<Option<f64>> {
    detect_orthogonalization_with(|t| measure.overlap(t).norm(), series, eps)
}

/// [`detect_orthogonalization`] with the overlap F(t) supplied directly.
pub fn detect_orthogonalization_with(
    overlap_at: impl Fn(f64) -> f64,
    series: &OverlapSeries,
    eps: f64,
) -> Result<Option<f64>> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(QslError::InvalidParameter(format!(
            "orthogonalization threshold must lie in (0, 0.1], got {eps}"
        )));
    }
    let Some(i) = series.overlap.iter().position(|&f| f <= eps) else {
        return Ok(None);
    };
    if i == 0 {
        return Ok(Some(series.t[0]));
    }
    let t = bisect(
        |t| Ok(overlap_at(t) - eps),
        series.t[i - 1],
        series.t[i],
        DETECTION_TOL_NS,
        "overlap − ε",
    )?;
    Ok(Some(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichViolation {
    pub t: f64,
    pub overlap: f64,
    pub bound: f64,
    /// Distance by which F leaves the band; positive.
    pub excess: f64,
    pub upper: bool,
}

/// Points where F leaves [lower − tol, upper + tol].
pub fn verify_sandwich(
    series: &OverlapSeries,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
) -> Result<Vec<SandwichViolation>> {
    let n = series.len();
    if lower.len() != n || upper.len() != n {
        return Err(QslError::GridMismatch(format!(
            "series has {n} points, envelopes have {} and {}",
            lower.len(),
            upper.len()
        )));
    }
    let mut out = Vec::new();
    for i in 0..n {
        let f = series.overlap[i];
        if f < lower[i] - tol {
            out.push(SandwichViolation {
                t: series.t[i],
                overlap: f,
                bound: lower[i],
                excess: lower[i] - f,
                upper: false,
            });
        } else if f > upper[i] + tol {
            out.push(SandwichViolation {
                t: series.t[i],
                overlap: f,
                bound: upper[i],
                excess: f - upper[i],
                upper: true,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{driven_qubit, lattice_2d, xy_chain, HermitianOperator, PotentialPattern};
    use crate::hilbert::{make_product_state, Basis};
    use crate::spectral::diagonalize;
    use crate::units::mhz_to_angular;
    use std::sync::Arc;

    fn plus(sd: &SpectralData) -> QuantumState {
        QuantumState::from_amplitudes(sd.basis().clone(), vec![C64::new(1.0, 0.0); 2]).unwrap()
    }

    fn grid(stop: f64, step: f64) -> Vec<f64> {
        let n = (stop / step).round() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }

    #[test]
    fn qubit_overlap_closed_form() {
        let sd = diagonalize(&driven_qubit(0.0, 12.5)).unwrap();
        let m = sd.measure(&plus(&sd)).unwrap();
        let ts = grid(250.0, 0.5);
        let s = evolve_overlap(&m, &ts, Execution::Parallel).unwrap();
        let w = mhz_to_angular(12.5);
        for (t, f) in ts.iter().zip(&s.overlap) {
            assert!((f - (w * t / 2.0).cos().abs()).abs() < 1e-12);
        }
        assert_eq!(s.overlap[0], 1.0);
        assert_eq!(s.theta[0], 0.0);
        let t = detect_orthogonalization(&m, &s, 1e-4).unwrap().unwrap();
        assert!((t - 40.0).abs() < 1e-2);
        let t3 = detect_orthogonalization(&m, &s, 1e-3).unwrap().unwrap();
        assert!(t3 < t);
    }

    #[test]
    fn qubit_flips_to_minus() {
        let sd = diagonalize(&driven_qubit(0.0, 12.5)).unwrap();
        let psi = evolve_state(&sd, &plus(&sd), 40.0).unwrap();
        let a = psi.amplitudes();
        let ratio = a[1] / a[0];
        assert!((ratio + 1.0).norm() < 1e-12);
    }

    #[test]
    fn no_orthogonalization() {
        let sd = diagonalize(&driven_qubit(2.5, 12.5)).unwrap();
        let m = sd.measure(&plus(&sd)).unwrap();
        let s = evolve_overlap(&m, &grid(250.0, 0.5), Execution::Sequential).unwrap();
        assert!(s.overlap.iter().cloned().fold(1.0, f64::min) > 0.1);
        assert_eq!(detect_orthogonalization(&m, &s, 1e-4).unwrap(), None);

        let eigen = QuantumState::from_amplitudes(sd.basis().clone(), sd.eigenvector(0)).unwrap();
        let m = sd.measure(&eigen).unwrap();
        let s = evolve_overlap(&m, &grid(250.0, 0.5), Execution::Sequential).unwrap();
        assert!(s.overlap.iter().all(|f| (f - 1.0).abs() < 1e-12));
        assert_eq!(detect_orthogonalization(&m, &s, 1e-3).unwrap(), None);
        assert!(detect_orthogonalization(&m, &s, 0.5).is_err());
        assert!(detect_orthogonalization(&m, &s, 0.0).is_err());
    }

    #[test]
    fn group_property_and_norm() {
        let h = xy_chain(8, 4, -2.0, &PotentialPattern::staggered(8, 1.8, Default::default())).unwrap();
        let sd = diagonalize(&h).unwrap();
        let psi = make_product_state(h.basis(), &"10101010".parse().unwrap()).unwrap();
        let zero = evolve_state(&sd, &psi, 0.0).unwrap();
        for (a, b) in zero.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let half = evolve_state(&sd, &evolve_state(&sd, &psi, 13.0).unwrap(), 13.0).unwrap();
        let full = evolve_state(&sd, &psi, 26.0).unwrap();
        for (a, b) in half.amplitudes().iter().zip(full.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
        let energy = |s: &QuantumState| {
            let mut hs = vec![C64::new(0.0, 0.0); h.dim()];
            h.apply(s.amplitudes(), &mut hs);
            s.amplitudes().iter().zip(&hs).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
        };
        let e0 = energy(&psi);
        for t in [5.0, 50.0, 250.0] {
            let s = evolve_state(&sd, &psi, t).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
            assert!((energy(&s) - e0).abs() < 1e-9 * h.max_abs());
            // F from ⟨ψ(t)|ψ0⟩ equals F from ⟨ψ0|ψ(t)⟩
            let m = sd.measure(&psi).unwrap();
            let direct = s.inner(&psi).unwrap().norm();
            assert!((direct - m.overlap(t).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn hamming_rows_normalized() {
        let h = lattice_2d(3, 3, 5, -2.0, 0.597, 0.0).unwrap();
        let sd = diagonalize(&h).unwrap();
        let psi = make_product_state(h.basis(), &"101010101".parse().unwrap()).unwrap();
        let ts = grid(300.0, 5.0);
        let dist = hamming_distribution(&sd, &psi, &ts, Execution::Parallel).unwrap();
        assert_eq!(dist.d_max, 8);
        assert_eq!(dist.probabilities[0][0], 1.0);
        assert!(dist.probabilities[0][1..].iter().all(|&p| p < 1e-20));
        for row in &dist.probabilities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            assert!(row.iter().all(|&p| p >= 0.0));
        }
        // odd distances are unreachable from a fixed particle number
        assert!(dist.probabilities.iter().all(|r| r.iter().skip(1).step_by(2).all(|&p| p < 1e-20)));
        let reached = (0..=8).step_by(2).all(|d| dist.probabilities.iter().any(|r| r[d] > 1e-3));
        assert!(reached);
    }

    #[test]
    fn hamming_needs_fock_state() {
        let sd = diagonalize(&driven_qubit(0.0, 12.5)).unwrap();
        let err = hamming_distribution(&sd, &plus(&sd), &[0.0], Execution::Sequential).unwrap_err();
        assert_eq!(err, QslError::NotAProductState);
    }

    #[test]
    fn sandwich_report() {
        let s = OverlapSeries {
            t: vec![0.0, 1.0, 2.0],
            overlap: vec![1.0, 0.5, 0.2],
            theta: vec![0.0; 3],
        };
        assert!(verify_sandwich(&s, &[1.0, 0.4, 0.0], &[1.0, 0.6, 1.0], 1e-9).unwrap().is_empty());
        let bad = OverlapSeries {
            overlap: vec![1.0, 0.7, 0.2],
            ..s.clone()
        };
        let v = verify_sandwich(&bad, &[1.0, 0.4, 0.0], &[1.0, 0.6, 1.0], 1e-9).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].upper && (v[0].excess - 0.1).abs() < 1e-12);
        assert!(verify_sandwich(&s, &[0.0], &[1.0], 1e-9).is_err());
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let n = 12;
        let basis = Arc::new(Basis::abstract_space(n).unwrap());
        let m: Vec<Vec<C64>> = (0..n)
            .map(|i| (0..n).map(|j| C64::new(((i * 7 + j * 3) % 5) as f64 + if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        let m: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| m[i][j] + m[j][i]).collect()).collect();
        let h = HermitianOperator::from_dense(basis.clone(), &m).unwrap();
        let sd = diagonalize(&h).unwrap();
        let psi = QuantumState::from_amplitudes(basis, (0..n).map(|k| C64::new(1.0, k as f64)).collect()).unwrap();
        let meas = sd.measure(&psi).unwrap();
        let ts = grid(100.0, 0.25);
        let a = evolve_overlap(&meas, &ts, Execution::Sequential).unwrap();
        let b = evolve_overlap(&meas, &ts, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

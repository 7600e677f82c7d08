//! Eigendecomposition, energy statistics of a state, fractional moments,
//! speed-limit regime classification and phase-diagram geometry.

mod krylov;
mod tridiagonal;

use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::hamiltonians::{HermitianOperator, HERMITIAN_TOL};
use crate::hilbert::{Basis, QuantumState};
use crate::par::{self, Execution};

pub use krylov::{extreme_eigenvalues, krylov_measure, KrylovMeasure, KrylovOptions};
pub use tridiagonal::{tridiagonal_eigen, TridiagonalEigen};

/// Largest dimension handled by dense diagonalization; larger operators
/// go through Lanczos.
pub const DENSE_DIMENSION_LIMIT: usize = 4096;

/// Relative tolerance for regime boundaries.
pub const REGIME_REL_TOL: f64 = 1e-9;

/// Saturation tolerance of the Bhatia–Davis gap, relative to the squared
/// spectral width.
pub const BLOCKAGE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
enum Eigenvectors {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

/// Eigenvalues (ascending, rad/ns) and orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    basis: Arc<Basis>,
    eigenvalues: Vec<f64>,
    eigenvectors: Eigenvectors,
}

/// Full dense eigendecomposition. Real symmetric operators take the real
/// path.
pub fn diagonalize(op: &HermitianOperator) -> Result<SpectralData> {
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL * op.max_abs().max(f64::MIN_POSITIVE) {
        return Err(QslError::NotHermitian { deviation });
    }
    let (eigenvalues, eigenvectors) = if op.is_real() {
        let evd = op
            .to_dense_real()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| QslError::EigenFailure)?;
        let s = evd.S().column_vector();
        let values: Vec<f64> = (0..op.dim()).map(|i| s[i]).collect();
        (values, Eigenvectors::Real(evd.U().to_owned()))
    } else {
        let evd = op
            .to_dense()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| QslError::EigenFailure)?;
        let s = evd.S().column_vector();
        let values: Vec<f64> = (0..op.dim()).map(|i| s[i].re).collect();
        (values, Eigenvectors::Complex(evd.U().to_owned()))
    };
    Ok(SpectralData {
        basis: Arc::clone(op.basis()),
        eigenvalues,
        eigenvectors,
    })
}

impl SpectralData {
    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn e_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn e_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Component `i` of eigenvector `k`.
    pub fn vector_entry(&self, i: usize, k: usize) -> C64 {
        match &self.eigenvectors {
            Eigenvectors::Real(v) => C64::new(v[(i, k)], 0.0),
            Eigenvectors::Complex(v) => v[(i, k)],
        }
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.vector_entry(i, k)).collect()
    }

    /// Expansion coefficients cₙ = ⟨Eₙ|ψ⟩.
    pub fn coefficients(&self, psi: &QuantumState) -> Result<Vec<C64>> {
        if !self.basis.same_space(psi.basis()) {
            return Err(QslError::BasisMismatch);
        }
        let a = psi.amplitudes();
        let c = match &self.eigenvectors {
            Eigenvectors::Real(v) => (0..self.dim())
                .map(|k| {
                    v.col_as_slice(k)
                        .iter()
                        .zip(a)
                        .map(|(&x, &y)| y * x)
                        .sum()
                })
                .collect(),
            Eigenvectors::Complex(v) => (0..self.dim())
                .map(|k| {
                    v.col_as_slice(k)
                        .iter()
                        .zip(a)
                        .map(|(x, &y)| x.conj() * y)
                        .sum()
                })
                .collect(),
        };
        Ok(c)
    }

    /// Σₙ cₙ |Eₙ⟩ in the original basis.
    pub fn synthesize(&self, coefficients: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); n];
        match &self.eigenvectors {
            Eigenvectors::Real(v) => {
                for (k, &ck) in coefficients.iter().enumerate() {
                    for (o, &x) in out.iter_mut().zip(v.col_as_slice(k)) {
                        *o += ck * x;
                    }
                }
            }
            Eigenvectors::Complex(v) => {
                for (k, &ck) in coefficients.iter().enumerate() {
                    for (o, &x) in out.iter_mut().zip(v.col_as_slice(k)) {
                        *o += ck * x;
                    }
                }
            }
        }
        out
    }

    pub fn measure(&self, psi: &QuantumState) -> Result<SpectralMeasure> {
        let weights = self.coefficients(psi)?.iter().map(|c| c.norm_sqr()).collect();
        SpectralMeasure::new(self.eigenvalues.clone(), weights, self.e_min(), self.e_max())
    }

    /// max |H − VΛV†|.
    pub fn reconstruction_error(&self, op: &HermitianOperator) -> f64 {
        let n = self.dim();
        let dense = op.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vector_entry(i, k) * self.eigenvalues[k] * self.vector_entry(j, k).conj();
                }
                worst = worst.max((acc - dense[(i, j)]).norm());
            }
        }
        worst
    }

    /// max |V†V − I|.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: C64 = (0..n)
                    .map(|i| self.vector_entry(i, a).conj() * self.vector_entry(i, b))
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// How a pure state's weight is distributed over the spectrum: energies
/// Eₙ with weights |cₙ|², plus the extremes of the full spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    energies: Vec<f64>,
    weights: Vec<f64>,
    e_min: f64,
    e_max: f64,
}

impl SpectralMeasure {
    /// Weights are renormalized to sum to one.
    pub fn new(energies: Vec<f64>, weights: Vec<f64>, e_min: f64, e_max: f64) -> Result<Self> {
        if energies.len() != weights.len() {
            return Err(QslError::LengthMismatch {
                expected: energies.len(),
                found: weights.len(),
            });
        }
        if energies.is_empty() {
            return Err(QslError::EmptyInput("spectral measure"));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(QslError::ZeroNorm);
        }
        let weights = weights.iter().map(|w| w.max(0.0) / total).collect();
        let lo = energies.iter().copied().fold(e_min, f64::min);
        let hi = energies.iter().copied().fold(e_max, f64::max);
        Ok(SpectralMeasure {
            energies,
            weights,
            e_min: lo,
            e_max: hi,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn stats(&self) -> SpectralStats {
        let mean = self
            .energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * e)
            .sum::<f64>()
            .clamp(self.e_min, self.e_max);
        let variance: f64 = self
            .energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (e - mean) * (e - mean))
            .sum();
        SpectralStats {
            mean,
            delta_e: variance.sqrt(),
            e_min: self.e_min,
            e_max: self.e_max,
        }
    }

    /// ⟨(H − E_min)^α⟩ and ⟨(E_max − H)^α⟩, without the 1/α root.
    pub fn raw_moments(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(QslError::InvalidAlpha(alpha));
        }
        let mut below = 0.0;
        let mut above = 0.0;
        for (&e, &w) in self.energies.iter().zip(&self.weights) {
            below += w * (e - self.e_min).max(0.0).powf(alpha);
            above += w * (self.e_max - e).max(0.0).powf(alpha);
        }
        Ok((below, above))
    }

    /// ⟨ψ|e^{−iHt}|ψ⟩ = Σₙ wₙ e^{−iEₙt}.
    pub fn overlap(&self, t: f64) -> C64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| {
                let (s, c) = (e * t).sin_cos();
                C64::new(w * c, -w * s)
            })
            .sum()
    }
}

/// Mean energy, spread and spectral extremes of a state (rad/ns).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralStats {
    pub mean: f64,
    pub delta_e: f64,
    pub e_min: f64,
    pub e_max: f64,
}

impl SpectralStats {
    /// E − E_min
    pub fn gap_below(&self) -> f64 {
        self.mean - self.e_min
    }

    /// E_max − E
    pub fn gap_above(&self) -> f64 {
        self.e_max - self.mean
    }

    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    /// (E_max − E)(E − E_min) − ΔE², from the first two moments.
    pub fn bhatia_davis_slack(&self) -> f64 {
        self.gap_above() * self.gap_below() - self.delta_e * self.delta_e
    }
}

pub fn spectral_stats(sd: &SpectralData, psi: &QuantumState) -> Result<SpectralStats> {
    Ok(sd.measure(psi)?.stats())
}

/// Fractional moments (E_α, E*_α) = (⟨(H−E_min)^α⟩^{1/α}, ⟨(E_max−H)^α⟩^{1/α}).
pub fn moment_alpha(measure: &SpectralMeasure, alpha: f64) -> Result<(f64, f64)> {
    let (below, above) = measure.raw_moments(alpha)?;
    Ok((below.powf(1.0 / alpha), above.powf(1.0 / alpha)))
}

/// [`moment_alpha`] over a grid of exponents.
pub fn moments_over_grid(
    measure: &SpectralMeasure,
    alphas: &[f64],
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    par::map(exec, alphas, |&a| moment_alpha(measure, a))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeLabel {
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "ML")]
    Ml,
    #[serde(rename = "MLstar")]
    MlStar,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Mt => "MT",
            RegimeLabel::Ml => "ML",
            RegimeLabel::MlStar => "MLstar",
        }
    }
}

/// Which bound limits the orthogonalization time, with flags for
/// quantities that tie within [`REGIME_REL_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub label: RegimeLabel,
    /// ΔE ≈ E − E_min
    pub mt_ml_boundary: bool,
    /// ΔE ≈ E_max − E
    pub mt_mlstar_boundary: bool,
    /// E ≈ (E_min + E_max)/2
    pub midpoint_boundary: bool,
}

impl Regime {
    pub fn on_boundary(&self) -> bool {
        self.mt_ml_boundary || self.mt_mlstar_boundary || self.midpoint_boundary
    }
}

fn check_width(stats: &SpectralStats) -> Result<f64> {
    let width = stats.width();
    let scale = stats.e_min.abs().max(stats.e_max.abs());
    if width.is_nan() || width <= 1e-14 * scale || width == 0.0 {
        return Err(QslError::DegenerateSpectrum(stats.e_min));
    }
    Ok(width)
}

pub fn classify_regime(stats: &SpectralStats) -> Result<Regime> {
    let width = check_width(stats)?;
    let tol = REGIME_REL_TOL * width;
    let (below, above, spread) = (stats.gap_below(), stats.gap_above(), stats.delta_e);
    let label = if spread < below.min(above) {
        RegimeLabel::Mt
    } else if below < above {
        RegimeLabel::Ml
    } else {
        RegimeLabel::MlStar
    };
    Ok(Regime {
        label,
        mt_ml_boundary: (spread - below).abs() < tol,
        mt_mlstar_boundary: (spread - above).abs() < tol,
        midpoint_boundary: (below - above).abs() < tol,
    })
}

/// Normalized phase-diagram coordinates x = (E−E_min)/W, y = ΔE/W with
/// W = E_max − E_min.
pub fn phase_point(stats: &SpectralStats) -> Result<(f64, f64)> {
    let width = check_width(stats)?;
    Ok((
        (stats.gap_below() / width).clamp(0.0, 1.0),
        stats.delta_e / width,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockageCheck {
    /// D = (E_max − E)(E − E_min) − ΔE²
    pub gap: f64,
    pub saturates: bool,
}

/// Bhatia–Davis gap evaluated termwise as Σₙ wₙ (Eₙ − E_min)(E_max − Eₙ),
/// which equals D exactly and is free of cancellation.
pub fn mt_blockage_check(measure: &SpectralMeasure) -> BlockageCheck {
    let (lo, hi) = (measure.e_min(), measure.e_max());
    let gap: f64 = measure
        .energies()
        .iter()
        .zip(measure.weights())
        .map(|(&e, &w)| w * (e - lo).max(0.0) * (hi - e).max(0.0))
        .sum();
    let width = hi - lo;
    BlockageCheck {
        gap,
        saturates: gap <= BLOCKAGE_REL_TOL * width * width,
    }
}

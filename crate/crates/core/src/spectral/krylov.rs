//! Lanczos route to the spectral measure of a state when the Hilbert space
//! is too large for a dense eigendecomposition.
//!
//! Running Lanczos from ψ with full reorthogonalization until the Krylov
//! space is exhausted gives a tridiagonal T whose eigenvalues are exactly
//! the energies ψ has support on, and whose first eigenvector components
//! squared are the weights. Complex operators are handled through the
//! real form [[Re H, −Im H], [Im H, Re H]], which has the same measure.

use faer::{ColRef, Mat};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tridiagonal::{tridiagonal_eigen, TridiagonalEigen};
use super::SpectralMeasure;
use crate::error::{QslError, Result};
use crate::hamiltonians::HermitianOperator;
use crate::hilbert::QuantumState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Upper bound on the Krylov dimension of the run from ψ.
    pub max_steps: usize,
    /// Upper bound on the Krylov dimension of the run for the extremes.
    pub extreme_max_steps: usize,
    /// Breakdown threshold for βⱼ, relative to the norm estimate of H.
    pub breakdown_tol: f64,
    /// Ritz residual threshold for the spectral extremes, relative to the
    /// norm estimate of H.
    pub extreme_tol: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_steps: 6000,
            extreme_max_steps: 3000,
            breakdown_tol: 1e-10,
            extreme_tol: 1e-10,
            seed: 0x5EED,
        }
    }
}

/// A spectral measure obtained by Lanczos, with the Krylov dimension used
/// and whether the Krylov space was exhausted (making the measure exact).
#[derive(Debug, Clone)]
pub struct KrylovMeasure {
    pub measure: SpectralMeasure,
    pub steps: usize,
    pub exhausted: bool,
}

struct RealForm<'a> {
    op: &'a HermitianOperator,
    complex: bool,
}

impl<'a> RealForm<'a> {
    fn new(op: &'a HermitianOperator) -> Self {
        RealForm {
            op,
            complex: !op.is_real(),
        }
    }

    fn dim(&self) -> usize {
        if self.complex {
            2 * self.op.dim()
        } else {
            self.op.dim()
        }
    }

    fn embed(&self, amplitudes: &[C64]) -> Vec<f64> {
        if self.complex {
            amplitudes
                .iter()
                .map(|a| a.re)
                .chain(amplitudes.iter().map(|a| a.im))
                .collect()
        } else {
            amplitudes.iter().map(|a| a.re).collect()
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if !self.complex {
            self.op.apply_real(x, y);
            return;
        }
        let n = self.op.dim();
        let xc: Vec<C64> = (0..n).map(|i| C64::new(x[i], x[n + i])).collect();
        let mut yc = vec![C64::new(0.0, 0.0); n];
        self.op.apply(&xc, &mut yc);
        for i in 0..n {
            y[i] = yc[i].re;
            y[n + i] = yc[i].im;
        }
    }

    /// Gershgorin bound on ‖H‖.
    fn norm_estimate(&self) -> f64 {
        let mut rows = vec![0.0; self.op.dim()];
        for (r, _, v) in self.op.entries() {
            rows[r] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

struct Lanczos {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    exhausted: bool,
    last_beta: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `check` is called every few steps with the current tridiagonal matrix
/// and the trailing β; returning true stops the iteration.
fn lanczos(
    form: &RealForm,
    start: &[f64],
    max_steps: usize,
    breakdown: f64,
    mut check: impl FnMut(&[f64], &[f64], f64) -> bool,
) -> Lanczos {
    let n = form.dim();
    let cap = max_steps.min(n).max(1);
    let mut q = Mat::<f64>::zeros(n, cap);
    let norm = dot(start, start).sqrt();
    for (dst, &x) in q.col_as_slice_mut(0).iter_mut().zip(start) {
        *dst = x / norm;
    }
    let mut alpha = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![0.0; n];
    let mut exhausted = false;
    let mut last_beta = 0.0;
    for j in 0..cap {
        form.apply(q.col_as_slice(j), &mut w);
        let a = dot(q.col_as_slice(j), &w);
        alpha.push(a);
        for (wi, &qi) in w.iter_mut().zip(q.col_as_slice(j)) {
            *wi -= a * qi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, &qi) in w.iter_mut().zip(q.col_as_slice(j - 1)) {
                *wi -= b * qi;
            }
        }
        let basis = q.as_ref().subcols(0, j + 1);
        for _ in 0..2 {
            let h = basis.transpose() * ColRef::from_slice(&w);
            let correction = basis * &h;
            for (i, wi) in w.iter_mut().enumerate() {
                *wi -= correction[i];
            }
        }
        let b = dot(&w, &w).sqrt();
        last_beta = b;
        if b < breakdown {
            exhausted = true;
            break;
        }
        if j + 1 == cap {
            exhausted = cap == n;
            break;
        }
        beta.push(b);
        for (dst, &x) in q.col_as_slice_mut(j + 1).iter_mut().zip(&w) {
            *dst = x / b;
        }
        if (j + 1) % 10 == 0 && check(&alpha, &beta, b) {
            break;
        }
    }
    beta.truncate(alpha.len() - 1);
    Lanczos {
        alpha,
        beta,
        exhausted,
        last_beta,
    }
}

fn ritz_extremes(te: &TridiagonalEigen, trailing_beta: f64) -> (f64, f64, f64, f64) {
    let k = te.values.len() - 1;
    (
        te.values[0],
        te.values[k],
        (trailing_beta * te.last[0]).abs(),
        (trailing_beta * te.last[k]).abs(),
    )
}

/// Smallest and largest eigenvalues by Lanczos from a seeded random start.
pub fn extreme_eigenvalues(op: &HermitianOperator, opts: &KrylovOptions) -> Result<(f64, f64)> {
    let form = RealForm::new(op);
    let scale = form.norm_estimate().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..form.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let tol = opts.extreme_tol * scale;
    let run = lanczos(&form, &start, opts.extreme_max_steps, opts.breakdown_tol * scale, |a, b, next| {
        match tridiagonal_eigen(a, &b[..a.len() - 1]) {
            Ok(te) => {
                let (_, _, r_lo, r_hi) = ritz_extremes(&te, next);
                r_lo < tol && r_hi < tol
            }
            Err(_) => false,
        }
    });
    let te = tridiagonal_eigen(&run.alpha, &run.beta)?;
    let (lo, hi, r_lo, r_hi) = ritz_extremes(&te, run.last_beta);
    if !run.exhausted && (r_lo >= tol || r_hi >= tol) {
        return Err(QslError::EigenFailure);
    }
    Ok((lo, hi))
}

/// Spectral measure of `psi` under `op`, with the global spectral extremes.
pub fn krylov_measure(
    op: &HermitianOperator,
    psi: &QuantumState,
    opts: &KrylovOptions,
) -> Result<KrylovMeasure> {
    if !op.basis().same_space(psi.basis()) {
        return Err(QslError::BasisMismatch);
    }
    let form = RealForm::new(op);
    let scale = form.norm_estimate().max(f64::MIN_POSITIVE);
    let start = form.embed(psi.amplitudes());
    let run = lanczos(&form, &start, opts.max_steps, opts.breakdown_tol * scale, |_, _, _| false);
    let te = tridiagonal_eigen(&run.alpha, &run.beta)?;
    let weights = te.first.iter().map(|z| z * z).collect();
    let (e_min, e_max) = extreme_eigenvalues(op, opts)?;
    Ok(KrylovMeasure {
        measure: SpectralMeasure::new(te.values, weights, e_min, e_max)?,
        steps: run.alpha.len(),
        exhausted: run.exhausted,
    })
}

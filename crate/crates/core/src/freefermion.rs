//! Free-fermion treatment of the open XY chain.
//!
//! Under the Jordan–Wigner map the chain becomes noninteracting spinless
//! fermions with a tridiagonal single-particle matrix. Product states map
//! to Slater determinants (creation operators in ascending site order), so
//! many-body amplitudes are determinants of L×L propagator submatrices and
//! the hardcore-boson one-body density matrix follows from determinants of
//! bordered (N+1)×(N+1) matrices.

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bounds::orthogonalization_times;
use crate::error::{QslError, Result};
use crate::hamiltonians::{grid_bonds, hopping_hamiltonian, HermitianOperator, PotentialPattern, Stagger};
use crate::hilbert::{Basis, FockState, DEFAULT_DIMENSION_CAP};
use crate::par::{self, Execution};
use crate::rootfind::bisect;
use crate::spectral::{phase_point, SpectralStats};
use crate::units::{angular_to_mhz, mhz_to_angular};

/// Tolerance used when checking that a density matrix is Hermitian.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;

/// Bisection tolerance for the crossover potential (MHz).
pub const CROSSOVER_TOL_MHZ: f64 = 1e-3;

/// L×L single-particle matrix of the chain (rad/ns) with its
/// eigendecomposition.
#[derive(Debug, Clone)]
pub struct SingleParticleHamiltonian {
    matrix: Mat<f64>,
    energies: Vec<f64>,
    modes: Mat<f64>,
}

pub fn single_particle_hamiltonian(
    length: usize,
    j1_mhz: f64,
    pattern: &PotentialPattern,
) -> Result<SingleParticleHamiltonian> {
    if length == 0 {
        return Err(QslError::EmptyInput("chain"));
    }
    if pattern.len() != length {
        return Err(QslError::LengthMismatch {
            expected: length,
            found: pattern.len(),
        });
    }
    let j = mhz_to_angular(j1_mhz);
    let w = pattern.values();
    let matrix = Mat::from_fn(length, length, |a, b| {
        if a == b {
            w[a]
        } else if a.abs_diff(b) == 1 {
            j
        } else {
            0.0
        }
    });
    let evd = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| QslError::EigenFailure)?;
    let s = evd.S().column_vector();
    Ok(SingleParticleHamiltonian {
        energies: (0..length).map(|k| s[k]).collect(),
        modes: evd.U().to_owned(),
        matrix,
    })
}

impl SingleParticleHamiltonian {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    /// Single-particle energies, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// U(t) = exp(−i h t)
    pub fn propagator(&self, t: f64) -> Propagator {
        let n = self.len();
        let phases: Vec<C64> = self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
        let v = &self.modes;
        let u = Mat::from_fn(n, n, |a, b| {
            (0..n).map(|k| phases[k] * (v[(a, k)] * v[(b, k)])).sum()
        });
        Propagator { u }
    }

    /// Many-body ground and top energies with `num_particles` fermions.
    pub fn extremes(&self, num_particles: usize) -> Result<(f64, f64)> {
        if num_particles > self.len() {
            return Err(QslError::InvalidSector {
                num_sites: self.len(),
                num_excitations: num_particles,
            });
        }
        let lo = self.energies[..num_particles].iter().sum();
        let hi = self.energies[self.len() - num_particles..].iter().sum();
        Ok((lo, hi))
    }

    /// Energy statistics of the product state with the given occupied
    /// sites: E = Σ hᵢᵢ, ΔE² = Σ_{i occupied, j empty} hᵢⱼ².
    pub fn product_state_stats(&self, occupied: &[usize]) -> Result<SpectralStats> {
        let n = self.len();
        let mut mask = vec![false; n];
        for &i in occupied {
            if i >= n || mask[i] {
                return Err(QslError::InvalidParameter(format!("bad occupied site {i}")));
            }
            mask[i] = true;
        }
        let mean = occupied.iter().map(|&i| self.matrix[(i, i)]).sum();
        let mut variance = 0.0;
        for &i in occupied {
            for j in (0..n).filter(|&j| !mask[j]) {
                variance += self.matrix[(i, j)].powi(2);
            }
        }
        let (e_min, e_max) = self.extremes(occupied.len())?;
        Ok(SpectralStats {
            mean,
            delta_e: variance.sqrt(),
            e_min,
            e_max,
        })
    }
}

/// Single-particle propagator exp(−i h t).
#[derive(Debug, Clone)]
pub struct Propagator {
    u: Mat<C64>,
}

impl Propagator {
    pub fn matrix(&self) -> &Mat<C64> {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.u.nrows() == 0
    }

    /// Product of two propagators, U(t1)U(t2) = U(t1 + t2).
    pub fn compose(&self, other: &Propagator) -> Propagator {
        Propagator { u: &self.u * &other.u }
    }

    /// max |U†U − I|
    pub fn unitarity_error(&self) -> f64 {
        let p = self.u.adjoint() * &self.u;
        let n = self.len();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((p[(a, b)] - target).norm());
            }
        }
        worst
    }
}

/// ⟨s_row| e^{−iHt} |s_col⟩ for product states given by their occupied
/// sites: det U[occ_row, occ_col]. Unequal particle numbers give 0.
pub fn fock_overlap_amplitude(u: &Propagator, occ_row: &[usize], occ_col: &[usize]) -> C64 {
    if occ_row.len() != occ_col.len() {
        return C64::new(0.0, 0.0);
    }
    if occ_row.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let mut rows = occ_row.to_vec();
    let mut cols = occ_col.to_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    let m = &u.u;
    Mat::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])]).determinant()
}

/// A superposition of product states given by occupied-site lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CatState {
    pub components: Vec<(C64, Vec<usize>)>,
}

impl CatState {
    pub fn new(components: Vec<(C64, Vec<usize>)>) -> Result<Self> {
        let first = components.first().ok_or(QslError::EmptyInput("cat components"))?;
        let n = first.1.len();
        if components.iter().any(|(_, occ)| occ.len() != n) {
            return Err(QslError::InvalidParameter(
                "cat components must share the particle number".into(),
            ));
        }
        let norm: f64 = components.iter().map(|(a, _)| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QslError::ZeroNorm);
        }
        Ok(CatState {
            components: components.into_iter().map(|(a, occ)| (a / norm, occ)).collect(),
        })
    }

    pub fn from_fock(terms: &[(C64, FockState)]) -> Result<Self> {
        Self::new(terms.iter().map(|(a, s)| (*a, s.occupied_sites())).collect())
    }
}

/// ⟨ψ|e^{−iHt}|ψ⟩ = Σᵢⱼ āᵢ aⱼ ⟨sᵢ|e^{−iHt}|sⱼ⟩
pub fn cat_overlap(u: &Propagator, cat: &CatState) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for (ai, occ_i) in &cat.components {
        for (aj, occ_j) in &cat.components {
            total += ai.conj() * aj * fock_overlap_amplitude(u, occ_i, occ_j);
        }
    }
    total
}

/// Overlap amplitudes of `cat` over a time grid.
pub fn cat_overlap_series(
    sph: &SingleParticleHamiltonian,
    cat: &CatState,
    t_grid: &[f64],
    exec: Execution,
) -> Vec<C64> {
    par::map(exec, t_grid, |&t| cat_overlap(&sph.propagator(t), cat))
}

/// Hardcore-boson one-body density matrix ρ_mn = ⟨b†_m b_n⟩ of the evolved
/// product state with initially occupied sites `occ0`.
pub fn hcb_density_matrix(u: &Propagator, occ0: &[usize]) -> Result<Mat<C64>> {
    let l = u.len();
    let mut occ = occ0.to_vec();
    occ.sort_unstable();
    occ.dedup();
    if occ.len() != occ0.len() || occ.iter().any(|&i| i >= l) {
        return Err(QslError::NotAProductState);
    }
    let n = occ.len();
    // Slater determinant P (L×N). The string-dressed, bordered matrices
    // P_j = [e_j, D_j P] with D_j = diag(−1 for rows < j) have Gram blocks
    // (D_i P)†(D_j P) = P†P − 2 Σ_{min(i,j) ≤ a < max(i,j)} p_a† p_a,
    // which prefix sums of the row outer products make O(N²) each.
    let p = Mat::from_fn(l, n, |a, k| u.u[(a, occ[k])]);
    let mut prefix: Vec<Mat<C64>> = Vec::with_capacity(l + 1);
    prefix.push(Mat::zeros(n, n));
    for a in 0..l {
        let prev = &prefix[a];
        let next = Mat::from_fn(n, n, |k, q| prev[(k, q)] + p[(a, k)].conj() * p[(a, q)]);
        prefix.push(next);
    }
    let gram = &prefix[l];
    let sign = |row: usize, j: usize| if row < j { -1.0 } else { 1.0 };
    // G_ij = ⟨b_i b†_j⟩ = det[(P_i)† P_j]
    let mut g = Mat::<C64>::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let (lo, hi) = (&prefix[i.min(j)], &prefix[i.max(j)]);
            let m = Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
                (0, 0) => C64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
                (0, c) => sign(i, j) * p[(i, c - 1)],
                (r, 0) => sign(j, i) * p[(j, r - 1)].conj(),
                (r, c) => gram[(r - 1, c - 1)] - 2.0 * (hi[(r - 1, c - 1)] - lo[(r - 1, c - 1)]),
            });
            let value = m.determinant();
            g[(i, j)] = value;
            g[(j, i)] = value.conj();
        }
    }
    Ok(Mat::from_fn(l, l, |m, k| {
        if m == k {
            C64::new(1.0 - g[(m, m)].re, 0.0)
        } else {
            g[(k, m)]
        }
    }))
}

/// n_k = (1/L) Σ_mn e^{ik(m−n)} ρ_mn for k = 2πj/L, j = 0..L−1.
pub fn momentum_distribution(rho: &Mat<C64>) -> Result<Vec<f64>> {
    let l = rho.nrows();
    if l == 0 || rho.ncols() != l {
        return Err(QslError::InvalidParameter("density matrix must be square and nonempty".into()));
    }
    let scale = (0..l).map(|i| rho[(i, i)].norm()).fold(1.0, f64::max);
    for a in 0..l {
        for b in a..l {
            let dev = (rho[(a, b)] - rho[(b, a)].conj()).norm();
            if dev > DENSITY_HERMITIAN_TOL * scale {
                return Err(QslError::NotHermitian { deviation: dev });
            }
        }
    }
    Ok((0..l)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / l as f64;
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..l {
                for n in 0..l {
                    acc += C64::from_polar(1.0, k * (m as f64 - n as f64)) * rho[(m, n)];
                }
            }
            acc.re / l as f64
        })
        .collect())
}

/// Geometries with a closed-form ΔE for the row-major density wave |1010…⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case")]
pub enum Geometry {
    Chain { length: usize },
    Grid { nx: usize, ny: usize },
}

impl Geometry {
    pub fn num_sites(&self) -> usize {
        match *self {
            Geometry::Chain { length } => length,
            Geometry::Grid { nx, ny } => nx * ny,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Geometry::Chain { length } => (length, 1),
            Geometry::Grid { nx, ny } => (nx, ny),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Chain { .. } => "chain",
            Geometry::Grid { .. } => "grid",
        }
    }

    /// Sites occupied by the row-major density wave (even indices).
    pub fn density_wave(&self) -> Vec<usize> {
        (0..self.num_sites()).step_by(2).collect()
    }
}

/// ΔE (rad/ns) of the row-major density wave: |J1|√(L−1) for a chain,
/// 2|J1|√(n(2n+1)) for a (2n+1)×(2n+1) grid and
/// √(2n(2n−1)J1² + 2(2n−1)²J2²) for a 2n×2n grid.
pub fn analytic_delta_e(geometry: Geometry, j1_mhz: f64, j2_mhz: f64) -> Result<f64> {
    let (j1, j2) = (mhz_to_angular(j1_mhz), mhz_to_angular(j2_mhz));
    match geometry {
        Geometry::Chain { length } if length >= 2 => Ok(j1.abs() * ((length - 1) as f64).sqrt()),
        Geometry::Grid { nx, ny } if nx == ny && nx >= 2 => {
            if nx % 2 == 1 {
                let n = ((nx - 1) / 2) as f64;
                Ok(2.0 * j1.abs() * (n * (2.0 * n + 1.0)).sqrt())
            } else {
                let n = (nx / 2) as f64;
                let m = 2.0 * n - 1.0;
                Ok((2.0 * n * m * j1 * j1 + 2.0 * m * m * j2 * j2).sqrt())
            }
        }
        other => Err(QslError::UnsupportedGeometry(format!("{other:?}"))),
    }
}

/// Root of t_MT(W) − max(t_ML(W), t_ML*(W)) on [w_lo, w_hi] (MHz): the
/// potential at which the state leaves the MT-limited regime.
pub fn crossover_w(
    mut stats_at: impl FnMut(f64) -> Result<SpectralStats>,
    w_lo: f64,
    w_hi: f64,
) -> Result<f64> {
    bisect(
        |w| {
            let times = orthogonalization_times(&stats_at(w)?);
            Ok(times.t_mt - times.t_ml.max(times.t_mlstar))
        },
        w_lo,
        w_hi,
        CROSSOVER_TOL_MHZ,
        "t_MT − max(t_ML, t_ML*)",
    )
}

/// One row of the system-size scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub geometry: Geometry,
    pub delta_e_analytic_mhz: f64,
    pub delta_e_numeric_mhz: f64,
    pub w_star_mhz: f64,
    /// Phase-diagram coordinates at W = W*.
    pub phase_x: f64,
    pub phase_y: f64,
}

/// Energy statistics of the row-major density wave under the row-major
/// staggered potential (+W on even sites). Chains use the free-fermion
/// path; grids use the many-body operator with Lanczos extremes.
pub fn density_wave_stats(geometry: Geometry, j1_mhz: f64, j2_mhz: f64, w_mhz: f64) -> Result<SpectralStats> {
    let n_sites = geometry.num_sites();
    let pattern = PotentialPattern::staggered(n_sites, w_mhz, Stagger::EvenPositive);
    let occupied = geometry.density_wave();
    match geometry {
        Geometry::Chain { length } => {
            single_particle_hamiltonian(length, j1_mhz, &pattern)?.product_state_stats(&occupied)
        }
        Geometry::Grid { nx, ny } => {
            let op = grid_operator(nx, ny, occupied.len(), j1_mhz, j2_mhz, &pattern)?;
            let state = FockState::from_sites(n_sites, &occupied)?;
            operator_product_stats(&op, &state)
        }
    }
}

fn grid_operator(
    nx: usize,
    ny: usize,
    num_excitations: usize,
    j1_mhz: f64,
    j2_mhz: f64,
    pattern: &PotentialPattern,
) -> Result<HermitianOperator> {
    let basis = std::sync::Arc::new(Basis::sector(nx * ny, num_excitations)?);
    let bonds = grid_bonds(nx, ny, mhz_to_angular(j1_mhz), mhz_to_angular(j2_mhz));
    hopping_hamiltonian(basis, &bonds, pattern)
}

/// Mean and spread of a Fock state from ⟨s|H|s⟩ and ‖H|s⟩‖², extremes
/// from dense diagonalization or Lanczos depending on the dimension.
pub fn operator_product_stats(op: &HermitianOperator, state: &FockState) -> Result<SpectralStats> {
    let (mean, delta_e) = fock_mean_and_spread(op, state)?;
    let (e_min, e_max) = if op.dim() <= crate::spectral::DENSE_DIMENSION_LIMIT {
        let sd = crate::spectral::diagonalize(op)?;
        (sd.e_min(), sd.e_max())
    } else {
        crate::spectral::extreme_eigenvalues(op, &Default::default())?
    };
    Ok(SpectralStats {
        mean,
        delta_e,
        e_min,
        e_max,
    })
}

fn fock_mean_and_spread(op: &HermitianOperator, state: &FockState) -> Result<(f64, f64)> {
    let index = op.basis().index_of_state(state)?;
    let mut e = vec![C64::new(0.0, 0.0); op.dim()];
    e[index] = C64::new(1.0, 0.0);
    let mut he = vec![C64::new(0.0, 0.0); op.dim()];
    op.apply(&e, &mut he);
    let mean = he[index].re;
    let second: f64 = he.iter().map(|x| x.norm_sqr()).sum();
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

/// ΔE of the row-major density wave computed from the many-body operator
/// where the sector fits, otherwise from the free-fermion formula.
fn numeric_delta_e(geometry: Geometry, j1_mhz: f64, j2_mhz: f64) -> Result<f64> {
    let n_sites = geometry.num_sites();
    let occupied = geometry.density_wave();
    let pattern = PotentialPattern::zeros(n_sites);
    let (nx, ny) = geometry.dims();
    if crate::hilbert::binomial(n_sites, occupied.len()) > DEFAULT_DIMENSION_CAP {
        if let Geometry::Chain { length } = geometry {
            let sph = single_particle_hamiltonian(length, j1_mhz, &pattern)?;
            return Ok(sph.product_state_stats(&occupied)?.delta_e);
        }
    }
    let op = match geometry {
        Geometry::Chain { length } => crate::hamiltonians::xy_chain(length, occupied.len(), j1_mhz, &pattern)?,
        Geometry::Grid { .. } => grid_operator(nx, ny, occupied.len(), j1_mhz, j2_mhz, &pattern)?,
    };
    let state = FockState::from_sites(n_sites, &occupied)?;
    Ok(fock_mean_and_spread(&op, &state)?.1)
}

/// Analytic and numeric ΔE, the crossover potential W* and the phase
/// point at W* for each geometry.
pub fn scaling_study(
    geometries: &[Geometry],
    j1_mhz: f64,
    j2_mhz: f64,
    w_range: (f64, f64),
    exec: Execution,
) -> Result<Vec<ScalingRecord>> {
    par::map(exec, geometries, |&g| {
        let j2 = if matches!(g, Geometry::Chain { .. }) { 0.0 } else { j2_mhz };
        let analytic = analytic_delta_e(g, j1_mhz, j2)?;
        let numeric = numeric_delta_e(g, j1_mhz, j2)?;
        let w_star = crossover_w(|w| density_wave_stats(g, j1_mhz, j2, w), w_range.0, w_range.1)?;
        let (phase_x, phase_y) = phase_point(&density_wave_stats(g, j1_mhz, j2, w_star)?)?;
        Ok(ScalingRecord {
            geometry: g,
            delta_e_analytic_mhz: angular_to_mhz(analytic),
            delta_e_numeric_mhz: angular_to_mhz(numeric),
            w_star_mhz: w_star,
            phase_x,
            phase_y,
        })
    })
    .into_iter()
    .collect()
}

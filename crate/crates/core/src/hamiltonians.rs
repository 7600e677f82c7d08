//! Hamiltonians of the driven qubit, driven qutrit, 1d XY chain and 2d
//! lattice with nearest and next-nearest neighbor hopping.
//!
//! Operators are stored in compressed sparse rows. Every builder works
//! inside a single excitation sector, so number conservation is exact.
//! Energies are angular frequencies in rad/ns.

use std::io::Write;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::hilbert::{Basis, FockState};
use crate::units::mhz_to_angular;

/// Allowed relative deviation of `H` from `H†`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A Hermitian operator on a basis, in CSR form with sorted columns.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    basis: Arc<Basis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl HermitianOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(basis: Arc<Basis>, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let n = basis.dim();
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= n || *c >= n) {
            return Err(QslError::LengthMismatch {
                expected: n,
                found: r.max(c) + 1,
            });
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let op = HermitianOperator {
            basis,
            row_ptr,
            cols,
            values,
        };
        op.check_hermitian()?;
        Ok(op)
    }

    /// Builds from a dense row-major matrix, dropping exact zeros.
    pub fn from_dense(basis: Arc<Basis>, matrix: &[Vec<C64>]) -> Result<Self> {
        let n = basis.dim();
        if matrix.len() != n {
            return Err(QslError::LengthMismatch {
                expected: n,
                found: matrix.len(),
            });
        }
        let mut triplets = Vec::new();
        for (r, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(QslError::LengthMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v != C64::new(0.0, 0.0) {
                    triplets.push((r, c, v));
                }
            }
        }
        Self::from_triplets(basis, triplets)
    }

    fn check_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * self.max_abs().max(f64::MIN_POSITIVE) {
            return Err(QslError::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |H_ij − conj(H_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// y = H x
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// y = H x for a real operator; imaginary parts are ignored.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k].re * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = Mat::<C64>::zeros(n, n);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_dense_real(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.re;
        }
        m
    }

    /// CSV with header `row,col,re,im`, one line per stored entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{r},{c},{:?},{:?}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Which sublattice carries +W in a staggered pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stagger {
    /// Sites with even index (or even ix+iy) carry +W.
    #[default]
    EvenPositive,
    OddPositive,
}

impl Stagger {
    pub fn sign(self, parity: usize) -> f64 {
        match (self, parity % 2) {
            (Stagger::EvenPositive, 0) | (Stagger::OddPositive, 1) => 1.0,
            _ => -1.0,
        }
    }
}

/// On-site energies Wᵢ in rad/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPattern {
    values: Vec<f64>,
}

impl PotentialPattern {
    pub fn zeros(num_sites: usize) -> Self {
        PotentialPattern {
            values: vec![0.0; num_sites],
        }
    }

    pub fn from_mhz(values: &[f64]) -> Self {
        PotentialPattern {
            values: values.iter().map(|&f| mhz_to_angular(f)).collect(),
        }
    }

    /// Wᵢ = ±W alternating along the chain.
    pub fn staggered(num_sites: usize, w_mhz: f64, stagger: Stagger) -> Self {
        let w = mhz_to_angular(w_mhz);
        PotentialPattern {
            values: (0..num_sites).map(|i| stagger.sign(i) * w).collect(),
        }
    }

    /// Wᵢ = ±W by the parity of ix + iy, sites indexed row-major.
    pub fn checkerboard(nx: usize, ny: usize, w_mhz: f64, stagger: Stagger) -> Self {
        let w = mhz_to_angular(w_mhz);
        let values = (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| stagger.sign(ix + iy) * w))
            .collect();
        PotentialPattern { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Diagonal Fock energy Σᵢ Wᵢ sᵢ.
pub fn fock_energy(state: &FockState, pattern: &PotentialPattern) -> Result<f64> {
    if state.num_sites() != pattern.len() {
        return Err(QslError::LengthMismatch {
            expected: pattern.len(),
            found: state.num_sites(),
        });
    }
    Ok(state
        .occupations()
        .iter()
        .zip(pattern.values())
        .map(|(&s, &w)| s as f64 * w)
        .sum())
}

/// Hopping bond between two sites with amplitude in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub amplitude: f64,
}

/// Nearest-neighbor bonds of an open chain.
pub fn chain_bonds(length: usize, j1: f64) -> Vec<Bond> {
    (1..length)
        .map(|i| Bond {
            a: i - 1,
            b: i,
            amplitude: j1,
        })
        .collect()
}

/// Grid edges (J1) and both diagonals of every elementary square (J2) of
/// an open nx×ny lattice, site index `iy * nx + ix`.
pub fn grid_bonds(nx: usize, ny: usize, j1: f64, j2: f64) -> Vec<Bond> {
    let site = |ix: usize, iy: usize| iy * nx + ix;
    let mut bonds = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            if ix + 1 < nx {
                bonds.push(Bond { a: site(ix, iy), b: site(ix + 1, iy), amplitude: j1 });
            }
            if iy + 1 < ny {
                bonds.push(Bond { a: site(ix, iy), b: site(ix, iy + 1), amplitude: j1 });
            }
        }
    }
    if j2 != 0.0 {
        for iy in 0..ny.saturating_sub(1) {
            for ix in 0..nx.saturating_sub(1) {
                bonds.push(Bond { a: site(ix, iy), b: site(ix + 1, iy + 1), amplitude: j2 });
                bonds.push(Bond { a: site(ix + 1, iy), b: site(ix, iy + 1), amplitude: j2 });
            }
        }
    }
    bonds
}

/// Σ_bonds J (σ⁺ₐσ⁻ᵦ + h.c.) + Σᵢ Wᵢ σ⁺ᵢσ⁻ᵢ inside the sector of `basis`.
pub fn hopping_hamiltonian(
    basis: Arc<Basis>,
    bonds: &[Bond],
    pattern: &PotentialPattern,
) -> Result<HermitianOperator> {
    if pattern.len() != basis.num_sites() {
        return Err(QslError::LengthMismatch {
            expected: basis.num_sites(),
            found: pattern.len(),
        });
    }
    let mut triplets = Vec::with_capacity(basis.dim() * (1 + bonds.len() / 2));
    for (col, &s) in basis.states().iter().enumerate() {
        let energy: f64 = pattern
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| s >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum();
        if energy != 0.0 {
            triplets.push((col, col, C64::new(energy, 0.0)));
        }
        for bond in bonds {
            let mask = (1u64 << bond.a) | (1u64 << bond.b);
            if (s & mask).count_ones() == 1 && bond.amplitude != 0.0 {
                let row = basis
                    .index_of(s ^ mask)
                    .expect("hopping conserves the excitation number");
                triplets.push((row, col, C64::new(bond.amplitude, 0.0)));
            }
        }
    }
    HermitianOperator::from_triplets(basis, triplets)
}

/// Driven qubit in the rotating frame, [[0, Ω], [Ω, Δ]].
pub fn driven_qubit(omega_mhz: f64, delta_mhz: f64) -> HermitianOperator {
    let (o, d) = (mhz_to_angular(omega_mhz), mhz_to_angular(delta_mhz));
    let basis = Arc::new(Basis::qudit(2).expect("two levels"));
    let m = vec![
        vec![C64::new(0.0, 0.0), C64::new(o, 0.0)],
        vec![C64::new(o, 0.0), C64::new(d, 0.0)],
    ];
    HermitianOperator::from_dense(basis, &m).expect("real symmetric")
}

/// Driven qutrit, [[0, Ω, 0], [Ω, 0, √2Ω], [0, √2Ω, η]].
pub fn driven_qutrit(omega_mhz: f64, eta_mhz: f64) -> HermitianOperator {
    let (o, e) = (mhz_to_angular(omega_mhz), mhz_to_angular(eta_mhz));
    let s = std::f64::consts::SQRT_2 * o;
    let basis = Arc::new(Basis::qudit(3).expect("three levels"));
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let m = vec![vec![z, r(o), z], vec![r(o), z, r(s)], vec![z, r(s), r(e)]];
    HermitianOperator::from_dense(basis, &m).expect("real symmetric")
}

/// Open XY chain of `length` sites with `num_excitations` excitations.
pub fn xy_chain(
    length: usize,
    num_excitations: usize,
    j1_mhz: f64,
    pattern: &PotentialPattern,
) -> Result<HermitianOperator> {
    if pattern.len() != length {
        return Err(QslError::LengthMismatch {
            expected: length,
            found: pattern.len(),
        });
    }
    let basis = Arc::new(Basis::sector(length, num_excitations)?);
    hopping_hamiltonian(basis, &chain_bonds(length, mhz_to_angular(j1_mhz)), pattern)
}

/// Open nx×ny lattice with J1 edges, J2 diagonals and a checkerboard of
/// amplitude `w_mhz` (+W on even ix+iy).
pub fn lattice_2d(
    nx: usize,
    ny: usize,
    num_excitations: usize,
    j1_mhz: f64,
    j2_mhz: f64,
    w_mhz: f64,
) -> Result<HermitianOperator> {
    let pattern = PotentialPattern::checkerboard(nx, ny, w_mhz, Stagger::EvenPositive);
    lattice_2d_with_pattern(nx, ny, num_excitations, j1_mhz, j2_mhz, &pattern)
}

pub fn lattice_2d_with_pattern(
    nx: usize,
    ny: usize,
    num_excitations: usize,
    j1_mhz: f64,
    j2_mhz: f64,
    pattern: &PotentialPattern,
) -> Result<HermitianOperator> {
    let basis = Arc::new(Basis::sector(nx * ny, num_excitations)?);
    let bonds = grid_bonds(nx, ny, mhz_to_angular(j1_mhz), mhz_to_angular(j2_mhz));
    hopping_hamiltonian(basis, &bonds, pattern)
}

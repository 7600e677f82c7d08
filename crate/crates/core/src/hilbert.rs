//! Fock-space bases, occupation patterns and pure states.
//!
//! Occupation patterns are encoded little-endian: site 0 is the least
//! significant digit (base 2 for lattices, base `levels` for a qudit).
//! In text form a pattern is written with site 0 leftmost, so `"101010"`
//! has sites 0, 2 and 4 occupied.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};

/// Largest number of sites a binary pattern may carry.
pub const MAX_SITES: usize = 24;

/// Default cap on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Tolerance on the L2 norm of constructed states.
pub const NORM_TOL: f64 = 1e-12;

/// An ordered set of occupation patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    num_sites: usize,
    num_excitations: Option<usize>,
    levels: usize,
    states: Vec<u64>,
}

impl Basis {
    /// All patterns of `num_sites` two-level sites holding exactly
    /// `num_excitations` excitations, ascending.
    pub fn sector(num_sites: usize, num_excitations: usize) -> Result<Self> {
        Self::sector_with_cap(num_sites, num_excitations, DEFAULT_DIMENSION_CAP)
    }

    pub fn sector_with_cap(num_sites: usize, num_excitations: usize, cap: usize) -> Result<Self> {
        if num_sites > MAX_SITES || num_excitations > num_sites {
            return Err(QslError::InvalidSector {
                num_sites,
                num_excitations,
            });
        }
        let dimension = binomial(num_sites, num_excitations);
        if dimension > cap {
            return Err(QslError::DimensionCap { dimension, cap });
        }
        let mut states = Vec::with_capacity(dimension);
        if num_excitations == 0 {
            states.push(0);
        } else {
            // Gosper's hack walks the fixed-popcount patterns in ascending order.
            let mut v: u64 = (1u64 << num_excitations) - 1;
            let limit = 1u64 << num_sites;
            while v < limit {
                states.push(v);
                let t = v | (v - 1);
                v = (t + 1) | (((!t & (t + 1)) - 1) >> (v.trailing_zeros() + 1));
            }
        }
        debug_assert_eq!(states.len(), dimension);
        Ok(Basis {
            num_sites,
            num_excitations: Some(num_excitations),
            levels: 2,
            states,
        })
    }

    /// The full 2^N space of `num_sites` two-level sites.
    pub fn full(num_sites: usize) -> Result<Self> {
        if num_sites > MAX_SITES {
            return Err(QslError::InvalidSector {
                num_sites,
                num_excitations: 0,
            });
        }
        let dimension = 1usize << num_sites;
        if dimension > DEFAULT_DIMENSION_CAP {
            return Err(QslError::DimensionCap {
                dimension,
                cap: DEFAULT_DIMENSION_CAP,
            });
        }
        Ok(Basis {
            num_sites,
            num_excitations: None,
            levels: 2,
            states: (0..dimension as u64).collect(),
        })
    }

    /// A structureless space of dimension `dim`, for operators given
    /// directly as matrices. Fock-state accessors are not meaningful here.
    pub fn abstract_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QslError::EmptyInput("basis"));
        }
        Ok(Basis {
            num_sites: 1,
            num_excitations: None,
            levels: dim,
            states: (0..dim as u64).collect(),
        })
    }

    /// A single site with `levels` levels (2 = qubit, 3 = qutrit).
    pub fn qudit(levels: usize) -> Result<Self> {
        if !(2..=3).contains(&levels) {
            return Err(QslError::InvalidParameter(format!(
                "qudits support 2 or 3 levels, got {levels}"
            )));
        }
        Ok(Basis {
            num_sites: 1,
            num_excitations: None,
            levels,
            states: (0..levels as u64).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn num_excitations(&self) -> Option<usize> {
        self.num_excitations
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn pattern(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn index_of(&self, pattern: u64) -> Option<usize> {
        self.states.binary_search(&pattern).ok()
    }

    pub fn fock_state(&self, index: usize) -> FockState {
        FockState::decode(self.states[index], self.num_sites, self.levels)
    }

    pub fn index_of_state(&self, state: &FockState) -> Result<usize> {
        if state.num_sites() != self.num_sites || state.max_level() >= self.levels as u8 {
            return Err(QslError::StateNotInBasis(state.to_string()));
        }
        self.index_of(state.encode(self.levels))
            .ok_or_else(|| QslError::StateNotInBasis(state.to_string()))
    }

    /// Largest Hamming distance reachable inside the basis.
    pub fn max_hamming_distance(&self) -> usize {
        match self.num_excitations {
            Some(n) => 2 * n.min(self.num_sites - n),
            None => self.num_sites * (self.levels - 1),
        }
    }

    /// Same sector and layout; the patterns then coincide by construction.
    pub fn same_space(&self, other: &Basis) -> bool {
        self.num_sites == other.num_sites
            && self.num_excitations == other.num_excitations
            && self.levels == other.levels
            && self.states.len() == other.states.len()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Per-site occupations of a product state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FockState {
    occupations: Vec<u8>,
}

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        FockState { occupations }
    }

    /// Occupied sites set to 1.
    pub fn from_sites(num_sites: usize, occupied: &[usize]) -> Result<Self> {
        let mut occupations = vec![0u8; num_sites];
        for &s in occupied {
            if s >= num_sites {
                return Err(QslError::LengthMismatch {
                    expected: num_sites,
                    found: s + 1,
                });
            }
            occupations[s] = 1;
        }
        Ok(FockState { occupations })
    }

    pub fn decode(mut pattern: u64, num_sites: usize, levels: usize) -> Self {
        let mut occupations = Vec::with_capacity(num_sites);
        for _ in 0..num_sites {
            occupations.push((pattern % levels as u64) as u8);
            pattern /= levels as u64;
        }
        FockState { occupations }
    }

    pub fn encode(&self, levels: usize) -> u64 {
        self.occupations
            .iter()
            .rev()
            .fold(0u64, |acc, &o| acc * levels as u64 + o as u64)
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn num_sites(&self) -> usize {
        self.occupations.len()
    }

    pub fn num_excitations(&self) -> usize {
        self.occupations.iter().map(|&o| o as usize).sum()
    }

    pub fn occupied_sites(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .filter(|(_, &o)| o > 0)
            .map(|(i, _)| i)
            .collect()
    }

    fn max_level(&self) -> u8 {
        self.occupations.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &o in &self.occupations {
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for FockState {
    type Err = QslError;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > 64 {
            return Err(QslError::InvalidBitstring(s.to_string()));
        }
        let occupations = s
            .chars()
            .map(|c| match c {
                '0'..='2' => Ok(c as u8 - b'0'),
                _ => Err(QslError::InvalidBitstring(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FockState { occupations })
    }
}

impl TryFrom<String> for FockState {
    type Error = QslError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FockState> for String {
    fn from(s: FockState) -> String {
        s.to_string()
    }
}

/// Number of sites whose occupations differ, Σᵢ |sᵢ − s0ᵢ|.
pub fn hamming_distance(s: &FockState, s0: &FockState) -> Result<usize> {
    if s.num_sites() != s0.num_sites() {
        return Err(QslError::LengthMismatch {
            expected: s0.num_sites(),
            found: s.num_sites(),
        });
    }
    Ok(s.occupations
        .iter()
        .zip(&s0.occupations)
        .map(|(&a, &b)| a.abs_diff(b) as usize)
        .sum())
}

/// A normalized pure state expanded in a basis.
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<Basis>,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    /// Normalizes `amplitudes`; rejects a zero vector.
    pub fn from_amplitudes(basis: Arc<Basis>, mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(QslError::LengthMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = l2_norm(&amplitudes);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QslError::ZeroNorm);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(QuantumState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// The basis index carrying all the weight, if this is a single Fock state.
    pub fn as_fock_index(&self) -> Option<usize> {
        let mut found = None;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() > NORM_TOL {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found.filter(|&i| (self.amplitudes[i].norm() - 1.0).abs() < 1e-10)
    }

    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if !self.basis.same_space(&other.basis) {
            return Err(QslError::BasisMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

pub(crate) fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn make_product_state(basis: &Arc<Basis>, occupations: &FockState) -> Result<QuantumState> {
    let index = basis.index_of_state(occupations)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
    amplitudes[index] = C64::new(1.0, 0.0);
    Ok(QuantumState {
        basis: Arc::clone(basis),
        amplitudes,
    })
}

/// Σ coeffᵢ |sᵢ⟩, normalized.
pub fn make_superposition(basis: &Arc<Basis>, terms: &[(C64, FockState)]) -> Result<QuantumState> {
    if terms.is_empty() {
        return Err(QslError::EmptyInput("superposition terms"));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
    let mut seen = vec![false; basis.dim()];
    for (coeff, state) in terms {
        let index = basis.index_of_state(state)?;
        if std::mem::replace(&mut seen[index], true) {
            return Err(QslError::DuplicateState(state.to_string()));
        }
        amplitudes[index] = *coeff;
    }
    QuantumState::from_amplitudes(Arc::clone(basis), amplitudes)
}

/// Normalized state of a single three-level system.
pub fn make_qutrit_state(amplitudes: [C64; 3]) -> Result<QuantumState> {
    let basis = Arc::new(Basis::qudit(3)?);
    QuantumState::from_amplitudes(basis, amplitudes.to_vec())
}

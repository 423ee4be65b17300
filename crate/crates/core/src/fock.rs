//! Truncated bosonic Fock bases and ladder operators as dense matrices.
//!
//! A [`FockBasis`] holds every occupation vector whose total number of quanta
//! is at most `n_max`. States are ordered by total occupation first; inside one
//! shell they are sorted lexicographically ascending on the occupation vector.
//! This order is part of the public contract: serialized state vectors list
//! amplitudes in exactly this order.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

/// Default upper bound on basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// Tolerance on `|‖ψ‖ - 1|` accepted by [`expect`].
pub const NORM_TOL: f64 = 1e-12;

/// Photon numbers, one entry per mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationState(pub Vec<u32>);

impl OccupationState {
    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }
}

/// Identifies the basis an operator acts on; operands of binary operations
/// must carry equal tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisTag {
    /// Full truncated Fock basis.
    Fock { modes: usize, n_max: u32 },
    /// Invariant sector `(κ, s)` of the two-mode harmonic-generation model.
    Sector { n: u32, kappa: u32, s: u32 },
    /// One-mode residue class `N ≡ κ (mod n)` truncated at `n_max`.
    ResidueClass { n: u32, kappa: u32, n_max: u32 },
    /// Any other explicitly indexed subspace.
    Subspace { id: u64, dim: usize },
}

/// Creation or annihilation on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Apply a product of ladder operators, written left to right as in the
/// operator product, to a basis state of the untruncated Fock space.
/// Returns `None` when the product annihilates the state.
pub fn apply_word(word: &[Ladder], state: &OccupationState) -> Option<(f64, OccupationState)> {
    let mut occ = state.0.clone();
    let mut amp = 1.0f64;
    for op in word.iter().rev() {
        match *op {
            Ladder::Create(k) => {
                occ[k] += 1;
                amp *= f64::from(occ[k]).sqrt();
            }
            Ladder::Annihilate(k) => {
                if occ[k] == 0 {
                    return None;
                }
                amp *= f64::from(occ[k]).sqrt();
                occ[k] -= 1;
            }
        }
    }
    Some((amp, OccupationState(occ)))
}

/// Like [`apply_word`] but returns the squared amplitude as an exact integer.
pub fn apply_word_squared(word: &[Ladder], state: &OccupationState) -> Option<(u128, OccupationState)> {
    let mut occ = state.0.clone();
    let mut amp2 = 1u128;
    for op in word.iter().rev() {
        match *op {
            Ladder::Create(k) => {
                occ[k] += 1;
                amp2 *= u128::from(occ[k]);
            }
            Ladder::Annihilate(k) => {
                if occ[k] == 0 {
                    return None;
                }
                amp2 *= u128::from(occ[k]);
                occ[k] -= 1;
            }
        }
    }
    Some((amp2, OccupationState(occ)))
}

/// Matrix of a ladder word on an explicit list of states (exact Fock action,
/// projected onto the span of `states`).
pub fn word_matrix(states: &[OccupationState], word: &[Ladder]) -> CMatrix {
    let index: BTreeMap<&OccupationState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut m = CMatrix::zeros(states.len(), states.len());
    for (col, s) in states.iter().enumerate() {
        if let Some((amp, target)) = apply_word(word, s) {
            if let Some(&row) = index.get(&target) {
                m[(row, col)] += Complex64::new(amp, 0.0);
            }
        }
    }
    m
}

/// Number of occupation vectors over `modes` modes with total ≤ `n_max`,
/// i.e. `C(n_max + modes, modes)`.
pub fn fock_dimension(modes: usize, n_max: u32) -> u128 {
    let n = u128::from(n_max);
    let mut acc: u128 = 1;
    for k in 1..=modes as u128 {
        acc = acc.saturating_mul(n + k) / k;
    }
    acc
}

/// Indexed truncated Fock basis.
#[derive(Debug, Clone)]
pub struct FockBasis {
    mode_count: usize,
    n_max: u32,
    states: Vec<OccupationState>,
    index: BTreeMap<OccupationState, usize>,
}

/// Build the basis of all states with total occupation ≤ `n_max`.
pub fn build_basis(mode_count: usize, n_max: u32) -> Result<FockBasis> {
    build_basis_with_cap(mode_count, n_max, DEFAULT_DIMENSION_CAP)
}

pub fn build_basis_with_cap(mode_count: usize, n_max: u32, cap: usize) -> Result<FockBasis> {
    if mode_count == 0 {
        return Err(Error::InvalidArgument("mode_count must be at least 1"));
    }
    let dim = fock_dimension(mode_count, n_max);
    if dim > cap as u128 {
        return Err(Error::DimensionCap { dim, cap });
    }
    let mut states = Vec::with_capacity(dim as usize);
    for total in 0..=n_max {
        let mut occ = vec![0u32; mode_count];
        push_compositions(&mut occ, 0, total, &mut states);
    }
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(FockBasis { mode_count, n_max, states, index })
}

// Emits compositions of `remaining` into occ[pos..] in ascending lexicographic order.
fn push_compositions(occ: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<OccupationState>) {
    if pos + 1 == occ.len() {
        occ[pos] = remaining;
        out.push(OccupationState(occ.to_vec()));
        return;
    }
    for k in 0..=remaining {
        occ[pos] = k;
        push_compositions(occ, pos + 1, remaining - k, out);
    }
    occ[pos] = 0;
}

impl FockBasis {
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &OccupationState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Fock { modes: self.mode_count, n_max: self.n_max }
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::InvalidMode { mode, modes: self.mode_count });
        }
        Ok(())
    }

    /// Basis vector `|state⟩` as an amplitude vector.
    pub fn ket(&self, state: &OccupationState) -> Option<Vec<Complex64>> {
        let i = self.index_of(state)?;
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    /// Rows whose total occupation is at most `n_max - margin`.
    pub fn interior(&self, margin: u32) -> Vec<bool> {
        let bound = self.n_max.saturating_sub(margin);
        let full = margin <= self.n_max;
        self.states.iter().map(|s| full && s.total() <= bound).collect()
    }

    /// Operator of a ladder word, exact Fock action projected onto the basis.
    pub fn word_op(&self, word: &[Ladder]) -> Result<OperatorMatrix> {
        for op in word {
            let (Ladder::Create(k) | Ladder::Annihilate(k)) = *op;
            self.check_mode(k)?;
        }
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (col, s) in self.states.iter().enumerate() {
            if let Some((amp, target)) = apply_word(word, s) {
                if let Some(row) = self.index_of(&target) {
                    m[(row, col)] += Complex64::new(amp, 0.0);
                }
            }
        }
        Ok(OperatorMatrix::new(self.tag(), m))
    }

    /// Diagonal operator from a function of the occupation vector.
    pub fn diagonal_op(&self, f: impl Fn(&OccupationState) -> f64) -> OperatorMatrix {
        let diag: Vec<f64> = self.states.iter().map(f).collect();
        OperatorMatrix::new(self.tag(), CMatrix::from_real_diag(&diag))
    }
}

/// Dense operator tagged with the basis it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisTag,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn new(basis: BasisTag, matrix: CMatrix) -> Self {
        assert!(matrix.is_square(), "operator matrices are square");
        Self { basis, matrix }
    }

    pub fn identity(basis: BasisTag, dim: usize) -> Self {
        Self::new(basis, CMatrix::identity(dim))
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.matrix[(r, c)]
    }

    fn check(&self, other: &OperatorMatrix) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check(other)?;
        Ok(Self::new(self.basis, self.matrix.add(&other.matrix)))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check(other)?;
        Ok(Self::new(self.basis, self.matrix.sub(&other.matrix)))
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check(other)?;
        Ok(Self::new(self.basis, self.matrix.mul(&other.matrix)))
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check(other)?;
        Ok(Self::new(self.basis, self.matrix.commutator(&other.matrix)))
    }

    pub fn anticommutator(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.check(other)?;
        Ok(Self::new(self.basis, self.matrix.anticommutator(&other.matrix)))
    }

    pub fn scale(&self, z: Complex64) -> OperatorMatrix {
        Self::new(self.basis, self.matrix.scale(z))
    }

    pub fn scale_re(&self, x: f64) -> OperatorMatrix {
        self.scale(Complex64::new(x, 0.0))
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        Self::new(self.basis, self.matrix.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.matrix.hermitian_deviation()
    }

    /// Linear combination `Σ c_k A_k` over operators sharing one basis.
    pub fn combination(terms: &[(Complex64, &OperatorMatrix)]) -> Result<OperatorMatrix> {
        let (_, first) = terms.first().ok_or(Error::InvalidArgument("empty combination"))?;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (c, op) in terms {
            first.check(op)?;
            acc = acc.add(&op.matrix.scale(*c));
        }
        Ok(Self::new(first.basis, acc))
    }
}

/// `a⁺_k` on a truncated basis: `⟨m|a⁺_k|n⟩ = √(n_k+1)` when `m` is `n` with
/// one more quantum in mode `k` and `m` lies inside the truncation.
pub fn creation_op(basis: &FockBasis, mode: usize) -> Result<OperatorMatrix> {
    basis.check_mode(mode)?;
    let mut m = CMatrix::zeros(basis.dim(), basis.dim());
    for (col, s) in basis.states().iter().enumerate() {
        let mut occ = s.0.clone();
        occ[mode] += 1;
        let amp = f64::from(occ[mode]).sqrt();
        if let Some(row) = basis.index_of(&OccupationState(occ)) {
            m[(row, col)] = Complex64::new(amp, 0.0);
        }
    }
    Ok(OperatorMatrix::new(basis.tag(), m))
}

/// `a_k`, the adjoint of [`creation_op`].
pub fn annihilation_op(basis: &FockBasis, mode: usize) -> Result<OperatorMatrix> {
    Ok(creation_op(basis, mode)?.adjoint())
}

/// `N_k = a⁺_k a_k`, diagonal with entries `n_k`.
pub fn number_op(basis: &FockBasis, mode: usize) -> Result<OperatorMatrix> {
    basis.check_mode(mode)?;
    Ok(basis.diagonal_op(|s| f64::from(s.get(mode))))
}

/// Total number operator `Σ_k N_k`.
pub fn total_number_op(basis: &FockBasis) -> OperatorMatrix {
    basis.diagonal_op(|s| f64::from(s.total()))
}

/// `E_ij = a⁺_i a_j`.
pub fn hopping_op(basis: &FockBasis, i: usize, j: usize) -> Result<OperatorMatrix> {
    basis.word_op(&[Ladder::Create(i), Ladder::Annihilate(j)])
}

/// `op · ψ`.
pub fn apply(op: &OperatorMatrix, state: &[Complex64]) -> Result<Vec<Complex64>> {
    if state.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: state.len() });
    }
    Ok(op.matrix().matvec(state))
}

/// `⟨ψ|op|ψ⟩` for a state normalized within [`NORM_TOL`].
pub fn expect(op: &OperatorMatrix, state: &[Complex64]) -> Result<Complex64> {
    let image = apply(op, state)?;
    let n = linalg::norm(state);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(linalg::vdot(state, &image))
}

//! Multiphoton Hamiltonians, sector decomposition, exact diagonalization and
//! unitary evolution.
//!
//! The harmonic-generation model
//! `H = ω₁N₁ + ω₀N₀ + g (a⁺₁)ⁿ a₀ + g* a₁ⁿ a⁺₀`
//! is block diagonal in the sectors `(κ, s)`. On one sector it equals
//! `a Y₀ + b Y₊ + b* Y₋ + c R₁` with `a = nω₁ - ω₀`, `b = g`, `c = ω₁ + ω₀`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::{self, BasisTag, FockBasis, Ladder, OccupationState, OperatorMatrix};
use crate::linalg::{self, CMatrix};
use crate::polyalg::{self, SectorLabel, PUMP, SIGNAL};
use crate::{rational_to_f64, Error, Result};

/// Hermiticity tolerance accepted by [`diagonalize`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Parameters of the two-mode harmonic-generation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub omega1: f64,
    pub omega0: f64,
    pub g: Complex64,
}

impl ModelParams {
    pub fn new(n: u32, omega1: f64, omega0: f64, g: Complex64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("cluster order n must be at least 2"));
        }
        if !(omega1.is_finite() && omega0.is_finite() && g.re.is_finite() && g.im.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite"));
        }
        Ok(Self { n, omega1, omega0, g })
    }

    /// Resonant configuration `ω₀ = nω₁`, i.e. `a = 0`.
    pub fn resonant(n: u32, omega1: f64, g: Complex64) -> Result<Self> {
        Self::new(n, omega1, f64::from(n) * omega1, g)
    }

    /// Detuning `a = nω₁ - ω₀`.
    pub fn a(&self) -> f64 {
        f64::from(self.n) * self.omega1 - self.omega0
    }

    pub fn b(&self) -> Complex64 {
        self.g
    }

    pub fn c(&self) -> f64 {
        self.omega1 + self.omega0
    }

    fn check_sector(&self, sector: &SectorLabel) -> Result<()> {
        if sector.n() != self.n {
            return Err(Error::InvalidArgument("sector cluster order differs from the model's"));
        }
        Ok(())
    }
}

/// One sector of a truncated two-mode space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorEntry {
    pub label: SectorLabel,
    /// Number of sector states with total occupation `≤ n_max`.
    pub fitted_dim: usize,
    /// All `s+1` sector states fit under the truncation.
    pub complete: bool,
}

/// Sector containing a two-mode state `[n₀, n₁]`.
pub fn sector_of(n: u32, state: &OccupationState) -> Result<SectorLabel> {
    if state.modes() != 2 {
        return Err(Error::InvalidArgument("sector labels need a two-mode state"));
    }
    let (n0, n1) = (state.get(PUMP), state.get(SIGNAL));
    SectorLabel::new(n, n1 % n, n0 + n1 / n)
}

/// All sectors meeting the two-mode truncation `N₀ + N₁ ≤ n_max`, ordered by
/// `(s, κ)`. Sectors cut by the truncation are flagged incomplete.
pub fn decompose_sectors(n: u32, n_max: u32) -> Result<Vec<SectorEntry>> {
    if n < 2 {
        return Err(Error::InvalidArgument("cluster order n must be at least 2"));
    }
    let mut out = Vec::new();
    for s in 0..=n_max {
        for kappa in 0..n {
            if kappa + s > n_max {
                continue;
            }
            let label = SectorLabel::new(n, kappa, s)?;
            // η-th state has total κ + s + (n-1)η
            let fitted_dim = (0..=s).take_while(|&eta| kappa + s + (n - 1) * eta <= n_max).count();
            out.push(SectorEntry { label, fitted_dim, complete: label.max_total() <= n_max });
        }
    }
    Ok(out)
}

/// Indices of a two-mode Fock basis grouped by sector.
pub fn sector_blocks(basis: &FockBasis, n: u32) -> Result<BTreeMap<SectorLabel, Vec<usize>>> {
    let mut blocks: BTreeMap<SectorLabel, Vec<usize>> = BTreeMap::new();
    for (i, state) in basis.states().iter().enumerate() {
        blocks.entry(sector_of(n, state)?).or_default().push(i);
    }
    Ok(blocks)
}

/// Connected components of the nonzero pattern of `h`; each is an invariant
/// subspace of the dynamics.
pub fn invariant_blocks(h: &OperatorMatrix) -> Vec<Vec<usize>> {
    let dim = h.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..dim {
        for c in r + 1..dim {
            if h.entry(r, c) != Complex64::new(0.0, 0.0) || h.entry(c, r) != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// `a Y₀ + b Y₊ + b* Y₋ + c l₁` from the algebraic sector representation.
pub fn build_hhg(params: &ModelParams, sector: SectorLabel) -> Result<OperatorMatrix> {
    params.check_sector(&sector)?;
    let rep = polyalg::build_supd2_rep(sector);
    let shift = params.c() * rational_to_f64(sector.l1());
    OperatorMatrix::combination(&[
        (Complex64::new(params.a(), 0.0), &rep.y0),
        (params.b(), &rep.y_plus),
        (params.b().conj(), &rep.y_minus),
        (Complex64::new(shift, 0.0), &OperatorMatrix::identity(sector.tag(), sector.dim())),
    ])
}

/// `ω₁N₁ + ω₀N₀ + g (a⁺₁)ⁿ a₀ + h.c.` restricted to the sector states.
pub fn build_hhg_fock(params: &ModelParams, sector: SectorLabel) -> Result<OperatorMatrix> {
    params.check_sector(&sector)?;
    let states = sector.states();
    let diag: Vec<f64> = states
        .iter()
        .map(|s| params.omega1 * f64::from(s.get(SIGNAL)) + params.omega0 * f64::from(s.get(PUMP)))
        .collect();
    let free = OperatorMatrix::new(sector.tag(), CMatrix::from_real_diag(&diag));
    let coupling = OperatorMatrix::new(sector.tag(), fock::word_matrix(&states, &harmonic_word(params.n)));
    free.add(&coupling.scale(params.g))?.add(&coupling.adjoint().scale(params.g.conj()))
}

fn harmonic_word(n: u32) -> Vec<Ladder> {
    let mut word = alloc::vec![Ladder::Create(SIGNAL); n as usize];
    word.push(Ladder::Annihilate(PUMP));
    word
}

/// Quasi-spin form
/// `a V₀ + b V₊ φ(V₀)^{-1/2} + b* φ(V₀)^{-1/2} V₋ + a(R₀ + J) + c R₁`.
pub fn build_hqs(params: &ModelParams, sector: SectorLabel) -> Result<OperatorMatrix> {
    params.check_sector(&sector)?;
    let hp = polyalg::hp_map(&polyalg::build_supd2_rep(sector))?;
    let inv = hp.phi_inv_sqrt();
    let raise = hp.v_plus.mul(&inv)?;
    let lower = inv.mul(&hp.v_minus)?;
    let shift = params.a() * rational_to_f64(sector.l0() + hp.j) + params.c() * rational_to_f64(sector.l1());
    OperatorMatrix::combination(&[
        (Complex64::new(params.a(), 0.0), &hp.v0),
        (params.b(), &raise),
        (params.b().conj(), &lower),
        (Complex64::new(shift, 0.0), &OperatorMatrix::identity(sector.tag(), sector.dim())),
    ])
}

/// One-mode multiboson model `ω₁ N + g (a⁺)ⁿ + g* aⁿ` on the residue class
/// `N ≡ κ (mod n)`, `N ≤ n_max`.
pub fn build_hn_multiboson(params: &ModelParams, kappa: u32, n_max: u32) -> Result<OperatorMatrix> {
    let rep = polyalg::build_supd11_rep(params.n, kappa, n_max)?;
    let occ: Vec<f64> = rep.states.iter().map(|s| params.omega1 * f64::from(s.get(0))).collect();
    let free = OperatorMatrix::new(rep.tag(), CMatrix::from_real_diag(&occ));
    free.add(&rep.y_plus.scale(params.g))?.add(&rep.y_minus.scale(params.g.conj()))
}

/// General multiphoton model with pump mode 0 and signal modes `1..=m`:
/// `Σ_i ω_i N_i + Σ g_{i₁…iₙ} a⁺_{i₁}…a⁺_{iₙ} a₀ + h.c.`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiphotonModel {
    pub n: u32,
    /// `[ω₀, ω₁, …, ω_m]`.
    pub frequencies: Vec<f64>,
    /// Coupling per non-decreasing index multiset `1 ≤ i₁ ≤ … ≤ iₙ ≤ m`.
    pub couplings: Vec<(Vec<usize>, Complex64)>,
}

impl MultiphotonModel {
    pub fn signal_modes(&self) -> usize {
        self.frequencies.len().saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        let m = self.signal_modes();
        if m == 0 {
            return Err(Error::InvalidArgument("need a pump and at least one signal frequency"));
        }
        for (idx, _) in &self.couplings {
            if idx.len() != self.n as usize {
                return Err(Error::InvalidArgument("coupling index multiset must have n entries"));
            }
            if idx.windows(2).any(|w| w[0] > w[1]) || idx.iter().any(|&i| i == 0 || i > m) {
                return Err(Error::InvalidArgument("coupling indices must satisfy 1 <= i1 <= ... <= in <= m"));
            }
        }
        Ok(())
    }
}

/// Full Fock-space matrix of a [`MultiphotonModel`] on `m+1` modes.
pub fn build_hmp_general(model: &MultiphotonModel, n_max: u32) -> Result<(FockBasis, OperatorMatrix)> {
    model.validate()?;
    let basis = fock::build_basis(model.frequencies.len(), n_max)?;
    let mut h = basis.diagonal_op(|s| model.frequencies.iter().enumerate().map(|(k, w)| w * f64::from(s.get(k))).sum());
    for (idx, g) in &model.couplings {
        let mut word: Vec<Ladder> = idx.iter().map(|&i| Ladder::Create(i)).collect();
        word.push(Ladder::Annihilate(PUMP));
        let term = basis.word_op(&word)?;
        h = h.add(&term.scale(*g))?.add(&term.adjoint().scale(g.conj()))?;
    }
    Ok((basis, h))
}

/// `R₁ = (N₁ + n N₀)/(1+n)` on a two-mode basis.
pub fn r1_operator(basis: &FockBasis, n: u32) -> OperatorMatrix {
    let nf = f64::from(n);
    basis.diagonal_op(|s| (f64::from(s.get(SIGNAL)) + nf * f64::from(s.get(PUMP))) / (1.0 + nf))
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub basis: BasisTag,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: CMatrix,
}

impl SectorSpectrum {
    pub fn sector(&self) -> Option<SectorLabel> {
        match self.basis {
            BasisTag::Sector { n, kappa, s } => SectorLabel::new(n, kappa, s).ok(),
            _ => None,
        }
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `max |V†V - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let v = &self.eigenvectors;
        v.adjoint().mul(v).sub(&CMatrix::identity(v.cols())).max_abs()
    }

    /// `max_k ‖H v_k - E_k v_k‖ / max(1, |E_k|)`.
    pub fn relative_residual(&self, h: &OperatorMatrix) -> f64 {
        (0..self.eigenvalues.len())
            .map(|k| {
                let v = self.eigenvector(k);
                let hv = h.matrix().matvec(&v);
                let e = self.eigenvalues[k];
                let diff: Vec<Complex64> = hv.iter().zip(&v).map(|(a, b)| a - b * e).collect();
                linalg::norm(&diff) / e.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

pub fn diagonalize(h: &OperatorMatrix) -> Result<SectorSpectrum> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let e = linalg::eigh(h.matrix());
    Ok(SectorSpectrum { basis: h.basis(), eigenvalues: e.values, eigenvectors: e.vectors })
}

/// States `ψ(t)` on a time grid.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub basis: BasisTag,
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

impl Evolution {
    /// `⟨ψ(t)|op|ψ(t)⟩` along the grid (real part; `op` is meant Hermitian).
    pub fn expectations(&self, op: &OperatorMatrix) -> Result<Vec<f64>> {
        if op.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        self.states.iter().map(|psi| Ok(fock::expect(op, psi)?.re)).collect()
    }

    /// `max_t |‖ψ(t)‖ - 1|`.
    pub fn norm_drift(&self) -> f64 {
        self.states.iter().map(|psi| (linalg::norm(psi) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Weight of every block along the grid: `result[b][t]`.
    pub fn block_populations(&self, blocks: &[Vec<usize>]) -> Vec<Vec<f64>> {
        blocks
            .iter()
            .map(|idx| self.states.iter().map(|psi| idx.iter().map(|&i| psi[i].norm_sqr()).sum()).collect())
            .collect()
    }

    /// Largest change of any block population relative to `t = times[0]`.
    pub fn population_drift(&self, blocks: &[Vec<usize>]) -> f64 {
        self.block_populations(blocks)
            .iter()
            .map(|series| series.iter().map(|p| (p - series[0]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// `ψ(t) = Σ_k e^{-iE_k t} ⟨v_k|ψ₀⟩ v_k`.
pub fn evolve(h: &OperatorMatrix, psi0: &[Complex64], times: &[f64]) -> Result<Evolution> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.len() });
    }
    let norm = linalg::norm(psi0);
    if (norm - 1.0).abs() > fock::NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let spec = diagonalize(h)?;
    let vecs: Vec<Vec<Complex64>> = (0..h.dim()).map(|k| spec.eigenvector(k)).collect();
    let coeffs: Vec<Complex64> = vecs.iter().map(|v| linalg::vdot(v, psi0)).collect();
    let states = times
        .iter()
        .map(|&t| {
            let mut psi = alloc::vec![Complex64::new(0.0, 0.0); h.dim()];
            for ((v, c), &e) in vecs.iter().zip(&coeffs).zip(&spec.eigenvalues) {
                let w = c * Complex64::new(0.0, -e * t).exp();
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (p, x) in psi.iter_mut().zip(v) {
                    *p += w * x;
                }
            }
            psi
        })
        .collect();
    Ok(Evolution { basis: h.basis(), times: times.to_vec(), states })
}

/// Uniform grid `0, dt, …, t_end` (inclusive when `t_end` is a multiple of `dt`).
pub fn time_grid(t_end: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    if points == 1 {
        return Ok(alloc::vec![0.0]);
    }
    let step = t_end / (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = core::f64::consts::SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn example() -> ModelParams {
        ModelParams::new(2, 1.0, 2.0, c(1.0)).unwrap()
    }

    #[test]
    fn derived_coefficients() {
        let p = ModelParams::new(3, 1.5, 2.0, Complex64::new(0.3, -0.2)).unwrap();
        assert_eq!(p.a(), 2.5);
        assert_eq!(p.c(), 3.5);
        assert_eq!(ModelParams::resonant(2, 1.0, c(1.0)).unwrap().a(), 0.0);
        assert!(ModelParams::new(1, 1.0, 1.0, c(0.0)).is_err());
    }

    #[test]
    fn sector_listing_small() {
        let entries = decompose_sectors(2, 2).unwrap();
        let got: Vec<(u32, u32, usize, bool)> =
            entries.iter().map(|e| (e.label.kappa(), e.label.s(), e.fitted_dim, e.complete)).collect();
        assert_eq!(
            got,
            alloc::vec![(0, 0, 1, true), (1, 0, 1, true), (0, 1, 2, true), (1, 1, 1, false), (0, 2, 1, false)]
        );
    }

    #[test]
    fn sector_dimensions_partition_the_basis() {
        for n in 2..5 {
            for n_max in 0..9 {
                let total: usize = decompose_sectors(n, n_max).unwrap().iter().map(|e| e.fitted_dim).sum();
                assert_eq!(total as u128, fock::fock_dimension(2, n_max));
            }
        }
    }

    #[test]
    fn example_hamiltonian_both_forms() {
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let want = [[2.0, SQRT2], [SQRT2, 2.0]];
        for h in [build_hhg(&example(), sector).unwrap(), build_hhg_fock(&example(), sector).unwrap()] {
            for r in 0..2 {
                for col in 0..2 {
                    assert!((h.entry(r, col) - c(want[r][col])).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn free_and_vacuum_cases() {
        let p = ModelParams::new(3, 0.7, 1.3, c(0.0)).unwrap();
        let sector = SectorLabel::new(3, 2, 3).unwrap();
        let h = build_hhg(&p, sector).unwrap();
        for (i, s) in sector.states().iter().enumerate() {
            let want = 0.7 * f64::from(s.get(SIGNAL)) + 1.3 * f64::from(s.get(PUMP));
            assert!((h.entry(i, i).re - want).abs() < 1e-13);
        }
        let vac = build_hhg(&example(), SectorLabel::new(2, 0, 0).unwrap()).unwrap();
        assert_eq!(vac.dim(), 1);
        assert!(vac.entry(0, 0).norm() < 1e-15);
    }

    #[test]
    fn quasispin_form_is_the_same_matrix() {
        let p = ModelParams::new(3, 0.4, 0.9, Complex64::new(0.2, 0.5)).unwrap();
        let sector = SectorLabel::new(3, 1, 4).unwrap();
        let a = build_hhg(&p, sector).unwrap();
        let b = build_hqs(&p, sector).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        let ea = diagonalize(&a).unwrap().eigenvalues;
        let eb = diagonalize(&b).unwrap().eigenvalues;
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-9);
        }
        let e = diagonalize(&build_hqs(&example(), SectorLabel::new(2, 0, 1).unwrap()).unwrap()).unwrap();
        assert!((e.eigenvalues[0] - (2.0 - SQRT2)).abs() < 1e-12);
        assert!((e.eigenvalues[1] - (2.0 + SQRT2)).abs() < 1e-12);
    }

    #[test]
    fn multiboson_model() {
        let p = ModelParams::new(2, 1.0, 0.0, c(0.1)).unwrap();
        let h = build_hn_multiboson(&p, 0, 40).unwrap();
        assert!((h.entry(1, 0).re - 0.1 * SQRT2).abs() < 1e-15);
        let free = build_hn_multiboson(&ModelParams::new(3, 0.5, 0.0, c(0.0)).unwrap(), 1, 20).unwrap();
        let d: Vec<f64> = free.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, alloc::vec![0.5, 2.0, 3.5, 5.0, 6.5, 8.0, 9.5]);
    }

    #[test]
    fn multiboson_truncation_convergence() {
        let p = ModelParams::new(2, 1.0, 0.0, c(0.1)).unwrap();
        let e40 = diagonalize(&build_hn_multiboson(&p, 0, 40).unwrap()).unwrap().eigenvalues;
        let e60 = diagonalize(&build_hn_multiboson(&p, 0, 60).unwrap()).unwrap().eigenvalues;
        for k in 0..5 {
            assert!((e40[k] - e60[k]).abs() <= 1e-6, "{k}: {} {}", e40[k], e60[k]);
        }
    }

    #[test]
    fn general_model_reduces_and_conserves() {
        let model = MultiphotonModel { n: 2, frequencies: alloc::vec![2.0, 1.0], couplings: alloc::vec![(alloc::vec![1, 1], c(1.0))] };
        let (basis, h) = build_hmp_general(&model, 6).unwrap();
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let idx: Vec<usize> = sector.states().iter().map(|s| basis.index_of(s).unwrap()).collect();
        let sub = h.matrix().select(&idx, &idx);
        let reference = build_hhg_fock(&example(), sector).unwrap();
        assert!(sub.sub(reference.matrix()).max_abs() < 1e-14);
        assert_eq!(h.commutator(&r1_operator(&basis, 2)).unwrap().max_abs(), 0.0);

        let conv = MultiphotonModel {
            n: 2,
            frequencies: alloc::vec![2.0, 0.8, 1.2],
            couplings: alloc::vec![(alloc::vec![1, 2], Complex64::new(0.3, 0.1))],
        };
        let (basis, h) = build_hmp_general(&conv, 5).unwrap();
        let diff = basis.diagonal_op(|s| f64::from(s.get(1)) - f64::from(s.get(2)));
        assert!(h.commutator(&diff).unwrap().max_abs() <= 1e-12);

        let bad = MultiphotonModel { n: 2, frequencies: alloc::vec![1.0, 1.0], couplings: alloc::vec![(alloc::vec![2, 1], c(1.0))] };
        assert!(build_hmp_general(&bad, 3).is_err());
    }

    #[test]
    fn diagonalize_contract() {
        let h = build_hhg(&example(), SectorLabel::new(2, 0, 10).unwrap()).unwrap();
        let spec = diagonalize(&h).unwrap();
        assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(spec.unitarity_deviation() <= 1e-10);
        assert!(spec.relative_residual(&h) <= 1e-9);
        assert_eq!(spec.sector(), Some(SectorLabel::new(2, 0, 10).unwrap()));
        let bad = OperatorMatrix::new(h.basis(), CMatrix::from_fn(11, 11, |r, c| if r < c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }));
        assert!(matches!(diagonalize(&bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rabi_oscillation_of_two_level_sector() {
        let p = ModelParams::resonant(2, 1.0, Complex64::new(0.3, 0.4)).unwrap();
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let h = build_hhg(&p, sector).unwrap();
        let times = time_grid(10.0, 101).unwrap();
        let psi0 = alloc::vec![c(1.0), c(0.0)];
        let ev = evolve(&h, &psi0, &times).unwrap();
        let rep = polyalg::build_supd2_rep(sector);
        let y0 = ev.expectations(&rep.y0).unwrap();
        let omega = 2.0 * SQRT2 * p.g.norm();
        for (t, y) in times.iter().zip(&y0) {
            // population of the upper level: sin²(Ωt/2)
            let up = (omega * t / 2.0).sin().powi(2);
            let want = -1.0 / 3.0 + up;
            assert!((y - want).abs() < 1e-12, "{t}: {y} vs {want}");
        }
        assert!(ev.norm_drift() < 1e-12);
        assert!(matches!(evolve(&h, &psi0, &[]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn sector_populations_are_conserved() {
        let model = MultiphotonModel { n: 2, frequencies: alloc::vec![2.0, 1.0], couplings: alloc::vec![(alloc::vec![1, 1], c(0.7))] };
        let (basis, h) = build_hmp_general(&model, 6).unwrap();
        let mut psi = alloc::vec![c(0.0); basis.dim()];
        psi[basis.index_of(&OccupationState(alloc::vec![1, 0])).unwrap()] = c(0.6);
        psi[basis.index_of(&OccupationState(alloc::vec![2, 1])).unwrap()] = c(0.8);
        let ev = evolve(&h, &psi, &time_grid(20.0, 201).unwrap()).unwrap();
        let blocks: Vec<Vec<usize>> = sector_blocks(&basis, 2).unwrap().into_values().collect();
        assert!(ev.population_drift(&blocks) <= 1e-10);
        assert!(ev.norm_drift() <= 1e-9);
        let comps = invariant_blocks(&h);
        assert_eq!(comps.len(), blocks.len());
    }
}

//! Quasispin (Stokes-type) operators of two-polarization multimode light,
//! biphoton cluster operators and the classification of unpolarized light.
//!
//! Modes are ordered `(+1, -1, +2, -2, …)`: spatial mode `i` (1-based) with
//! polarization `+` sits at index `2(i-1)`, with `-` at `2(i-1)+1`.
//!
//! * `P₀ = Σ (N₊ᵢ - N₋ᵢ)/2`, `P₊ = Σ a⁺₊ᵢ a₋ᵢ`, `P₋ = P₊†`;
//! * `P₁ = (P₊ + P₋)/2`, `P₂ = (P₊ - P₋)/(2i)`, `P² = P₀² + P₁² + P₂²`;
//! * `X⁺ᵢⱼ = a⁺₊ᵢa⁺₋ⱼ - a⁺₋ᵢa⁺₊ⱼ` (P-scalar pairs),
//!   `Y⁺ᵢⱼ = (a⁺₊ᵢa⁺₋ⱼ + a⁺₋ᵢa⁺₊ⱼ)/2` (P₀-scalar pairs).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::{self, FockBasis, Ladder, OccupationState, OperatorMatrix};
use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default classification tolerance for constructed pure states.
pub const PURE_TOL: f64 = 1e-8;
/// Default classification tolerance for user-supplied density matrices.
pub const MIXED_TOL: f64 = 1e-6;
/// Largest acceptable norm lost by truncating a squeezed state.
pub const LEAKAGE_THRESHOLD: f64 = 1e-10;

/// Polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pol {
    Plus,
    Minus,
}

/// Fock basis of `m` spatial modes with two polarizations each.
#[derive(Debug, Clone)]
pub struct PolarizedBasis {
    m: usize,
    fock: FockBasis,
}

impl PolarizedBasis {
    pub fn new(m: usize, n_max: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one spatial mode"));
        }
        Ok(Self { m, fock: fock::build_basis(2 * m, n_max)? })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> u32 {
        self.fock.n_max()
    }

    pub fn fock(&self) -> &FockBasis {
        &self.fock
    }

    pub fn dim(&self) -> usize {
        self.fock.dim()
    }

    /// Fock mode index of `(α, i)`, `i` 1-based.
    pub fn mode(&self, pol: Pol, i: usize) -> Result<usize> {
        if i == 0 || i > self.m {
            return Err(Error::InvalidMode { mode: i, modes: self.m });
        }
        Ok(2 * (i - 1) + usize::from(pol == Pol::Minus))
    }

    /// Occupation vector from `(n₊ᵢ, n₋ᵢ)` pairs.
    pub fn occupation(&self, pairs: &[(u32, u32)]) -> Result<OccupationState> {
        if pairs.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: pairs.len() });
        }
        Ok(OccupationState(pairs.iter().flat_map(|&(p, q)| [p, q]).collect()))
    }

    pub fn ket(&self, pairs: &[(u32, u32)]) -> Result<Vec<Complex64>> {
        let occ = self.occupation(pairs)?;
        self.fock.ket(&occ).ok_or(Error::InvalidArgument("occupation outside the truncation"))
    }

    pub fn vacuum(&self) -> Vec<Complex64> {
        let mut v = alloc::vec![ZERO; self.dim()];
        v[0] = ONE;
        v
    }

    /// Basis indices with total photon number `n`.
    pub fn shell(&self, n: u32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.fock.state(i).total() == n).collect()
    }

    /// `(N₊, N₋)` summed over spatial modes.
    fn polarization_counts(&self, state: &OccupationState) -> (u32, u32) {
        let plus = state.0.iter().step_by(2).sum();
        let minus = state.0.iter().skip(1).step_by(2).sum();
        (plus, minus)
    }
}

/// `a⁺_{α i}` creation/annihilation word helper.
fn word2(basis: &PolarizedBasis, first: (Pol, usize), second: (Pol, usize), create_both: bool) -> Result<OperatorMatrix> {
    let a = basis.mode(first.0, first.1)?;
    let b = basis.mode(second.0, second.1)?;
    let word = if create_both { [Ladder::Create(a), Ladder::Create(b)] } else { [Ladder::Create(a), Ladder::Annihilate(b)] };
    basis.fock.word_op(&word)
}

/// Quasispin operators of one spatial mode.
#[derive(Debug, Clone)]
pub struct ModeQuasispin {
    pub p0: OperatorMatrix,
    pub p_plus: OperatorMatrix,
    pub p_minus: OperatorMatrix,
}

/// Total and per-mode quasispin operators.
#[derive(Debug, Clone)]
pub struct QuasispinOps {
    pub p0: OperatorMatrix,
    pub p_plus: OperatorMatrix,
    pub p_minus: OperatorMatrix,
    /// `(P₊ + P₋)/2`
    pub p1: OperatorMatrix,
    /// `(P₊ - P₋)/(2i)`
    pub p2: OperatorMatrix,
    /// `P² = P₀² + P₁² + P₂²`
    pub casimir: OperatorMatrix,
    pub n_total: OperatorMatrix,
    pub per_mode: Vec<ModeQuasispin>,
}

impl QuasispinOps {
    /// `[P₀, P₁, P₂]`.
    pub fn components(&self) -> [&OperatorMatrix; 3] {
        [&self.p0, &self.p1, &self.p2]
    }
}

pub fn build_quasispin(basis: &PolarizedBasis) -> Result<QuasispinOps> {
    let tag = basis.fock.tag();
    let dim = basis.dim();
    let zero = OperatorMatrix::new(tag, CMatrix::zeros(dim, dim));
    let (mut p0, mut p_plus) = (zero.clone(), zero);
    let mut per_mode = Vec::with_capacity(basis.m);
    for i in 1..=basis.m {
        let (plus, minus) = (basis.mode(Pol::Plus, i)?, basis.mode(Pol::Minus, i)?);
        let p0_i = basis.fock.diagonal_op(|s| 0.5 * (f64::from(s.get(plus)) - f64::from(s.get(minus))));
        let pp_i = word2(basis, (Pol::Plus, i), (Pol::Minus, i), false)?;
        p0 = p0.add(&p0_i)?;
        p_plus = p_plus.add(&pp_i)?;
        per_mode.push(ModeQuasispin { p0: p0_i, p_minus: pp_i.adjoint(), p_plus: pp_i });
    }
    let p_minus = p_plus.adjoint();
    let p1 = p_plus.add(&p_minus)?.scale_re(0.5);
    let p2 = p_plus.sub(&p_minus)?.scale(Complex64::new(0.0, -0.5));
    let casimir = p0.mul(&p0)?.add(&p1.mul(&p1)?)?.add(&p2.mul(&p2)?)?;
    let n_total = fock::total_number_op(&basis.fock);
    Ok(QuasispinOps { p0, p_plus, p_minus, p1, p2, casimir, n_total, per_mode })
}

/// su(2) closure residuals of [`QuasispinOps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasispinReport {
    pub raising: f64,
    pub lowering: f64,
    /// `[P₊, P₋] - 2P₀`
    pub ladder: f64,
    /// `P² - P₀² - (P₊P₋ + P₋P₊)/2`
    pub casimir_identity: f64,
}

impl QuasispinReport {
    pub fn max_residual(&self) -> f64 {
        self.raising.max(self.lowering).max(self.ladder).max(self.casimir_identity)
    }
}

pub fn verify_quasispin(q: &QuasispinOps) -> Result<QuasispinReport> {
    let raising = q.p0.commutator(&q.p_plus)?.sub(&q.p_plus)?.max_abs();
    let lowering = q.p0.commutator(&q.p_minus)?.add(&q.p_minus)?.max_abs();
    let ladder = q.p_plus.commutator(&q.p_minus)?.sub(&q.p0.scale_re(2.0))?.max_abs();
    let alt = q.p0.mul(&q.p0)?.add(&q.p_plus.anticommutator(&q.p_minus)?.scale_re(0.5))?;
    let casimir_identity = q.casimir.sub(&alt)?.max_abs();
    Ok(QuasispinReport { raising, lowering, ladder, casimir_identity })
}

/// `X⁺ᵢⱼ = a⁺₊ᵢa⁺₋ⱼ - a⁺₋ᵢa⁺₊ⱼ`, evaluated literally.
pub fn x_plus(basis: &PolarizedBasis, i: usize, j: usize) -> Result<OperatorMatrix> {
    word2(basis, (Pol::Plus, i), (Pol::Minus, j), true)?.sub(&word2(basis, (Pol::Minus, i), (Pol::Plus, j), true)?)
}

/// `Y⁺ᵢⱼ = (a⁺₊ᵢa⁺₋ⱼ + a⁺₋ᵢa⁺₊ⱼ)/2`.
pub fn y_plus(basis: &PolarizedBasis, i: usize, j: usize) -> Result<OperatorMatrix> {
    Ok(word2(basis, (Pol::Plus, i), (Pol::Minus, j), true)?
        .add(&word2(basis, (Pol::Minus, i), (Pol::Plus, j), true)?)?
        .scale_re(0.5))
}

/// Polarization-blind hopping `E(i,j) = Σ_α a⁺_{αi} a_{αj}`.
pub fn hopping(basis: &PolarizedBasis, i: usize, j: usize) -> Result<OperatorMatrix> {
    word2(basis, (Pol::Plus, i), (Pol::Plus, j), false)?.add(&word2(basis, (Pol::Minus, i), (Pol::Minus, j), false)?)
}

/// Biphoton cluster operators and `u(m)` generators.
#[derive(Debug, Clone)]
pub struct ClusterOps {
    /// `X⁺(i,j)` for `1 ≤ i ≤ j ≤ m`.
    pub x_plus: BTreeMap<(usize, usize), OperatorMatrix>,
    /// `Y⁺(i,j)` for `1 ≤ i ≤ j ≤ m`.
    pub y_plus: BTreeMap<(usize, usize), OperatorMatrix>,
    /// `E(i,j)` for all `i, j`.
    pub hopping: BTreeMap<(usize, usize), OperatorMatrix>,
}

pub fn build_clusters(basis: &PolarizedBasis) -> Result<ClusterOps> {
    let (mut xs, mut ys, mut es) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for i in 1..=basis.m {
        for j in 1..=basis.m {
            if i <= j {
                xs.insert((i, j), x_plus(basis, i, j)?);
                ys.insert((i, j), y_plus(basis, i, j)?);
            }
            es.insert((i, j), hopping(basis, i, j)?);
        }
    }
    Ok(ClusterOps { x_plus: xs, y_plus: ys, hopping: es })
}

/// A pure state or an explicit density matrix on a polarized basis.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(Vec<Complex64>),
    Mixed(CMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed(rho) => rho.rows(),
        }
    }

    /// Normalized pure state built from an unnormalized vector.
    pub fn pure_normalized(v: &[Complex64]) -> Result<Self> {
        let n = linalg::norm(v);
        if n == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(Self::Pure(linalg::normalized(v)))
    }

    /// Equal-weight or weighted mixture of pure states.
    pub fn mixture(weights: &[f64], states: &[Vec<Complex64>]) -> Result<Self> {
        let dim = states.first().map_or(0, Vec::len);
        let mut rho = CMatrix::zeros(dim, dim);
        for (w, psi) in weights.iter().zip(states) {
            if psi.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
            }
            rho = rho.add(&linalg::outer(psi).scale(Complex64::new(*w, 0.0)));
        }
        Ok(Self::Mixed(rho))
    }

    /// Checks normalization (and Hermiticity, unit trace, positivity for `ρ`).
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        match self {
            Self::Pure(v) => {
                let n = linalg::norm(v);
                if (n - 1.0).abs() > fock::NORM_TOL {
                    return Err(Error::NotNormalized { norm: n });
                }
            }
            Self::Mixed(rho) => {
                let deviation = rho.hermitian_deviation();
                if deviation > 1e-10 {
                    return Err(Error::NotHermitian { deviation });
                }
                let tr = rho.trace().re;
                if (tr - 1.0).abs() > 1e-10 {
                    return Err(Error::NotNormalized { norm: tr });
                }
                let lowest = linalg::eigh(rho).values.first().copied().unwrap_or(0.0);
                if lowest < -1e-10 {
                    return Err(Error::InvalidArgument("density matrix is not positive semidefinite"));
                }
            }
        }
        Ok(())
    }

    /// `Tr[ρ A]`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        match self {
            Self::Pure(v) => linalg::vdot(v, &a.matvec(v)),
            Self::Mixed(rho) => rho.mul(a).trace(),
        }
    }

    /// `⟨A^s⟩` for `s = 1..=s_max`.
    pub fn power_moments(&self, a: &CMatrix, s_max: usize) -> Vec<Complex64> {
        match self {
            Self::Pure(v) => {
                let mut w = v.clone();
                (0..s_max)
                    .map(|_| {
                        w = a.matvec(&w);
                        linalg::vdot(v, &w)
                    })
                    .collect()
            }
            Self::Mixed(rho) => {
                let mut x = rho.clone();
                (0..s_max)
                    .map(|_| {
                        x = x.mul(a);
                        x.trace()
                    })
                    .collect()
            }
        }
    }

    /// `S ρ S†` for `S = exp(-iφ n̂·P⃗)`.
    fn rotated(&self, rot: &Rotator, angle: f64, axis: [f64; 3]) -> Self {
        match self {
            Self::Pure(v) => Self::Pure(rot.apply(angle, axis, v)),
            Self::Mixed(rho) => {
                let e = linalg::eigh(rho);
                let dim = rho.rows();
                let mut out = CMatrix::zeros(dim, dim);
                for (c, &w) in e.values.iter().enumerate() {
                    if w.abs() <= 1e-15 {
                        continue;
                    }
                    let moved = rot.apply(angle, axis, &e.vectors.column(c));
                    out = out.add(&linalg::outer(&moved).scale(Complex64::new(w, 0.0)));
                }
                Self::Mixed(out)
            }
        }
    }

    /// `max |ρ₁ - ρ₂|` entrywise.
    fn distance(&self, other: &Self) -> f64 {
        let dense = |s: &Self| match s {
            Self::Pure(v) => linalg::outer(v),
            Self::Mixed(rho) => rho.clone(),
        };
        match (self, other) {
            (Self::Pure(a), Self::Pure(b)) => {
                let mut worst = 0.0f64;
                for (i, ai) in a.iter().enumerate() {
                    for (j, aj) in a.iter().enumerate() {
                        let d = ai * aj.conj() - b[i] * b[j].conj();
                        worst = worst.max(d.norm());
                    }
                }
                worst
            }
            _ => dense(self).sub(&dense(other)).max_abs(),
        }
    }
}

/// `𝒫 = |⟨P⃗⟩| / (⟨N⟩/2)`, zero when `⟨N⟩ = 0`.
pub fn polarization_degree(state: &QuantumState, q: &QuasispinOps) -> Result<f64> {
    state.validate(q.p0.dim())?;
    let n = state.expect(q.n_total.matrix()).re;
    if n.abs() <= 1e-300 {
        return Ok(0.0);
    }
    let len = q.components().iter().map(|p| state.expect(p.matrix()).re.powi(2)).sum::<f64>().sqrt();
    Ok(len / (0.5 * n))
}

/// `⟨P_α^s⟩` for `α = 0, 1, 2` and `s = 1..=s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub s_max: usize,
    /// `values[α][s-1]` (real parts).
    pub values: [Vec<f64>; 3],
    /// Largest imaginary part encountered (Hermitian powers give zero).
    pub imag_residue: f64,
}

impl MomentTable {
    pub fn max_abs(&self, alpha: usize) -> f64 {
        self.values[alpha].iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_all(&self) -> f64 {
        (0..3).map(|a| self.max_abs(a)).fold(0.0, f64::max)
    }

    pub fn first_moments(&self) -> [f64; 3] {
        [self.values[0][0], self.values[1][0], self.values[2][0]]
    }
}

pub fn moment_profile(state: &QuantumState, q: &QuasispinOps, s_max: usize) -> Result<MomentTable> {
    if s_max == 0 {
        return Err(Error::InvalidArgument("moment order S must be at least 1"));
    }
    state.validate(q.p0.dim())?;
    let mut imag_residue = 0.0f64;
    let mut values: [Vec<f64>; 3] = Default::default();
    for (alpha, p) in q.components().iter().enumerate() {
        let m = state.power_moments(p.matrix(), s_max);
        imag_residue = m.iter().map(|z| z.im.abs()).fold(imag_residue, f64::max);
        values[alpha] = m.iter().map(|z| z.re).collect();
    }
    Ok(MomentTable { s_max, values, imag_residue })
}

/// Verdict of [`classify_ul`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UlVerdict {
    Polarized,
    WeakUl,
    P0Scalar,
    PScalar,
    StrongUlInvariance,
}

impl UlVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Polarized => "polarized",
            Self::WeakUl => "weak-UL",
            Self::P0Scalar => "P0-scalar",
            Self::PScalar => "P-scalar",
            Self::StrongUlInvariance => "strong-UL-invariance",
        }
    }
}

/// Group family an invariance residual was measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupFamily {
    /// Haar-random elements of SU(2)_p.
    Su2,
    /// `exp(i b₀ P₀)` on a grid plus `exp(iπ P₂)`.
    P0Subgroup,
}

impl GroupFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Su2 => "SU2_p",
            Self::P0Subgroup => "P0_subgroup",
        }
    }
}

/// Invariance of the state under one group element `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceResidual {
    pub family: GroupFamily,
    /// Rotation as `(φ, n̂)`: `S = exp(-iφ n̂·P⃗)`.
    pub angle: f64,
    pub axis: [f64; 3],
    /// `max |SρS† - ρ|`.
    pub state_residual: f64,
    /// `max_α |⟨P_α⟩_{SρS†}|`: first-moment invariance.
    pub first_moment: f64,
}

/// Result of [`classify_ul`].
#[derive(Debug, Clone, PartialEq)]
pub struct UlReport {
    pub polarization_degree: f64,
    pub moments: MomentTable,
    pub verdict: UlVerdict,
    pub invariance: Vec<InvarianceResidual>,
    pub seed: u64,
    pub tol: f64,
}

impl UlReport {
    pub fn max_state_residual(&self, family: GroupFamily) -> f64 {
        self.invariance.iter().filter(|r| r.family == family).map(|r| r.state_residual).fold(0.0, f64::max)
    }

    pub fn max_first_moment(&self) -> f64 {
        self.invariance.iter().map(|r| r.first_moment).fold(0.0, f64::max)
    }
}

/// Haar-uniform rotation `(φ, n̂)` from a uniform unit quaternion
/// (Marsaglia's method).
pub fn haar_rotation(rng: &mut impl Rng) -> (f64, [f64; 3]) {
    let disk = |rng: &mut dyn FnMut() -> f64| loop {
        let (x, y) = (2.0 * rng() - 1.0, 2.0 * rng() - 1.0);
        let s = x * x + y * y;
        if s < 1.0 && s > 0.0 {
            return (x, y, s);
        }
    };
    let mut draw = || rng.random::<f64>();
    let (x1, x2, s1) = disk(&mut draw);
    let (x3, x4, s2) = disk(&mut draw);
    let k = ((1.0 - s1) / s2).sqrt();
    let quat = [x1, x2, x3 * k, x4 * k];
    let w = quat[0].clamp(-1.0, 1.0);
    let angle = 2.0 * w.acos();
    let vn = (quat[1] * quat[1] + quat[2] * quat[2] + quat[3] * quat[3]).sqrt();
    if vn == 0.0 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (angle, [quat[1] / vn, quat[2] / vn, quat[3] / vn])
}

/// SU(2)_p rotations `exp(-iφ n̂·P⃗)` applied through the ZYZ Euler form
/// `exp(-iαP₀) exp(-iβP₂) exp(-iγP₀)`: `P₀` is diagonal and `P₂` is
/// diagonalized once.
pub struct Rotator {
    p0: Vec<f64>,
    p2: linalg::Eigh,
}

impl Rotator {
    pub fn new(q: &QuasispinOps) -> Self {
        let p0 = q.p0.matrix().diagonal().iter().map(|z| z.re).collect();
        Self { p0, p2: linalg::eigh(q.p2.matrix()) }
    }

    /// Euler angles `(α, β, γ)` of the rotation `(φ, n̂)`, `n̂ = (n₁, n₂, n₀)`.
    pub fn euler(angle: f64, axis: [f64; 3]) -> (f64, f64, f64) {
        let (sin, w) = (0.5 * angle).sin_cos();
        let (x, y, z) = (sin * axis[0], sin * axis[1], sin * axis[2]);
        // spin-1/2 matrix: U₀₀ = w - iz = cos(β/2) e^{-i(α+γ)/2}, U₁₀ = y - ix = sin(β/2) e^{i(α-γ)/2}
        let beta = 2.0 * (x * x + y * y).sqrt().atan2((w * w + z * z).sqrt());
        let sum = 2.0 * z.atan2(w);
        let diff = 2.0 * (-x).atan2(y);
        (0.5 * (sum + diff), beta, 0.5 * (sum - diff))
    }

    fn phase_p0(&self, a: f64, v: &mut [Complex64]) {
        for (z, m) in v.iter_mut().zip(&self.p0) {
            *z *= Complex64::from_polar(1.0, -a * m);
        }
    }

    fn apply_p2(&self, b: f64, v: &[Complex64]) -> Vec<Complex64> {
        let vecs = &self.p2.vectors;
        let coeffs: Vec<Complex64> = (0..vecs.cols())
            .map(|k| {
                let c: Complex64 = (0..vecs.rows()).map(|r| vecs[(r, k)].conj() * v[r]).sum();
                c * Complex64::from_polar(1.0, -b * self.p2.values[k])
            })
            .collect();
        (0..vecs.rows()).map(|r| (0..vecs.cols()).map(|k| vecs[(r, k)] * coeffs[k]).sum()).collect()
    }

    /// `exp(-iφ n̂·P⃗) v`.
    pub fn apply(&self, angle: f64, axis: [f64; 3], v: &[Complex64]) -> Vec<Complex64> {
        let (alpha, beta, gamma) = Self::euler(angle, axis);
        let mut w = v.to_vec();
        self.phase_p0(gamma, &mut w);
        let mut w = self.apply_p2(beta, &w);
        self.phase_p0(alpha, &mut w);
        w
    }
}

fn invariance(state: &QuantumState, q: &QuasispinOps, rot: &Rotator, family: GroupFamily, angle: f64, axis: [f64; 3]) -> InvarianceResidual {
    let moved = state.rotated(rot, angle, axis);
    let state_residual = moved.distance(state);
    let first_moment = q.components().iter().map(|p| moved.expect(p.matrix()).re.abs()).fold(0.0, f64::max);
    InvarianceResidual { family, angle, axis, state_residual, first_moment }
}

/// Invariance residuals under `samples` Haar elements of SU(2)_p and under the
/// P₀ subgroup (`samples` grid points of `exp(ib₀P₀)` plus `exp(iπP₂)`).
pub fn invariance_residuals(state: &QuantumState, q: &QuasispinOps, samples: usize, seed: u64) -> Vec<InvarianceResidual> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = Rotator::new(q);
    let mut out = Vec::with_capacity(2 * samples + 1);
    for _ in 0..samples {
        let (angle, axis) = haar_rotation(&mut rng);
        out.push(invariance(state, q, &rot, GroupFamily::Su2, angle, axis));
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    for k in 0..samples {
        // exp(i b₀ P₀) = exp(-i φ P₀) with φ = -b₀
        let b0 = two_pi * (k as f64 + 0.5) / samples as f64;
        out.push(invariance(state, q, &rot, GroupFamily::P0Subgroup, -b0, [0.0, 0.0, 1.0]));
    }
    out.push(invariance(state, q, &rot, GroupFamily::P0Subgroup, -core::f64::consts::PI, [0.0, 1.0, 0.0]));
    out
}

/// Unpolarized-light taxonomy. Rules, first match wins:
/// polarized if `𝒫 > tol`; P-scalar if every `|⟨P_α^s⟩| ≤ tol`; P₀-scalar if
/// every `|⟨P₀^s⟩| ≤ tol`; strong-UL-invariance if `SρS† = ρ` within `tol`
/// over all SU(2)_p samples or over the whole P₀ family; weak-UL otherwise.
pub fn classify_ul(state: &QuantumState, q: &QuasispinOps, s_max: usize, tol: f64, samples: usize, seed: u64) -> Result<UlReport> {
    let polarization_degree = polarization_degree(state, q)?;
    let moments = moment_profile(state, q, s_max)?;
    let invariance = invariance_residuals(state, q, samples, seed);
    let family_ok = |family: GroupFamily| {
        invariance.iter().filter(|r| r.family == family).all(|r| r.state_residual <= tol)
            && invariance.iter().any(|r| r.family == family)
    };
    let verdict = if polarization_degree > tol {
        UlVerdict::Polarized
    } else if moments.max_abs_all() <= tol {
        UlVerdict::PScalar
    } else if moments.max_abs(0) <= tol {
        UlVerdict::P0Scalar
    } else if family_ok(GroupFamily::Su2) || family_ok(GroupFamily::P0Subgroup) {
        UlVerdict::StrongUlInvariance
    } else {
        UlVerdict::WeakUl
    };
    Ok(UlReport { polarization_degree, moments, verdict, invariance, seed, tol })
}

/// `exp(β Y⁺₁₁ - β* Y₁₁)|0⟩ = Σ_k (e^{iφ} tanh r)^k / cosh r |k, k⟩` on the
/// `(+1, -1)` pair, `β = r e^{iφ}`, truncated to `2k ≤ n_max` and renormalized.
pub fn tmsv_state(beta: Complex64, basis: &PolarizedBasis) -> Result<Vec<Complex64>> {
    let kmax = basis.n_max() / 2;
    let t = beta.norm().tanh();
    let leakage = t.powi(2 * (kmax as i32 + 1));
    if leakage > LEAKAGE_THRESHOLD {
        return Err(Error::Leakage { leakage, threshold: LEAKAGE_THRESHOLD });
    }
    let ratio = Complex64::from_polar(t, beta.arg());
    let mut psi = alloc::vec![ZERO; basis.dim()];
    let mut amp = Complex64::new(1.0 / beta.norm().cosh(), 0.0);
    let mut pairs = alloc::vec![(0u32, 0u32); basis.m];
    for k in 0..=kmax {
        pairs[0] = (k, k);
        let idx = basis.fock.index_of(&basis.occupation(&pairs)?).ok_or(Error::InvalidArgument("pair state outside basis"))?;
        psi[idx] = amp;
        amp *= ratio;
    }
    Ok(linalg::normalized(&psi))
}

/// One `(α, i, β, j, g)` term `g a⁺_{αi} a⁺_{βj}` of the pair-creation Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoupling {
    pub alpha: Pol,
    pub i: usize,
    pub beta: Pol,
    pub j: usize,
    pub g: Complex64,
}

/// `H = Σ_i ω_i (N₊ᵢ + N₋ᵢ) + Σ g a⁺_{αi} a⁺_{βj} + h.c.`
pub fn quadratic_hamiltonian(freqs: &[f64], couplings: &[PairCoupling], basis: &PolarizedBasis) -> Result<OperatorMatrix> {
    if freqs.len() != basis.m {
        return Err(Error::DimensionMismatch { expected: basis.m, found: freqs.len() });
    }
    let mut h = basis.fock.diagonal_op(|s| {
        freqs.iter().enumerate().map(|(k, w)| w * f64::from(s.get(2 * k) + s.get(2 * k + 1))).sum()
    });
    for c in couplings {
        let term = word2(basis, (c.alpha, c.i), (c.beta, c.j), true)?;
        h = h.add(&term.scale(c.g))?.add(&term.adjoint().scale(c.g.conj()))?;
    }
    Ok(h)
}

/// Pair-creation layout `g^{+-}_{ij} = g̃_{ij}`, `g^{-+}_{ij} = ±g̃_{ij}`:
/// `symmetric = true` gives `Σ 2g̃ Y⁺ᵢⱼ` (P₀-scalar pairs), `false` gives
/// `Σ g̃ X⁺ᵢⱼ` (P-scalar pairs).
pub fn pair_preset(g_tilde: &[(usize, usize, Complex64)], symmetric: bool) -> Vec<PairCoupling> {
    let sign = if symmetric { 1.0 } else { -1.0 };
    g_tilde
        .iter()
        .flat_map(|&(i, j, g)| {
            [
                PairCoupling { alpha: Pol::Plus, i, beta: Pol::Minus, j, g },
                PairCoupling { alpha: Pol::Minus, i, beta: Pol::Plus, j, g: g * sign },
            ]
        })
        .collect()
}

/// Multiplicity of spin `p` (stored as `2p`) inside one photon-number shell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShellMultiplicities {
    pub n: u32,
    /// From the spectrum of `P²` restricted to the shell.
    pub numeric: BTreeMap<u32, usize>,
    /// From counting basis states per weight `μ`.
    pub counted: BTreeMap<u32, usize>,
}

/// Rank test of the highest-weight space `(p, μ = p)` for `m = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighestWeightCheck {
    pub n: u32,
    pub two_p: u32,
    pub rank: usize,
    pub expected: usize,
    /// `max(‖P₊v‖, ‖(P₀ - p)v‖)` over the generated vectors.
    pub weight_residual: f64,
}

/// Outcome of [`duality_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// Interior `max |[P_α, X⁺(i,j)]|, |[P_α, E(i,j)]|, |[P₀, Y⁺(i,j)]|`.
    pub commutant_residual: f64,
    pub shells: Vec<ShellMultiplicities>,
    pub highest_weight: Vec<HighestWeightCheck>,
}

impl DualityReport {
    pub fn multiplicities_match(&self) -> bool {
        self.shells.iter().all(|s| s.numeric == s.counted)
    }

    pub fn ranks_match(&self) -> bool {
        self.highest_weight.iter().all(|c| c.rank == c.expected)
    }
}

/// Multiplicities by counting weights: `mult(p) = dim(μ = p) - dim(μ = p+1)`.
pub fn counted_multiplicities(basis: &PolarizedBasis, n: u32) -> BTreeMap<u32, usize> {
    let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
    for i in basis.shell(n) {
        let (plus, minus) = basis.polarization_counts(basis.fock.state(i));
        *dims.entry(i64::from(plus) - i64::from(minus)).or_default() += 1;
    }
    let mut out = BTreeMap::new();
    for two_p in (0..=n).rev() {
        if (n - two_p) % 2 != 0 {
            continue;
        }
        let here = dims.get(&i64::from(two_p)).copied().unwrap_or(0);
        let above = dims.get(&(i64::from(two_p) + 2)).copied().unwrap_or(0);
        if here > above {
            out.insert(two_p, here - above);
        }
    }
    out
}

/// Multiplicities from the spectrum of `P²` on one shell.
pub fn numeric_multiplicities(basis: &PolarizedBasis, q: &QuasispinOps, n: u32) -> BTreeMap<u32, usize> {
    let idx = basis.shell(n);
    let block = q.casimir.matrix().select(&idx, &idx);
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for lambda in linalg::eigh(&block).values {
        // λ = p(p+1)  =>  2p = √(4λ+1) - 1
        let two_p = ((4.0 * lambda.max(0.0) + 1.0).sqrt() - 1.0).round() as u32;
        *counts.entry(two_p).or_default() += 1;
    }
    counts.into_iter().map(|(two_p, c)| (two_p, c / (two_p as usize + 1))).collect()
}

pub fn duality_check(basis: &PolarizedBasis, q: &QuasispinOps, clusters: &ClusterOps, n_cut: u32) -> Result<DualityReport> {
    if basis.m > 3 {
        return Err(Error::InvalidArgument("duality check supports m <= 3"));
    }
    if n_cut + 2 > basis.n_max() {
        return Err(Error::InvalidArgument("duality check needs n_cut <= n_max - 2"));
    }
    let keep = basis.fock.interior(2);
    let masked = |m: OperatorMatrix| m.matrix().max_abs_masked(|r| keep[r], |c| keep[c]);
    let mut commutant_residual = 0.0f64;
    for p in [&q.p0, &q.p_plus, &q.p_minus] {
        for x in clusters.x_plus.values().chain(clusters.hopping.values()) {
            commutant_residual = commutant_residual.max(masked(p.commutator(x)?));
        }
    }
    for y in clusters.y_plus.values() {
        commutant_residual = commutant_residual.max(masked(q.p0.commutator(y)?));
    }

    let shells = (0..=n_cut)
        .map(|n| ShellMultiplicities {
            n,
            numeric: numeric_multiplicities(basis, q, n),
            counted: counted_multiplicities(basis, n),
        })
        .collect();

    let mut highest_weight = Vec::new();
    if basis.m == 2 {
        let x12 = &clusters.x_plus[&(1, 2)];
        let e21 = &clusters.hopping[&(2, 1)];
        let seed_mode = basis.mode(Pol::Plus, 1)?;
        for n in 0..=n_cut {
            for two_p in (0..=n).filter(|tp| (n - tp) % 2 == 0) {
                // (X⁺₁₂)^t E(2,1)^k (a⁺₊₁)^{2p} |0⟩, k = 0..=2p, N = 2t + 2p
                let pairs = (n - two_p) / 2;
                let word = alloc::vec![Ladder::Create(seed_mode); two_p as usize];
                let seed = basis.fock.word_op(&word)?.matrix().matvec(&basis.vacuum());
                let mut vectors = Vec::new();
                let mut current = seed;
                for _k in 0..=two_p {
                    let mut v = current.clone();
                    for _ in 0..pairs {
                        v = x12.matrix().matvec(&v);
                    }
                    vectors.push(v);
                    current = e21.matrix().matvec(&current);
                }
                let p = f64::from(two_p) / 2.0;
                let weight_residual = vectors
                    .iter()
                    .map(|v| {
                        let scale = linalg::norm(v).max(1e-300);
                        let up = linalg::norm(&q.p_plus.matrix().matvec(v));
                        let p0v = q.p0.matrix().matvec(v);
                        let diff: Vec<Complex64> = p0v.iter().zip(v).map(|(a, b)| a - b * p).collect();
                        up.max(linalg::norm(&diff)) / scale
                    })
                    .fold(0.0, f64::max);
                let rank = linalg::rank(&vectors, 1e-10);
                let expected = counted_multiplicities(basis, n).get(&two_p).copied().unwrap_or(0);
                highest_weight.push(HighestWeightCheck { n, two_p, rank, expected, weight_residual });
            }
        }
    }
    Ok(DualityReport { commutant_residual, shells, highest_weight })
}

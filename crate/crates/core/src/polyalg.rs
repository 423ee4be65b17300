//! Polynomial deformations of su(2) and su(1,1) realized on invariant sectors.
//!
//! Two realizations are provided:
//!
//! * `su_pd(2)` on the two-mode space of the harmonic-generation model, with
//!   `Y₀ = (N₁ - N₀)/(1+n)`, `Y₊ = (a⁺₁)ⁿ a₀` and structure polynomial
//!   `Ψ(y; r₁) = (r₁ - y + 1)(n y + r₁)^{(n)}`;
//! * `su_pd(1,1)` on one mode, with `Y₀ = N/n`, `Y₊ = (a⁺)ⁿ` and
//!   `Ψ(y) = (n y)^{(n)}`.
//!
//! In both cases `[Y₀, Y±] = ±Y±` and `[Y₋, Y₊] = Ψ(Y₀+1) - Ψ(Y₀)`.
//! Sector labels and structure values are exact rationals; floating point is
//! only used for matrix entries.
//!
//! Mode layout for the two-mode model: mode 0 is the pump `a₀`, mode 1 the
//! signal `a₁`, so occupation vectors read `[n₀, n₁]`.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::exact::ExactShiftCheck;
use crate::fock::{self, BasisTag, Ladder, OccupationState, OperatorMatrix};
use crate::linalg::CMatrix;
use crate::{rational_to_f64, Error, Rational, Result};

/// Pump mode index in two-mode occupation vectors.
pub const PUMP: usize = 0;
/// Signal mode index in two-mode occupation vectors.
pub const SIGNAL: usize = 1;

fn rat(x: i64) -> Rational {
    Rational::from_integer(x)
}

/// Falling factorial `a (a-1) ... (a-n+1)`.
pub fn falling_factorial(a: Rational, n: u32) -> Rational {
    (0..n).fold(Rational::one(), |acc, k| acc * (a - rat(i64::from(k))))
}

/// Invariant labels `(n, κ, s)` of one su_pd(2) sector.
///
/// The sector is spanned by `|n₁ = κ + nη, n₀ = s - η⟩`, `η = 0..=s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorLabel {
    n: u32,
    kappa: u32,
    s: u32,
}

impl SectorLabel {
    pub fn new(n: u32, kappa: u32, s: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("cluster order n must be at least 2"));
        }
        if kappa >= n {
            return Err(Error::InvalidArgument("kappa must satisfy 0 <= kappa < n"));
        }
        Ok(Self { n, kappa, s })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Eigenvalue of `R₀`: `(κ - s)/(1+n)`.
    pub fn l0(&self) -> Rational {
        Rational::new(i64::from(self.kappa) - i64::from(self.s), 1 + i64::from(self.n))
    }

    /// Eigenvalue of `R₁ = (N₁ + n N₀)/(1+n)`: `(κ + n s)/(1+n)`.
    pub fn l1(&self) -> Rational {
        Rational::new(i64::from(self.kappa) + i64::from(self.n) * i64::from(self.s), 1 + i64::from(self.n))
    }

    /// su(2) weight `j = s/2`.
    pub fn j(&self) -> Rational {
        Rational::new(i64::from(self.s), 2)
    }

    pub fn dim(&self) -> usize {
        self.s as usize + 1
    }

    /// Largest total occupation among the sector states (`κ + n s`).
    pub fn max_total(&self) -> u32 {
        self.kappa + self.n * self.s
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag::Sector { n: self.n, kappa: self.kappa, s: self.s }
    }

    /// Sector basis states `[n₀, n₁]` ordered by `η`.
    pub fn states(&self) -> Vec<OccupationState> {
        (0..=self.s).map(|eta| OccupationState(alloc::vec![self.s - eta, self.kappa + self.n * eta])).collect()
    }

    pub fn structure(&self) -> StructurePolynomial {
        StructurePolynomial::TwoMode { n: self.n }
    }
}

/// Structure polynomial `Ψ` of a polynomial algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructurePolynomial {
    /// `Ψ(y; r₁) = (r₁ - y + 1)(n y + r₁)^{(n)}` (su_pd(2)).
    TwoMode { n: u32 },
    /// `Ψ(y) = (n y)^{(n)}` (su_pd(1,1)); `r₁` is ignored.
    OneMode { n: u32 },
}

impl StructurePolynomial {
    pub fn n(&self) -> u32 {
        match *self {
            Self::TwoMode { n } | Self::OneMode { n } => n,
        }
    }

    pub fn psi(&self, y: Rational, r1: Rational) -> Rational {
        match *self {
            Self::TwoMode { n } => {
                (r1 - y + Rational::one()) * falling_factorial(rat(i64::from(n)) * y + r1, n)
            }
            Self::OneMode { n } => falling_factorial(rat(i64::from(n)) * y, n),
        }
    }

    /// `Ψ` at real arguments (mean-field manifold).
    pub fn psi_f64(&self, y: f64, r1: f64) -> f64 {
        let falling = |a: f64, n: u32| (0..n).fold(1.0, |acc, k| acc * (a - f64::from(k)));
        match *self {
            Self::TwoMode { n } => (r1 - y + 1.0) * falling(f64::from(n) * y + r1, n),
            Self::OneMode { n } => falling(f64::from(n) * y, n),
        }
    }

    /// `Φ(y) = Ψ(y+1) - Ψ(y)`.
    pub fn phi(&self, y: Rational, r1: Rational) -> Rational {
        self.psi(y + Rational::one(), r1) - self.psi(y, r1)
    }

    /// Degree of `Ψ` in `y`.
    pub fn degree(&self) -> u32 {
        match *self {
            Self::TwoMode { n } => n + 1,
            Self::OneMode { n } => n,
        }
    }
}

/// `Ψ(y; r₁)` of the two-mode algebra.
pub fn psi_eval(n: u32, y: Rational, r1: Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::InvalidArgument("cluster order n must be at least 2"));
    }
    Ok(StructurePolynomial::TwoMode { n }.psi(y, r1))
}

/// Where an [`AlgebraRep`] lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepDomain {
    /// Finite, exactly invariant two-mode sector.
    Sector(SectorLabel),
    /// One-mode residue class `N ≡ κ (mod n)`, `N ≤ n_max` (a truncation of
    /// an infinite-dimensional representation).
    ResidueClass { n: u32, kappa: u32, n_max: u32 },
}

/// Matrices `(Y₀, Y₊, Y₋)` of a polynomial algebra on one invariant space.
#[derive(Debug, Clone)]
pub struct AlgebraRep {
    pub domain: RepDomain,
    pub structure: StructurePolynomial,
    pub l0: Rational,
    pub l1: Rational,
    /// Exact `Y₀` eigenvalue per basis vector.
    pub y0_values: Vec<Rational>,
    /// Basis states in Fock notation.
    pub states: Vec<OccupationState>,
    pub y0: OperatorMatrix,
    pub y_plus: OperatorMatrix,
    pub y_minus: OperatorMatrix,
}

impl AlgebraRep {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn tag(&self) -> BasisTag {
        self.y0.basis()
    }

    /// Occupation margin excluded from residual checks: `n (n+1)` for
    /// truncated one-mode reps, zero for exact sectors.
    pub fn mask_margin(&self) -> u32 {
        match self.domain {
            RepDomain::Sector(_) => 0,
            RepDomain::ResidueClass { n, .. } => n * (n + 1),
        }
    }

    /// Rows/columns that take part in residual checks.
    pub fn interior(&self) -> Vec<bool> {
        match self.domain {
            RepDomain::Sector(_) => alloc::vec![true; self.dim()],
            RepDomain::ResidueClass { n_max, .. } => {
                let margin = self.mask_margin();
                self.states
                    .iter()
                    .map(|s| margin <= n_max && s.total() <= n_max - margin)
                    .collect()
            }
        }
    }

    /// `f(Y₀)` for an exact function of the eigenvalue.
    pub fn function_of_y0(&self, f: impl Fn(Rational) -> Rational) -> OperatorMatrix {
        let diag: Vec<f64> = self.y0_values.iter().map(|&y| rational_to_f64(f(y))).collect();
        OperatorMatrix::new(self.tag(), CMatrix::from_real_diag(&diag))
    }

    fn masked(&self, m: &OperatorMatrix) -> f64 {
        let keep = self.interior();
        m.matrix().max_abs_masked(|r| keep[r], |c| keep[c])
    }
}

fn sector_y0(sector: &SectorLabel) -> (Vec<Rational>, OperatorMatrix) {
    let values: Vec<Rational> = (0..=sector.s).map(|eta| sector.l0() + rat(i64::from(eta))).collect();
    let diag: Vec<f64> = values.iter().map(|&y| rational_to_f64(y)).collect();
    (values, OperatorMatrix::new(sector.tag(), CMatrix::from_real_diag(&diag)))
}

/// su_pd(2) generators on one sector, built from the structure polynomial:
/// `⟨η+1|Y₊|η⟩ = √Ψ(l₀+η+1; l₁)`, `Y₀ = diag(l₀+η)`.
///
/// Basis vectors are the normalized `(Y₊)^η|κ, s⟩`; the phase is fixed by
/// taking every sub-diagonal entry of `Y₊` positive.
pub fn build_supd2_rep(sector: SectorLabel) -> AlgebraRep {
    let structure = sector.structure();
    let (l0, l1) = (sector.l0(), sector.l1());
    let (y0_values, y0) = sector_y0(&sector);
    let dim = sector.dim();
    let mut yp = CMatrix::zeros(dim, dim);
    for eta in 0..sector.s as usize {
        let psi = structure.psi(l0 + rat(eta as i64 + 1), l1);
        yp[(eta + 1, eta)] = Complex64::new(rational_to_f64(psi).sqrt(), 0.0);
    }
    let y_plus = OperatorMatrix::new(sector.tag(), yp);
    let y_minus = y_plus.adjoint();
    AlgebraRep {
        domain: RepDomain::Sector(sector),
        structure,
        l0,
        l1,
        y0_values,
        states: sector.states(),
        y0,
        y_plus,
        y_minus,
    }
}

/// Same generators built independently from the Fock realization
/// `Y₊ = (a⁺₁)ⁿ a₀`, `Y₀ = (N₁ - N₀)/(1+n)` restricted to the sector states.
pub fn build_supd2_rep_fock(sector: SectorLabel) -> AlgebraRep {
    let states = sector.states();
    let n = sector.n as usize;
    let mut word = alloc::vec![Ladder::Create(SIGNAL); n];
    word.push(Ladder::Annihilate(PUMP));
    let y_plus = OperatorMatrix::new(sector.tag(), fock::word_matrix(&states, &word));
    let y0_values: Vec<Rational> = states
        .iter()
        .map(|s| Rational::new(i64::from(s.get(SIGNAL)) - i64::from(s.get(PUMP)), 1 + n as i64))
        .collect();
    let diag: Vec<f64> = y0_values.iter().map(|&y| rational_to_f64(y)).collect();
    let y0 = OperatorMatrix::new(sector.tag(), CMatrix::from_real_diag(&diag));
    let y_minus = y_plus.adjoint();
    AlgebraRep {
        domain: RepDomain::Sector(sector),
        structure: sector.structure(),
        l0: sector.l0(),
        l1: sector.l1(),
        y0_values,
        states,
        y0,
        y_plus,
        y_minus,
    }
}

/// Max entrywise difference between the `Y₀`, `Y±` of two reps.
pub fn rep_difference(a: &AlgebraRep, b: &AlgebraRep) -> Result<f64> {
    let d0 = a.y0.sub(&b.y0)?.max_abs();
    let dp = a.y_plus.sub(&b.y_plus)?.max_abs();
    let dm = a.y_minus.sub(&b.y_minus)?.max_abs();
    Ok(d0.max(dp).max(dm))
}

/// su_pd(1,1) generators on the residue class `N ≡ κ (mod n)`, `N ≤ n_max`:
/// `Y₊ = (a⁺)ⁿ`, `Y₀ = N/n`, `Ψ(Y₀) = (N)^{(n)}`.
pub fn build_supd11_rep(n: u32, kappa: u32, n_max: u32) -> Result<AlgebraRep> {
    if n < 2 {
        return Err(Error::InvalidArgument("cluster order n must be at least 2"));
    }
    if kappa >= n {
        return Err(Error::InvalidArgument("kappa must satisfy 0 <= kappa < n"));
    }
    if kappa > n_max {
        return Err(Error::InvalidArgument("n_max below the pseudovacuum occupation"));
    }
    let states: Vec<OccupationState> =
        (kappa..=n_max).step_by(n as usize).map(|occ| OccupationState(alloc::vec![occ])).collect();
    let tag = BasisTag::ResidueClass { n, kappa, n_max };
    let word = alloc::vec![Ladder::Create(0); n as usize];
    let y_plus = OperatorMatrix::new(tag, fock::word_matrix(&states, &word));
    let y_minus = y_plus.adjoint();
    let y0_values: Vec<Rational> = states.iter().map(|s| Rational::new(i64::from(s.get(0)), i64::from(n))).collect();
    let diag: Vec<f64> = y0_values.iter().map(|&y| rational_to_f64(y)).collect();
    let y0 = OperatorMatrix::new(tag, CMatrix::from_real_diag(&diag));
    Ok(AlgebraRep {
        domain: RepDomain::ResidueClass { n, kappa, n_max },
        structure: StructurePolynomial::OneMode { n },
        l0: Rational::new(i64::from(kappa), i64::from(n)),
        l1: Rational::zero(),
        y0_values,
        states,
        y0,
        y_plus,
        y_minus,
    })
}

/// Residuals of the defining relations of a polynomial algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutationReport {
    /// `max |[Y₀, Y₊] - Y₊|`
    pub raising: f64,
    /// `max |[Y₀, Y₋] + Y₋|`
    pub lowering: f64,
    /// `max |[Y₋, Y₊] - Φ(Y₀; R₁)|`
    pub structure: f64,
    /// Occupation margin masked at the truncation boundary.
    pub mask_margin: u32,
    pub tol: f64,
    pub pass: bool,
}

impl CommutationReport {
    pub fn max_residual(&self) -> f64 {
        self.raising.max(self.lowering).max(self.structure)
    }
}

pub fn verify_commutation(rep: &AlgebraRep, tol: f64) -> Result<CommutationReport> {
    let raising = rep.masked(&rep.y0.commutator(&rep.y_plus)?.sub(&rep.y_plus)?);
    let lowering = rep.masked(&rep.y0.commutator(&rep.y_minus)?.add(&rep.y_minus)?);
    let phi = rep.function_of_y0(|y| rep.structure.phi(y, rep.l1));
    let structure = rep.masked(&rep.y_minus.commutator(&rep.y_plus)?.sub(&phi)?);
    let pass = raising <= tol && lowering <= tol && structure <= tol;
    Ok(CommutationReport { raising, lowering, structure, mask_margin: rep.mask_margin(), tol, pass })
}

/// The Casimir `Ψ(Y₀; R₁) - Y₊Y₋` evaluated as a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirReport {
    /// Diagonal value (taken at the lowest basis vector).
    pub value: f64,
    /// `max |C - value·I|` over the checked block.
    pub deviation: f64,
    /// Exact expectation `Ψ(l₀; l₁)`, equal to `(s+1) κ^{(n)}` on su_pd(2) sectors.
    pub expected: Rational,
}

pub fn casimir_check(rep: &AlgebraRep) -> Result<CasimirReport> {
    let psi = rep.function_of_y0(|y| rep.structure.psi(y, rep.l1));
    let c = psi.sub(&rep.y_plus.mul(&rep.y_minus)?)?;
    let value = c.entry(0, 0).re;
    let shifted = c.sub(&OperatorMatrix::identity(rep.tag(), rep.dim()).scale_re(value))?;
    let deviation = rep.masked(&shifted);
    let expected = rep.structure.psi(rep.l0, rep.l1);
    Ok(CasimirReport { value, deviation, expected })
}

/// su(2) generators obtained from an su_pd(2) sector by square-root dressing:
/// `V₀ = Y₀ - R₀ - J`, `V₊ = Y₊ φ(V₀)^{1/2}`,
/// `φ(V₀) = (J + V₀ + 1)(J - V₀)/Ψ(Y₀+1; R₁)`.
#[derive(Debug, Clone)]
pub struct HpRep {
    pub sector: SectorLabel,
    pub j: Rational,
    /// Exact `φ` per basis vector; the top entry is 0 (numerator vanishes).
    pub phi: Vec<Rational>,
    pub v0: OperatorMatrix,
    pub v_plus: OperatorMatrix,
    pub v_minus: OperatorMatrix,
}

impl HpRep {
    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    /// `φ(V₀)^{-1/2}` with the top-of-sector entry set to zero, where `V₊`
    /// already annihilates the state.
    pub fn phi_inv_sqrt(&self) -> OperatorMatrix {
        let diag: Vec<f64> = self
            .phi
            .iter()
            .map(|&p| if p.is_zero() { 0.0 } else { 1.0 / rational_to_f64(p).sqrt() })
            .collect();
        OperatorMatrix::new(self.sector.tag(), CMatrix::from_real_diag(&diag))
    }
}

pub fn hp_map(rep: &AlgebraRep) -> Result<HpRep> {
    let RepDomain::Sector(sector) = rep.domain else {
        return Err(Error::InvalidArgument("HP dressing needs a finite su_pd(2) sector"));
    };
    let j = sector.j();
    let s = i64::from(sector.s);
    let mut phi = Vec::with_capacity(sector.dim());
    for (eta, &y) in rep.y0_values.iter().enumerate() {
        let v0 = y - rep.l0 - j;
        let numer = (j + v0 + Rational::one()) * (j - v0);
        if (eta as i64) == s {
            phi.push(Rational::zero());
            continue;
        }
        let psi = rep.structure.psi(y + Rational::one(), rep.l1);
        if psi.is_zero() {
            return Err(Error::StructureSingularity { level: eta });
        }
        phi.push(numer / psi);
    }
    let shift = rational_to_f64(rep.l0 + j);
    let v0 = rep.y0.sub(&OperatorMatrix::identity(rep.tag(), rep.dim()).scale_re(shift))?;
    let sqrt_phi: Vec<f64> = phi.iter().map(|&p| rational_to_f64(p).sqrt()).collect();
    let v_plus = rep.y_plus.mul(&OperatorMatrix::new(rep.tag(), CMatrix::from_real_diag(&sqrt_phi)))?;
    let v_minus = v_plus.adjoint();
    Ok(HpRep { sector, j, phi, v0, v_plus, v_minus })
}

/// Residuals of the su(2) relations of an [`HpRep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Report {
    pub raising: f64,
    pub lowering: f64,
    /// `max |[V₊, V₋] - 2V₀|`
    pub ladder: f64,
    /// Max distance of the `V₀` diagonal from `{-j, ..., j}`.
    pub spectrum: f64,
}

impl Su2Report {
    pub fn max_residual(&self) -> f64 {
        self.raising.max(self.lowering).max(self.ladder).max(self.spectrum)
    }
}

pub fn verify_su2(hp: &HpRep) -> Result<Su2Report> {
    let raising = hp.v0.commutator(&hp.v_plus)?.sub(&hp.v_plus)?.max_abs();
    let lowering = hp.v0.commutator(&hp.v_minus)?.add(&hp.v_minus)?.max_abs();
    let ladder = hp.v_plus.commutator(&hp.v_minus)?.sub(&hp.v0.scale_re(2.0))?.max_abs();
    let j = rational_to_f64(hp.j);
    let spectrum = hp
        .v0
        .matrix()
        .diagonal()
        .iter()
        .enumerate()
        .map(|(eta, z)| (z.re - (eta as f64 - j)).abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    Ok(Su2Report { raising, lowering, ladder, spectrum })
}

/// Canonical cluster operators on a one-mode residue class.
#[derive(Debug, Clone)]
pub struct WOps {
    pub rep: AlgebraRep,
    pub w_plus: OperatorMatrix,
    pub w_minus: OperatorMatrix,
    /// `⌊E₁₁/n⌋`, built from integer arithmetic.
    pub n_w: OperatorMatrix,
    pub e11: OperatorMatrix,
}

/// `W⁺ = Y⁺ [(Y₀ - R₀ + 1)/(E₁₁ + n)^{(n)}]^{1/2}` on the residue class.
pub fn w_operators(n: u32, kappa: u32, n_max: u32) -> Result<WOps> {
    let rep = build_supd11_rep(n, kappa, n_max)?;
    let nn = i64::from(n);
    let dressing: Vec<f64> = rep
        .states
        .iter()
        .zip(&rep.y0_values)
        .map(|(s, &y0)| {
            let occ = i64::from(s.get(0));
            let num = y0 - rep.l0 + Rational::one();
            let den = falling_factorial(rat(occ + nn), n);
            rational_to_f64(num / den).sqrt()
        })
        .collect();
    let tag = rep.tag();
    let w_plus = rep.y_plus.mul(&OperatorMatrix::new(tag, CMatrix::from_real_diag(&dressing)))?;
    let w_minus = w_plus.adjoint();
    let floors: Vec<f64> = rep.states.iter().map(|s| f64::from(s.get(0) / n)).collect();
    let n_w = OperatorMatrix::new(tag, CMatrix::from_real_diag(&floors));
    let occs: Vec<f64> = rep.states.iter().map(|s| f64::from(s.get(0))).collect();
    let e11 = OperatorMatrix::new(tag, CMatrix::from_real_diag(&occs));
    Ok(WOps { rep, w_plus, w_minus, n_w, e11 })
}

/// Canonical-relation residuals of [`WOps`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WReport {
    /// `max |[W, W⁺] - I|` over rows with `N ≤ n_max - 2n`.
    pub canonical: f64,
    /// `max |W⁺W - N_W|` over the same rows.
    pub number: f64,
    /// `N_W` diagonal equals `⌊N/n⌋` exactly.
    pub floor_exact: bool,
}

pub fn verify_w(w: &WOps) -> Result<WReport> {
    let RepDomain::ResidueClass { n, n_max, .. } = w.rep.domain else {
        return Err(Error::InvalidArgument("W operators live on a residue class"));
    };
    let keep: Vec<bool> = w.rep.states.iter().map(|s| s.get(0) + 2 * n <= n_max).collect();
    let id = OperatorMatrix::identity(w.rep.tag(), w.rep.dim());
    let canonical = w.w_minus.commutator(&w.w_plus)?.sub(&id)?.matrix().max_abs_masked(|r| keep[r], |c| keep[c]);
    let number = w.w_plus.mul(&w.w_minus)?.sub(&w.n_w)?.matrix().max_abs_masked(|r| keep[r], |c| keep[c]);
    let floor_exact = w
        .rep
        .states
        .iter()
        .enumerate()
        .all(|(i, s)| w.n_w.entry(i, i) == Complex64::new(f64::from(s.get(0) / n), 0.0));
    Ok(WReport { canonical, number, floor_exact })
}

/// Nilpotency of the nested commutator `ad_Y^k Y⁺`, `ad_Y X = [Y₋, X]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NilpotencyReport {
    /// Nesting depth checked: `deg Ψ + 1` (`n + 1` for su_pd(1,1)).
    pub order: u32,
    /// Interior max-norm of `ad^order Y⁺`, evaluated in exact arithmetic.
    pub residual: f64,
    /// Interior max-norm of `ad^(order-1) Y⁺` (must stay away from zero).
    pub previous_norm: f64,
    /// Same residual evaluated with floating-point matrices.
    pub float_residual: f64,
    /// Scale of the largest floating-point product entering the last commutator.
    pub float_scale: f64,
    pub mask_margin: u32,
    pub pass: bool,
}

pub fn green_nilpotency_check(rep: &AlgebraRep, tol: f64) -> Result<NilpotencyReport> {
    let order = rep.structure.degree() + 1;
    let keep = rep.interior();
    let mut x = rep.y_plus.clone();
    let mut float_scale = 0.0f64;
    for step in 0..order {
        if step + 1 == order {
            float_scale = rep.y_minus.mul(&x)?.max_abs().max(x.mul(&rep.y_minus)?.max_abs());
        }
        x = rep.y_minus.commutator(&x)?;
    }
    let float_residual = x.matrix().max_abs_masked(|r| keep[r], |c| keep[c]);

    let exact = ExactShiftCheck::new(rep)?;
    let (residual, previous_norm) = exact.nested_commutator_norms(order as usize, &keep);
    let pass = residual <= tol && previous_norm > 1e-3;
    Ok(NilpotencyReport {
        order,
        residual,
        previous_norm,
        float_residual,
        float_scale,
        mask_margin: rep.mask_margin(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn sector_labels() {
        let s = SectorLabel::new(2, 1, 2).unwrap();
        assert_eq!(s.l1(), r(5, 3));
        for n in 2..5 {
            for kappa in 0..n {
                for sv in 0..6 {
                    let l = SectorLabel::new(n, kappa, sv).unwrap();
                    assert_eq!(l.l1() - l.l0(), rat(i64::from(sv)));
                    assert_eq!(rat(i64::from(n)) * l.l0() + l.l1(), rat(i64::from(kappa)));
                    assert_eq!(l.dim(), sv as usize + 1);
                }
            }
        }
        assert!(SectorLabel::new(1, 0, 0).is_err());
        assert!(SectorLabel::new(2, 2, 0).is_err());
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_eval(2, r(-2, 3), r(4, 3)).unwrap(), rat(0));
        assert_eq!(psi_eval(2, r(1, 3), r(4, 3)).unwrap(), rat(4));
        // top termination of sector (0,1): l0 = -1/3, l1 = 2/3
        assert_eq!(psi_eval(2, r(5, 3), r(2, 3)).unwrap(), rat(0));
        assert!(psi_eval(1, rat(0), rat(0)).is_err());
    }

    #[test]
    fn psi_sector_identities() {
        for n in 2..5u32 {
            for kappa in 0..n {
                for sv in 0..8u32 {
                    let l = SectorLabel::new(n, kappa, sv).unwrap();
                    let st = l.structure();
                    let bottom = st.psi(l.l0(), l.l1());
                    let expect = rat(i64::from(sv) + 1) * falling_factorial(rat(i64::from(kappa)), n);
                    assert_eq!(bottom, expect);
                    assert_eq!(bottom, rat(0));
                    assert_eq!(st.psi(l.l0() + rat(i64::from(sv) + 1), l.l1()), rat(0));
                }
            }
        }
    }

    #[test]
    fn small_sector_rep() {
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let rep = build_supd2_rep(sector);
        assert!((rep.y_plus.entry(1, 0).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((rep.y0.entry(0, 0).re + 1.0 / 3.0).abs() < 1e-15);
        assert!((rep.y0.entry(1, 1).re - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(rep.states[1], OccupationState(alloc::vec![0, 2]));
        let report = verify_commutation(&rep, 1e-12).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn top_vector_is_annihilated() {
        let rep = build_supd2_rep(SectorLabel::new(3, 1, 4).unwrap());
        let top = rep.dim() - 1;
        for r in 0..rep.dim() {
            assert_eq!(rep.y_plus.entry(r, top), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn both_constructions_agree() {
        for (n, kappa, s) in [(2, 0, 1), (2, 1, 7), (3, 2, 5), (4, 3, 6)] {
            let sector = SectorLabel::new(n, kappa, s).unwrap();
            let d = rep_difference(&build_supd2_rep(sector), &build_supd2_rep_fock(sector)).unwrap();
            assert!(d <= 1e-12, "{n} {kappa} {s}: {d}");
        }
    }

    #[test]
    fn commutation_and_casimir() {
        let rep = build_supd2_rep(SectorLabel::new(3, 2, 5).unwrap());
        assert!(verify_commutation(&rep, 1e-10).unwrap().pass);
        let vac = build_supd2_rep(SectorLabel::new(2, 0, 0).unwrap());
        let rep0 = verify_commutation(&vac, 0.0).unwrap();
        assert!(rep0.pass);
        let cas = casimir_check(&vac).unwrap();
        assert_eq!((cas.value, cas.deviation), (0.0, 0.0));
        let cas = casimir_check(&build_supd2_rep(SectorLabel::new(2, 1, 3).unwrap())).unwrap();
        assert_eq!(cas.expected, rat(0));
        assert!(cas.value.abs() <= 1e-10 && cas.deviation <= 1e-10);
    }

    #[test]
    fn hp_dressing_gives_su2() {
        let rep = build_supd2_rep(SectorLabel::new(2, 0, 2).unwrap());
        let hp = hp_map(&rep).unwrap();
        let d: Vec<f64> = hp.v0.matrix().diagonal().iter().map(|z| z.re).collect();
        for (got, want) in d.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // ‖V₊ e₀‖² = 2j
        let col = hp.v_plus.matrix().column(0);
        let n2: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        assert!((n2 - 2.0).abs() < 1e-13);

        let hp = hp_map(&build_supd2_rep(SectorLabel::new(3, 1, 4).unwrap())).unwrap();
        let rep = verify_su2(&hp).unwrap();
        assert!(rep.max_residual() <= 1e-10, "{rep:?}");
    }

    #[test]
    fn hp_rejects_one_mode_rep() {
        let rep = build_supd11_rep(2, 0, 10).unwrap();
        assert!(hp_map(&rep).is_err());
    }

    #[test]
    fn one_mode_rep() {
        let rep = build_supd11_rep(2, 0, 20).unwrap();
        // Y₊|0⟩ = √2 |2⟩
        assert!((rep.y_plus.entry(1, 0).re - 2f64.sqrt()).abs() < 1e-15);
        // Y₋ kills the pseudovacuum
        assert!(rep.y_minus.matrix().column(0).iter().all(|z| z.norm() == 0.0));
        let st = StructurePolynomial::OneMode { n: 3 };
        assert_eq!(st.psi(r(4, 3), rat(0)), rat(24));
        let report = verify_commutation(&build_supd11_rep(3, 1, 40).unwrap(), 1e-10).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.mask_margin, 12);
        assert!(build_supd11_rep(2, 2, 10).is_err());
    }

    #[test]
    fn w_operator_action() {
        let w = w_operators(3, 1, 40).unwrap();
        // W⁺|4⟩ = √2 |7⟩: |4⟩ is index 1, |7⟩ index 2
        assert!((w.w_plus.entry(2, 1).re - 2f64.sqrt()).abs() < 1e-14);
        assert!(w.w_minus.matrix().column(0).iter().all(|z| z.norm() == 0.0));
        let report = verify_w(&w).unwrap();
        assert!(report.canonical <= 1e-10 && report.number <= 1e-10 && report.floor_exact);

        let w = w_operators(2, 0, 10).unwrap();
        let d: Vec<f64> = w.n_w.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, alloc::vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn nilpotency_order_is_sharp() {
        for n in [2u32, 3] {
            let rep = build_supd11_rep(n, 0, 60).unwrap();
            let report = green_nilpotency_check(&rep, 1e-8).unwrap();
            assert_eq!(report.order, n + 1);
            assert!(report.pass, "{report:?}");
        }
        // first commutator alone is far from zero
        let rep = build_supd11_rep(2, 0, 20).unwrap();
        let ad1 = rep.y_minus.commutator(&rep.y_plus).unwrap();
        assert!(ad1.max_abs() > 1.0);
    }
}

//! SU(2) coherent-state trial functions, variational spectra and the
//! classical flow on the coherent-state sphere of one sector.
//!
//! Trial states are `|v; ξ⟩ = exp(ξV₊ - ξ*V₋) e_v` with `ξ = r e^{-iθ}`, where
//! `V₀, V±` are the su(2) generators obtained by square-root dressing of the
//! sector algebra and `e_v ∝ V₊^v e₀`. Writing
//! `K = i(V₊ - V₋) = W Λ W†` and `U_θ = exp(-iθV₀)`,
//!
//! `|v; ξ⟩ = U_θ W e^{-irΛ} W† e_v · e^{iθ m_v}`,
//!
//! so one eigendecomposition per sector serves every `(r, θ)`.
//!
//! The flow uses `q = θ`, `p = ⟨Y₀⟩` on the `v = 0` family. Near the poles of
//! the sphere `∂p/∂r` vanishes and the integrator moves to a rotated chart.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fock::OperatorMatrix;
use crate::linalg::{self, CMatrix};
use crate::polyalg::{HpRep, SectorLabel, StructurePolynomial};
use crate::{rational_to_f64, Error, Result};

const PI: f64 = core::f64::consts::PI;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Number of grid points used by [`stationary_points`] on `r ∈ [0, π]`.
pub const GRID_POINTS: usize = 2000;

/// Trial-state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialState {
    pub sector: SectorLabel,
    pub v: u32,
    /// `ξ = r e^{-iθ}`.
    pub xi: Complex64,
}

impl TrialState {
    pub fn from_polar(sector: SectorLabel, v: u32, r: f64, theta: f64) -> Self {
        Self { sector, v, xi: Complex64::from_polar(r, -theta) }
    }

    pub fn r(&self) -> f64 {
        self.xi.norm()
    }

    /// `θ = -arg ξ` folded into `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        (-self.xi.arg()).rem_euclid(2.0 * PI) + 0.0
    }
}

/// Precomputed data for the coherent states of one sector.
#[derive(Debug, Clone)]
pub struct CoherentFamily {
    hp: HpRep,
    w: CMatrix,
    lambda: Vec<f64>,
    /// `V₀` diagonal, `η - j`.
    m: Vec<f64>,
    /// `Y₀` diagonal.
    y0: Vec<f64>,
}

impl CoherentFamily {
    pub fn new(hp: HpRep) -> Self {
        let k = hp.v_plus.sub(&hp.v_minus).expect("same basis").scale(Complex64::new(0.0, 1.0));
        let e = linalg::eigh(k.matrix());
        let m: Vec<f64> = hp.v0.matrix().diagonal().iter().map(|z| z.re).collect();
        let shift = rational_to_f64(hp.sector.l0() + hp.j);
        let y0 = m.iter().map(|x| x + shift).collect();
        Self { hp, w: e.vectors, lambda: e.values, m, y0 }
    }

    pub fn sector(&self) -> SectorLabel {
        self.hp.sector
    }

    pub fn hp(&self) -> &HpRep {
        &self.hp
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Admissible momentum range `[l₀, l₀ + s]`.
    pub fn p_range(&self) -> (f64, f64) {
        let l0 = rational_to_f64(self.hp.sector.l0());
        (l0, l0 + f64::from(self.hp.sector.s()))
    }

    /// `|v; r e^{-iθ}⟩`.
    pub fn state(&self, v: u32, r: f64, theta: f64) -> Result<Vec<Complex64>> {
        let v = v as usize;
        let d = self.dim();
        if v >= d {
            return Err(Error::InvalidArgument("excitation index v exceeds s"));
        }
        let mut out = alloc::vec![ZERO; d];
        if r == 0.0 {
            out[v] = Complex64::new(1.0, 0.0);
            return Ok(out);
        }
        // y = e^{-irΛ} W† e_v
        let y: Vec<Complex64> = (0..d)
            .map(|k| self.w[(v, k)].conj() * Complex64::from_polar(1.0, -r * self.lambda[k]))
            .collect();
        let global = self.m[v] * theta;
        for (row, slot) in out.iter_mut().enumerate() {
            let acc: Complex64 = (0..d).map(|k| self.w[(row, k)] * y[k]).sum();
            *slot = acc * Complex64::from_polar(1.0, global - theta * self.m[row]);
        }
        Ok(out)
    }

    pub fn trial(&self, trial: &TrialState) -> Result<Vec<Complex64>> {
        if trial.sector != self.hp.sector {
            return Err(Error::BasisMismatch);
        }
        self.state(trial.v, trial.r(), trial.theta())
    }

    /// `A ψ` with `A = e^{-iθ}V₊ - e^{iθ}V₋`.
    fn apply_generator(&self, theta: f64, psi: &[Complex64]) -> Vec<Complex64> {
        let up = self.hp.v_plus.matrix().matvec(psi);
        let down = self.hp.v_minus.matrix().matvec(psi);
        let ph = Complex64::from_polar(1.0, -theta);
        up.iter().zip(&down).map(|(u, d)| ph * u - ph.conj() * d).collect()
    }

    fn check_h(&self, h: &OperatorMatrix) -> Result<()> {
        if h.basis() != self.hp.sector.tag() {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// `ℋ` and its analytic derivatives at `(r, θ)`.
    pub fn local(&self, h: &OperatorMatrix, v: u32, r: f64, theta: f64) -> Result<LocalEnergy> {
        self.check_h(h)?;
        let psi = self.state(v, r, theta)?;
        let hpsi = h.matrix().matvec(&psi);
        let apsi = self.apply_generator(theta, &psi);
        let aapsi = self.apply_generator(theta, &apsi);
        let happsi = h.matrix().matvec(&apsi);
        let energy = linalg::vdot(&psi, &hpsi).re;
        let d_r = 2.0 * linalg::vdot(&hpsi, &apsi).re;
        let d_rr = 2.0 * linalg::vdot(&hpsi, &aapsi).re + 2.0 * linalg::vdot(&apsi, &happsi).re;
        let v0psi: Vec<Complex64> = psi.iter().zip(&self.m).map(|(z, m)| z * m).collect();
        let d_theta = -2.0 * linalg::vdot(&v0psi, &hpsi).im;
        let y0psi: Vec<Complex64> = psi.iter().zip(&self.y0).map(|(z, y)| z * y).collect();
        let p = linalg::vdot(&psi, &y0psi).re;
        let dp_dr = 2.0 * linalg::vdot(&y0psi, &apsi).re;
        let variance = (linalg::vdot(&hpsi, &hpsi).re - energy * energy).max(0.0);
        Ok(LocalEnergy { energy, d_r, d_rr, d_theta, p, dp_dr, variance })
    }
}

/// Coherent-state energy and derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalEnergy {
    pub energy: f64,
    /// `∂ℋ/∂r = ⟨[H, A]⟩`
    pub d_r: f64,
    /// `∂²ℋ/∂r² = ⟨[[H, A], A]⟩`
    pub d_rr: f64,
    /// `∂ℋ/∂θ = i⟨[V₀, H]⟩`
    pub d_theta: f64,
    /// `⟨Y₀⟩`
    pub p: f64,
    /// `∂⟨Y₀⟩/∂r`
    pub dp_dr: f64,
    /// `⟨H²⟩ - ⟨H⟩²`
    pub variance: f64,
}

/// `|v; ξ⟩` for an [`HpRep`].
pub fn coherent_state(hp: &HpRep, v: u32, xi: Complex64) -> Result<Vec<Complex64>> {
    let fam = CoherentFamily::new(hp.clone());
    fam.trial(&TrialState { sector: hp.sector, v, xi })
}

/// `⟨v; ξ|H|v; ξ⟩`.
pub fn energy_functional(family: &CoherentFamily, h: &OperatorMatrix, trial: &TrialState) -> Result<f64> {
    family.check_h(h)?;
    let psi = family.trial(trial)?;
    let value = linalg::vdot(&psi, &h.matrix().matvec(&psi));
    Ok(value.re)
}

/// Shape of `ℋ(r)` at a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Minimum,
    Maximum,
    Flat,
}

/// One stationary point of `ℋ(r, θ*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub v: u32,
    pub r: f64,
    pub theta: f64,
    pub energy: f64,
    /// `|∂ℋ/∂r|`
    pub residual: f64,
    /// `|∂ℋ/∂θ|`
    pub theta_residual: f64,
    /// Energy variance, the selection criterion.
    pub variance: f64,
    pub kind: StationaryKind,
}

/// `θ*` from the phase of the coupling: `e^{-iθ*} = b/|b|`, read off the
/// first nonzero sub-diagonal entry of `H` (its phase is that of `b`).
/// Returns `None` when there is no coupling.
pub fn coupling_phase(h: &OperatorMatrix) -> Option<f64> {
    (0..h.dim().saturating_sub(1))
        .map(|k| h.entry(k + 1, k))
        .find(|z| z.norm() > 1e-300)
        .map(|z| (-z.arg()).rem_euclid(2.0 * PI) + 0.0)
}

/// Stationary points of `r ↦ ℋ(r, θ*)` on `[0, π)` (the curve is π-periodic):
/// a dense grid scan of `∂ℋ/∂r` followed by safeguarded Newton polish.
pub fn stationary_points(family: &CoherentFamily, h: &OperatorMatrix, v: u32) -> Result<Vec<StationaryPoint>> {
    family.check_h(h)?;
    if v as usize >= family.dim() {
        return Err(Error::InvalidArgument("excitation index v exceeds s"));
    }
    let theta = coupling_phase(h).unwrap_or(0.0);
    let eval = |r: f64| family.local(h, v, r, theta);

    let grid: Vec<f64> = (0..=GRID_POINTS).map(|k| PI * k as f64 / GRID_POINTS as f64).collect();
    let derivs: Vec<f64> = grid.iter().map(|&r| eval(r).map(|l| l.d_r)).collect::<Result<_>>()?;
    let scale = h.max_abs().max(1.0);
    let flat_tol = 1e-13 * scale;

    let mut roots: Vec<f64> = Vec::new();
    if derivs.iter().all(|d| d.abs() <= flat_tol) {
        roots.push(0.0);
    } else {
        for k in 0..GRID_POINTS {
            let (a, b) = (grid[k], grid[k + 1]);
            let (da, db) = (derivs[k], derivs[k + 1]);
            if da.abs() <= flat_tol {
                roots.push(a);
            } else if db.abs() > flat_tol && da.signum() != db.signum() {
                roots.push(polish(&eval, a, b, da, flat_tol)?);
            }
        }
    }

    let mut out: Vec<StationaryPoint> = Vec::new();
    for r in roots {
        let r = if r >= PI - 1e-12 { 0.0 } else { r };
        if out.iter().any(|p| (p.r - r).abs() < 1e-9) {
            continue;
        }
        let l = eval(r)?;
        let kind = if l.d_rr > 1e-9 * scale {
            StationaryKind::Minimum
        } else if l.d_rr < -1e-9 * scale {
            StationaryKind::Maximum
        } else {
            StationaryKind::Flat
        };
        out.push(StationaryPoint {
            v,
            r,
            theta,
            energy: l.energy,
            residual: l.d_r.abs(),
            theta_residual: l.d_theta.abs(),
            variance: l.variance,
            kind,
        });
    }
    if out.is_empty() {
        return Err(Error::NoStationaryPoint);
    }
    out.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(out)
}

fn polish(eval: &impl Fn(f64) -> Result<LocalEnergy>, mut lo: f64, mut hi: f64, d_lo: f64, tol: f64) -> Result<f64> {
    let lo_sign = d_lo.signum();
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let l = eval(r)?;
        if l.d_r.abs() <= tol * 1e-2 || hi - lo <= 1e-15 {
            return Ok(r);
        }
        if l.d_r.signum() == lo_sign {
            lo = r;
        } else {
            hi = r;
        }
        let newton = r - l.d_r / l.d_rr;
        r = if l.d_rr != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(r)
}

/// Candidate with the smallest energy variance. Variances equal to rounding
/// are resolved by lower energy, then smaller `r`: with exact eigenstates on
/// both sides of a two-level sector the variance alone does not single out
/// the ground state.
pub fn select_best(candidates: &[StationaryPoint]) -> Option<StationaryPoint> {
    let emax = candidates.iter().map(|c| c.energy.abs()).fold(1.0, f64::max);
    let tie = 1e-12 * emax * emax;
    candidates.iter().copied().reduce(|best, c| {
        let better = if (c.variance - best.variance).abs() > tie {
            c.variance < best.variance
        } else if (c.energy - best.energy).abs() > 1e-12 * emax {
            c.energy < best.energy
        } else {
            c.r < best.r
        };
        if better {
            c
        } else {
            best
        }
    })
}

/// One point of a classical trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub t: f64,
    /// `q = θ`, folded into `[0, 2π)`.
    pub q: f64,
    /// `p = ⟨Y₀⟩ ∈ [l₀, l₀ + s]`.
    pub p: f64,
    pub energy: f64,
}

/// Integration settings for [`classical_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub t_end: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the last step is always kept).
    pub record_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { t_end: 50.0, dt: 1e-3, record_every: 1 }
    }
}

/// A chart of the coherent-state sphere: coordinates `(q, p)` of the family
/// rotated by `R`.
#[derive(Debug, Clone)]
struct Chart {
    h: OperatorMatrix,
    /// `R` (identity for the base chart).
    rotation: CMatrix,
}

struct FlowSystem<'a> {
    family: &'a CoherentFamily,
    charts: [Chart; 2],
}

impl<'a> FlowSystem<'a> {
    fn new(family: &'a CoherentFamily, h: &OperatorMatrix) -> Result<Self> {
        let hp = family.hp();
        // R = exp(-i (π/2) V_y), V_y = (V₊ - V₋)/(2i), moves the poles to the equator
        let vy = hp.v_plus.sub(&hp.v_minus)?.scale(Complex64::new(0.0, -0.5));
        let rotation = linalg::expm_hermitian(vy.matrix(), PI / 2.0);
        let rotated = OperatorMatrix::new(h.basis(), rotation.adjoint().mul(h.matrix()).mul(&rotation));
        let identity = CMatrix::identity(family.dim());
        Ok(Self { family, charts: [Chart { h: h.clone(), rotation: identity }, Chart { h: rotated, rotation }] })
    }

    /// `r(p)` on `[0, π/2]` by Newton with a bisection bracket on the computed `⟨Y₀⟩(r)`.
    fn invert(&self, h: &OperatorMatrix, p: f64) -> Result<f64> {
        let (lo_p, hi_p) = self.family.p_range();
        let span = hi_p - lo_p;
        let guard = 1e-9 * span.max(1.0);
        if p < lo_p - guard || p > hi_p + guard {
            return Err(Error::FlowOutOfRange { p, lo: lo_p, hi: hi_p });
        }
        if span == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0, PI / 2.0);
        let frac = ((p - lo_p) / span).clamp(0.0, 1.0);
        let mut r = libm_asin_sqrt(frac);
        for _ in 0..100 {
            let l = self.family.local(h, 0, r, 0.0)?;
            let f = l.p - p;
            if f.abs() <= 1e-15 * span.max(1.0) {
                break;
            }
            if f < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let step = if l.dp_dr != 0.0 { r - f / l.dp_dr } else { f64::NAN };
            r = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-16 {
                break;
            }
        }
        Ok(r)
    }

    /// `(q̇, ṗ)` in chart `c`.
    fn rhs(&self, c: usize, q: f64, p: f64) -> Result<(f64, f64)> {
        let h = &self.charts[c].h;
        let r = self.invert(h, p)?;
        let l = self.family.local(h, 0, r, q)?;
        Ok((l.d_r / l.dp_dr, -l.d_theta))
    }

    fn energy(&self, c: usize, q: f64, p: f64) -> Result<f64> {
        let h = &self.charts[c].h;
        let r = self.invert(h, p)?;
        Ok(self.family.local(h, 0, r, q)?.energy)
    }

    /// Base-chart state of a point given in chart `c`.
    fn state(&self, c: usize, q: f64, p: f64) -> Result<Vec<Complex64>> {
        let r = self.invert(&self.charts[c].h, p)?;
        let psi = self.family.state(0, r, q)?;
        Ok(self.charts[c].rotation.matvec(&psi))
    }

    /// Coordinates in chart `c` of a base-chart state.
    fn coords(&self, c: usize, psi: &[Complex64]) -> (f64, f64) {
        let local = self.charts[c].rotation.adjoint().matvec(psi);
        let y0psi: Vec<Complex64> = local.iter().zip(&self.family.y0).map(|(z, y)| z * y).collect();
        let p = linalg::vdot(&local, &y0psi).re;
        let vp = linalg::vdot(&local, &self.family.hp().v_plus.matrix().matvec(&local));
        let q = if vp.norm() > 0.0 { vp.arg().rem_euclid(2.0 * PI) } else { 0.0 };
        (q, p)
    }

    /// Distance from the poles of chart `c`, as `|cos 2r| = |2(p - l₀)/s - 1|`.
    fn pole_proximity(&self, p: f64) -> f64 {
        let (lo, hi) = self.family.p_range();
        if hi == lo {
            return 1.0;
        }
        (2.0 * (p - lo) / (hi - lo) - 1.0).abs()
    }
}

fn libm_asin_sqrt(x: f64) -> f64 {
    x.sqrt().asin()
}

/// Classical trajectory of `q̇ = ∂ℋ/∂p`, `ṗ = -∂ℋ/∂q` on the `v = 0` family,
/// integrated with fixed-step RK4.
pub fn classical_flow(
    family: &CoherentFamily,
    h: &OperatorMatrix,
    q0: f64,
    p0: f64,
    options: &FlowOptions,
) -> Result<Vec<FlowState>> {
    family.check_h(h)?;
    if !(options.dt > 0.0) || !(options.t_end >= 0.0) || options.record_every == 0 {
        return Err(Error::InvalidArgument("flow needs dt > 0, t_end >= 0 and record_every >= 1"));
    }
    let sys = FlowSystem::new(family, h)?;
    let steps = (options.t_end / options.dt).round() as usize;
    let mut chart = 0usize;
    let (mut q, mut p) = (q0, p0);
    let mut out = Vec::with_capacity(steps / options.record_every + 2);
    let start_energy = sys.energy(0, q, p)?;
    out.push(FlowState { t: 0.0, q: q.rem_euclid(2.0 * PI), p, energy: start_energy });

    const SWITCH: f64 = 0.9;
    for step in 1..=steps {
        if sys.pole_proximity(p) > SWITCH {
            let psi = sys.state(chart, q, p)?;
            chart = 1 - chart;
            (q, p) = sys.coords(chart, &psi);
        }
        let dt = options.dt;
        let k1 = sys.rhs(chart, q, p)?;
        let k2 = sys.rhs(chart, q + 0.5 * dt * k1.0, p + 0.5 * dt * k1.1)?;
        let k3 = sys.rhs(chart, q + 0.5 * dt * k2.0, p + 0.5 * dt * k2.1)?;
        let k4 = sys.rhs(chart, q + dt * k3.0, p + dt * k3.1)?;
        q += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        p += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);

        if step % options.record_every == 0 || step == steps {
            let (bq, bp) = if chart == 0 { (q, p) } else { sys.coords(0, &sys.state(chart, q, p)?) };
            let energy = sys.energy(chart, q, p)?;
            out.push(FlowState { t: step as f64 * options.dt, q: bq.rem_euclid(2.0 * PI), p: bp, energy });
        }
    }
    Ok(out)
}

/// `max_t |ℋ(t) - ℋ(0)| / max(|ℋ(0)|, 1)`.
pub fn relative_energy_drift(trajectory: &[FlowState]) -> f64 {
    let Some(first) = trajectory.first() else {
        return 0.0;
    };
    let scale = first.energy.abs().max(1.0);
    trajectory.iter().map(|s| (s.energy - first.energy).abs() / scale).fold(0.0, f64::max)
}

/// `2Ȳ₊Ȳ₋ - Ψ(Ȳ₀; l₁) - Ψ(Ȳ₀+1; l₁)` for the two-mode algebra of order `n`.
pub fn manifold_residual(n: u32, l1: f64, y0_bar: f64, yplus_bar: Complex64, yminus_bar: Complex64) -> f64 {
    let st = StructurePolynomial::TwoMode { n };
    (2.0 * yplus_bar * yminus_bar).re - st.psi_f64(y0_bar, l1) - st.psi_f64(y0_bar + 1.0, l1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{build_supd2_rep, hp_map};
    use crate::spectral::{build_hhg, diagonalize, ModelParams};

    fn family(n: u32, kappa: u32, s: u32) -> CoherentFamily {
        let sector = SectorLabel::new(n, kappa, s).unwrap();
        CoherentFamily::new(hp_map(&build_supd2_rep(sector)).unwrap())
    }

    fn example() -> ModelParams {
        ModelParams::new(2, 1.0, 2.0, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn pole_and_normalization() {
        let fam = family(2, 0, 6);
        let psi = fam.state(0, 0.0, 1.3).unwrap();
        assert_eq!(psi[0], Complex64::new(1.0, 0.0));
        assert!(psi[1..].iter().all(|z| *z == ZERO));
        let t = TrialState { sector: fam.sector(), v: 2, xi: Complex64::new(0.7, -0.3) };
        let psi = fam.trial(&t).unwrap();
        assert!((linalg::norm(&psi) - 1.0).abs() <= 1e-12);
        let near = fam.state(2, 1e-8, 0.4).unwrap();
        assert!((near[2].norm() - 1.0).abs() < 1e-12);
        assert!(fam.state(7, 0.1, 0.0).is_err());
    }

    #[test]
    fn matches_direct_exponential() {
        let fam = family(3, 1, 4);
        let hp = fam.hp().clone();
        let xi = Complex64::new(0.4, 0.9);
        let gen = hp.v_plus.scale(xi).sub(&hp.v_minus.scale(xi.conj())).unwrap();
        // exp(G) = exp(-i t K) with K = iG, t = 1
        let k = gen.scale(Complex64::new(0.0, 1.0));
        let mut e1 = alloc::vec![ZERO; 5];
        e1[1] = Complex64::new(1.0, 0.0);
        let direct = linalg::expm_apply_hermitian(k.matrix(), 1.0, &e1);
        let ours = coherent_state(&hp, 1, xi).unwrap();
        let overlap = linalg::vdot(&direct, &ours).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_half_covers_bloch_sphere() {
        let fam = family(2, 1, 1);
        for &(a, phi) in &[(0.3, 0.2), (1.1, 2.5), (1.5, 5.0)] {
            // target cos(a/2)|0⟩ + e^{-iφ} sin(a/2)|1⟩ at θ = φ
            let target = [Complex64::new((a / 2.0f64).cos(), 0.0), Complex64::from_polar((a / 2.0f64).sin(), -phi)];
            let psi = fam.state(0, a / 2.0, phi).unwrap();
            assert!((linalg::vdot(&target, &psi).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_examples() {
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let fam = family(2, 0, 1);
        let free = ModelParams::new(2, 0.5, 2.0, ZERO).unwrap();
        let h = build_hhg(&free, sector).unwrap();
        let e = energy_functional(&fam, &h, &TrialState::from_polar(sector, 0, 0.0, 0.0)).unwrap();
        let want = free.a() * (-1.0 / 3.0) + free.c() * (2.0 / 3.0);
        assert!((e - want).abs() < 1e-14);
        let other = build_hhg(&example(), SectorLabel::new(2, 0, 2).unwrap()).unwrap();
        assert!(matches!(energy_functional(&fam, &other, &TrialState::from_polar(sector, 0, 0.1, 0.0)), Err(Error::BasisMismatch)));
    }

    #[test]
    fn two_level_ground_state() {
        let sector = SectorLabel::new(2, 0, 1).unwrap();
        let fam = family(2, 0, 1);
        let h = build_hhg(&example(), sector).unwrap();
        let pts = stationary_points(&fam, &h, 0).unwrap();
        let minima: Vec<_> = pts.iter().filter(|p| p.kind == StationaryKind::Minimum).collect();
        assert_eq!(minima.len(), 1);
        assert!(pts.iter().all(|p| p.residual <= 1e-8));
        let best = select_best(&pts).unwrap();
        assert!((best.energy - (2.0 - core::f64::consts::SQRT_2)).abs() <= 1e-9);
        assert!(best.variance <= 1e-9);
        assert_eq!(best.theta, 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let sector = SectorLabel::new(3, 2, 4).unwrap();
        let fam = family(3, 2, 4);
        let p = ModelParams::new(3, 0.7, 1.1, Complex64::new(0.3, -0.4)).unwrap();
        let h = build_hhg(&p, sector).unwrap();
        let (r, th, e) = (0.6, 1.7, 1e-5);
        let l = fam.local(&h, 1, r, th).unwrap();
        let f = |r, th| fam.local(&h, 1, r, th).unwrap().energy;
        assert!((l.d_r - (f(r + e, th) - f(r - e, th)) / (2.0 * e)).abs() < 1e-7);
        assert!((l.d_theta - (f(r, th + e) - f(r, th - e)) / (2.0 * e)).abs() < 1e-7);
        assert!((l.d_rr - (f(r + e, th) - 2.0 * f(r, th) + f(r - e, th)) / (e * e)).abs() < 1e-3);
    }

    #[test]
    fn selection_rules() {
        let mk = |r: f64, energy: f64, variance: f64| StationaryPoint {
            v: 0,
            r,
            theta: 0.0,
            energy,
            residual: 0.0,
            theta_residual: 0.0,
            variance,
            kind: StationaryKind::Minimum,
        };
        assert_eq!(select_best(&[mk(0.1, 1.0, 0.5), mk(0.2, 2.0, 0.2)]).unwrap().r, 0.2);
        assert_eq!(select_best(&[mk(0.1, 3.0, 0.0), mk(0.9, 1.0, 0.0)]).unwrap().r, 0.9);
        assert_eq!(select_best(&[mk(0.5, 1.0, 0.0), mk(0.3, 1.0, 0.0)]).unwrap().r, 0.3);
        assert!(select_best(&[]).is_none());
    }

    #[test]
    fn free_precession() {
        let sector = SectorLabel::new(2, 0, 4).unwrap();
        let fam = family(2, 0, 4);
        let p = ModelParams::new(2, 1.0, 1.5, ZERO).unwrap();
        let h = build_hhg(&p, sector).unwrap();
        let opts = FlowOptions { t_end: 2.0, dt: 1e-3, record_every: 100 };
        let traj = classical_flow(&fam, &h, 0.3, 0.5, &opts).unwrap();
        for s in &traj {
            assert!((s.p - 0.5).abs() < 1e-12);
            let want = (0.3 + p.a() * s.t).rem_euclid(2.0 * PI);
            assert!((s.q - want).abs() < 1e-9, "{} {}", s.q, want);
        }
    }

    #[test]
    fn flow_crossing_pole_region_conserves_energy() {
        let sector = SectorLabel::new(2, 1, 3).unwrap();
        let fam = family(2, 1, 3);
        let p = ModelParams::new(2, 1.0, 1.7, Complex64::new(0.4, 0.2)).unwrap();
        let h = build_hhg(&p, sector).unwrap();
        let (lo, hi) = fam.p_range();
        let opts = FlowOptions { t_end: 5.0, dt: 1e-3, record_every: 10 };
        let traj = classical_flow(&fam, &h, 0.1, lo + 0.02 * (hi - lo), &opts).unwrap();
        assert!(relative_energy_drift(&traj) <= 1e-8);
        assert!(traj.iter().all(|s| s.p >= lo - 1e-9 && s.p <= hi + 1e-9));
        let spec = diagonalize(&h).unwrap();
        assert!(traj.iter().all(|s| s.energy >= spec.eigenvalues[0] - 1e-9));
    }

    #[test]
    fn manifold_examples() {
        let sector = SectorLabel::new(2, 0, 3).unwrap();
        let l0 = rational_to_f64(sector.l0());
        let l1 = rational_to_f64(sector.l1());
        let st = sector.structure();
        let got = manifold_residual(2, l1, l0, ZERO, ZERO);
        let want = -rational_to_f64(st.psi(sector.l0() + crate::Rational::from_integer(1), sector.l1()));
        assert!((got - want).abs() < 1e-12);
    }
}

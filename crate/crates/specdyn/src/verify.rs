//! The invariant suite behind `specdyn verify`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use specdyn_core::fock::{self, OperatorMatrix};
use specdyn_core::linalg;
use specdyn_core::polarization::{self as pol, PolarizedBasis, QuantumState, UlVerdict};
use specdyn_core::polyalg::{self, SectorLabel};
use specdyn_core::quasiclassics::{self as qc, CoherentFamily, FlowOptions, TrialState};
use specdyn_core::spectral::{self, ModelParams, MultiphotonModel};
use specdyn_core::{Complex64, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Fock,
    Algebra,
    Spectral,
    Quasiclassics,
    Polarization,
    All,
}

/// How a row compares its value with the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Equal,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::Above => ">",
            Relation::Equal => "==",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub s_max: u32,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Largest pump count `s` in the sector sweeps.
    pub s_max: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 0, s_max: 20 }
    }
}

struct Rows {
    suite: &'static str,
    rows: Vec<CheckRow>,
}

impl Rows {
    fn push(&mut self, check: impl Into<String>, value: f64, relation: Relation, bound: f64) {
        let pass = match relation {
            Relation::AtMost => value <= bound,
            Relation::Above => value > bound,
            Relation::Equal => value == bound,
        };
        self.rows.push(CheckRow { suite: self.suite, check: check.into(), value, relation, bound, pass });
    }

    fn at_most(&mut self, check: impl Into<String>, value: f64, bound: f64) {
        self.push(check, value, Relation::AtMost, bound);
    }

    fn flag(&mut self, check: impl Into<String>, ok: bool) {
        self.push(check, if ok { 0.0 } else { 1.0 }, Relation::Equal, 0.0);
    }
}

fn sweep(s_max: u32) -> impl Iterator<Item = SectorLabel> {
    [2u32, 3].into_iter().flat_map(move |n| {
        (0..n).flat_map(move |k| (1..=s_max).map(move |s| SectorLabel::new(n, k, s).expect("valid sector")))
    })
}

fn random_params(rng: &mut ChaCha8Rng, n: u32) -> ModelParams {
    let g = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    ModelParams::new(n, rng.random_range(0.2..2.0), rng.random_range(0.2..3.0), g).expect("n >= 2")
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn masked(op: &OperatorMatrix, keep: &[bool]) -> f64 {
    op.matrix().max_abs_masked(|r| keep[r], |c| keep[c])
}

fn fock_suite(out: &mut Rows) -> Result<()> {
    let mut mismatches = 0;
    for m in 1..=4usize {
        for n_max in 0..=6u32 {
            let dim = fock::build_basis(m, n_max)?.dim() as u64;
            if dim != binomial(u64::from(n_max) + m as u64, m as u64) {
                mismatches += 1;
            }
        }
    }
    out.push("basis dimension = C(N_max+m, m)", f64::from(mismatches), Relation::Equal, 0.0);

    let basis = fock::build_basis(3, 5)?;
    let below_top = basis.interior(1);
    let id = OperatorMatrix::identity(basis.tag(), basis.dim());
    let (mut ccr, mut cross, mut number, mut involution) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..3 {
        let ad = fock::creation_op(&basis, k)?;
        let a = fock::annihilation_op(&basis, k)?;
        ccr = ccr.max(masked(&a.commutator(&ad)?.sub(&id)?, &below_top));
        number = number.max(fock::number_op(&basis, k)?.sub(&ad.mul(&a)?)?.max_abs());
        involution = involution.max(ad.adjoint().adjoint().sub(&ad)?.max_abs());
        for j in (0..3).filter(|&j| j != k) {
            let aj = fock::annihilation_op(&basis, j)?;
            cross = cross.max(aj.commutator(&a)?.max_abs());
            cross = cross.max(masked(&aj.commutator(&ad)?, &below_top));
        }
    }
    out.at_most("[a_k, a+_k] = 1 below top shell", ccr, 1e-14);
    out.at_most("[a_j, a_k], [a_j, a+_k] = 0 (j != k)", cross, 1e-14);
    out.at_most("N_k = a+_k a_k", number, 1e-14);
    out.push("adjoint involution", involution, Relation::Equal, 0.0);

    let keep = basis.interior(2);
    let e = |i, j| fock::hopping_op(&basis, i, j);
    let mut um = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut want = OperatorMatrix::identity(basis.tag(), basis.dim()).scale_re(0.0);
                    if j == k {
                        want = want.add(&e(i, l)?)?;
                    }
                    if l == i {
                        want = want.sub(&e(k, j)?)?;
                    }
                    um = um.max(masked(&e(i, j)?.commutator(&e(k, l)?)?.sub(&want)?, &keep));
                }
            }
        }
    }
    out.at_most("u(3) closure of E_ij", um, 1e-12);
    Ok(())
}

fn algebra_suite(out: &mut Rows, opts: &VerifyOptions) -> Result<()> {
    for n in [2u32, 3] {
        let (mut shift, mut structure, mut dual, mut casimir, mut su2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for sector in sweep(opts.s_max).filter(|s| s.n() == n) {
            let rep = polyalg::build_supd2_rep(sector);
            let c = polyalg::verify_commutation(&rep, 1e-10)?;
            shift = shift.max(c.raising.max(c.lowering));
            structure = structure.max(c.structure);
            dual = dual.max(polyalg::rep_difference(&rep, &polyalg::build_supd2_rep_fock(sector))?);
            let cas = polyalg::casimir_check(&rep)?;
            let expected = specdyn_core::rational_to_f64(cas.expected);
            casimir = casimir.max(cas.deviation).max((cas.value - expected).abs());
            su2 = su2.max(polyalg::verify_su2(&polyalg::hp_map(&rep)?)?.max_residual());
        }
        out.at_most(format!("n={n} [Y0, Y+-] -+ Y+- = 0"), shift, 1e-10);
        out.at_most(format!("n={n} [Y-, Y+] = Phi(Y0; R1)"), structure, 1e-10);
        out.at_most(format!("n={n} bidiagonal vs Fock-restricted build"), dual, 1e-12);
        out.at_most(format!("n={n} Casimir Psi(Y0) - Y+Y- = (s+1) kappa^(n)"), casimir, 1e-10);
        out.at_most(format!("n={n} dressed generators close su(2)"), su2, 1e-10);

        let (mut canonical, mut floors, mut nil, mut prev) = (0.0f64, true, 0.0f64, f64::INFINITY);
        for kappa in 0..n {
            let w = polyalg::w_operators(n, kappa, 60)?;
            let report = polyalg::verify_w(&w)?;
            canonical = canonical.max(report.canonical);
            floors &= report.floor_exact;
            let green = polyalg::green_nilpotency_check(&polyalg::build_supd11_rep(n, kappa, 60)?, 1e-8)?;
            nil = nil.max(green.residual);
            prev = prev.min(green.previous_norm);
        }
        out.at_most(format!("n={n} [W, W+] = 1 (N_max=60)"), canonical, 1e-10);
        out.flag(format!("n={n} N_W = floor(N/n) exactly"), floors);
        out.at_most(format!("n={n} ad^(n+1) Y+ = 0 (N_max=60)"), nil, 1e-8);
        out.push(format!("n={n} ad^n Y+ nonzero (N_max=60)"), prev, Relation::Above, 1e-3);
    }
    Ok(())
}

fn spectral_suite(out: &mut Rows, opts: &VerifyOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draws: Vec<(ModelParams, ModelParams)> =
        (0..5).map(|_| (random_params(&mut rng, 2), random_params(&mut rng, 3))).collect();
    let fixed = |n| ModelParams::new(n, 1.0, 2.0, Complex64::new(1.0, 0.0)).expect("n >= 2");
    let (mut entrywise, mut spectra, mut eig_res) = (0.0f64, 0.0f64, 0.0f64);
    for sector in sweep(opts.s_max) {
        let mut params = vec![fixed(sector.n())];
        params.extend(draws.iter().map(|(a, b)| if sector.n() == 2 { *a } else { *b }));
        for p in &params {
            let h = spectral::build_hhg(p, sector)?;
            entrywise = entrywise.max(h.sub(&spectral::build_hhg_fock(p, sector)?)?.max_abs());
            let lin = spectral::diagonalize(&h)?;
            eig_res = eig_res.max(lin.relative_residual(&h));
            for hh in [spectral::build_hhg_fock(p, sector)?, spectral::build_hqs(p, sector)?] {
                let other = spectral::diagonalize(&hh)?;
                let d = lin.eigenvalues.iter().zip(&other.eigenvalues).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                spectra = spectra.max(d);
            }
        }
    }
    out.at_most("linear vs Fock Hamiltonian entrywise", entrywise, 1e-12);
    out.at_most("linear / Fock / quasi-spin spectra agree", spectra, 1e-9);
    out.at_most("eigenvector residual / max(1, |E|)", eig_res, 1e-9);

    let mut partition = 0.0;
    let mut r1 = 0.0f64;
    for n in [2u32, 3] {
        let n_max = 12;
        let fitted: usize = spectral::decompose_sectors(n, n_max)?.iter().map(|e| e.fitted_dim).sum();
        if fitted as u128 != fock::fock_dimension(2, n_max) {
            partition += 1.0;
        }
        let model = MultiphotonModel { n, frequencies: vec![2.0, 1.0], couplings: vec![(vec![1; n as usize], Complex64::new(0.7, 0.2))] };
        let (basis, h) = spectral::build_hmp_general(&model, n_max)?;
        r1 = r1.max(h.commutator(&spectral::r1_operator(&basis, n))?.max_abs());
    }
    out.push("sector dimensions partition the two-mode basis", partition, Relation::Equal, 0.0);
    out.push("[H, R1] = 0 on the full basis", r1, Relation::Equal, 0.0);

    let conv = MultiphotonModel {
        n: 2,
        frequencies: vec![2.0, 1.0, 1.3],
        couplings: vec![(vec![1, 2], Complex64::new(0.4, -0.1))],
    };
    let (basis, h) = spectral::build_hmp_general(&conv, 8)?;
    let diff = fock::number_op(&basis, 1)?.sub(&fock::number_op(&basis, 2)?)?;
    out.at_most("frequency conversion conserves N1 - N2", h.commutator(&diff)?.max_abs(), 1e-12);

    let small = |n_max| -> Result<Vec<f64>> {
        let p = ModelParams::new(2, 1.0, 2.0, Complex64::new(0.1, 0.0))?;
        Ok(spectral::diagonalize(&spectral::build_hn_multiboson(&p, 0, n_max)?)?.eigenvalues[..5].to_vec())
    };
    let (lo, hi) = (small(40)?, small(60)?);
    let shift = lo.iter().zip(&hi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.at_most("multiboson spectrum N_max 40 vs 60 (lowest 5)", shift, 1e-6);

    let model = MultiphotonModel { n: 2, frequencies: vec![2.1, 1.0], couplings: vec![(vec![1, 1], Complex64::new(0.6, 0.3))] };
    let (basis, h) = spectral::build_hmp_general(&model, 12)?;
    let psi: Vec<Complex64> = (0..basis.dim()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let psi = linalg::normalized(&psi);
    let evo = spectral::evolve(&h, &psi, &spectral::time_grid(20.0, 41)?)?;
    let blocks: Vec<Vec<usize>> = spectral::sector_blocks(&basis, 2)?.into_values().collect();
    let energies = evo.expectations(&h)?;
    let e_drift = energies.iter().map(|e| (e - energies[0]).abs()).fold(0.0, f64::max) / energies[0].abs().max(1.0);
    out.at_most("evolution norm drift, t in [0, 20]", evo.norm_drift(), 1e-9);
    out.at_most("per-sector population drift, t in [0, 20]", evo.population_drift(&blocks), 1e-10);
    out.at_most("relative <H> drift, t in [0, 20]", e_drift, 1e-9);
    Ok(())
}

fn quasiclassics_suite(out: &mut Rows, opts: &VerifyOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let (mut gap, mut stationarity, mut violations) = (0.0f64, 0.0f64, 0u32);
    for n in [2u32, 3] {
        for kappa in 0..n {
            let sector = SectorLabel::new(n, kappa, 1)?;
            let family = CoherentFamily::new(polyalg::hp_map(&polyalg::build_supd2_rep(sector))?);
            for _ in 0..5 {
                let p = random_params(&mut rng, n);
                let h = spectral::build_hhg(&p, sector)?;
                let levels = spectral::diagonalize(&h)?.eigenvalues;
                let points = qc::stationary_points(&family, &h, 0)?;
                let best = qc::select_best(&points).ok_or(specdyn_core::Error::NoStationaryPoint)?;
                gap = gap.max((best.energy - levels[0]).abs());
                for sp in &points {
                    stationarity = stationarity.max(sp.residual).max(sp.theta_residual);
                }
                // 25 (sector, draw) pairs x 40 = 1000 trials
                for _ in 0..40 {
                    let trial = TrialState::from_polar(sector, 0, rng.random_range(0.0..std::f64::consts::PI), rng.random_range(0.0..std::f64::consts::TAU));
                    let e = qc::energy_functional(&family, &h, &trial)?;
                    let tol = 1e-12 * levels.iter().map(|x| x.abs()).fold(1.0, f64::max);
                    if e < levels[0] - tol || e > levels[levels.len() - 1] + tol {
                        violations += 1;
                    }
                }
            }
        }
    }
    out.at_most("dim-2 sectors: best coherent energy = ground energy", gap, 1e-6);
    out.at_most("stationarity residuals", stationarity, 1e-8);
    out.push("Rayleigh containment of 1000 random trials (violations)", f64::from(violations), Relation::Equal, 0.0);

    let sector = SectorLabel::new(2, 0, 8)?;
    let family = CoherentFamily::new(polyalg::hp_map(&polyalg::build_supd2_rep(sector))?);
    let h = spectral::build_hhg(&ModelParams::resonant(2, 1.0, Complex64::new(0.5, 0.0))?, sector)?;
    let (lo, hi) = family.p_range();
    let options = FlowOptions { t_end: 50.0, dt: 1e-3, record_every: 100 };
    let traj = qc::classical_flow(&family, &h, 0.3, lo + 0.3 * (hi - lo), &options)?;
    out.at_most("flow relative energy drift, (0,8), T=50, dt=1e-3", qc::relative_energy_drift(&traj), 1e-6);
    let range = traj.iter().all(|s| s.p >= lo - 1e-9 && s.p <= hi + 1e-9);
    out.flag("flow stays in p range [l0, l0 + s]", range);
    Ok(())
}

fn polarization_suite(out: &mut Rows, opts: &VerifyOptions) -> Result<()> {
    let mut closure = 0.0f64;
    for m in [1usize, 2] {
        let b = PolarizedBasis::new(m, 4)?;
        closure = closure.max(pol::verify_quasispin(&pol::build_quasispin(&b)?)?.max_residual());
    }
    out.at_most("quasispin su(2) closure and P^2 identity", closure, 1e-12);

    let b2 = PolarizedBasis::new(2, 6)?;
    let q2 = pol::build_quasispin(&b2)?;
    let clusters = pol::build_clusters(&b2)?;
    let duality = pol::duality_check(&b2, &q2, &clusters, 4)?;
    out.at_most("commutants [P, X+], [P, E], [P0, Y+] (interior)", duality.commutant_residual, 1e-12);
    out.flag("m=2 highest-weight rank test", duality.ranks_match());
    let x_diag = (1..=2).map(|i| clusters.x_plus[&(i, i)].max_abs()).fold(0.0, f64::max);
    out.push("literal X+(i,i)", x_diag, Relation::Equal, 0.0);

    let mut table_mismatch = 0u32;
    for m in [1usize, 2] {
        let b = PolarizedBasis::new(m, 6)?;
        let q = pol::build_quasispin(&b)?;
        for n in 0..=6 {
            if pol::numeric_multiplicities(&b, &q, n) != pol::counted_multiplicities(&b, n) {
                table_mismatch += 1;
            }
        }
    }
    out.push("multiplicity tables m in {1,2}, N <= 6 (mismatches)", f64::from(table_mismatch), Relation::Equal, 0.0);
    let n2 = pol::numeric_multiplicities(&b2, &q2, 2);
    out.flag("m=2, N=2 table {p=1: 3, p=0: 1}", n2 == [(0, 1), (2, 3)].into_iter().collect());

    let (mut moments, mut invariance, mut verdicts) = (0.0f64, 0.0f64, true);
    let x12 = &clusters.x_plus[&(1, 2)];
    let mut v = b2.vacuum();
    for _k in 1..=3 {
        v = x12.matrix().matvec(&v);
        let st = QuantumState::pure_normalized(&v)?;
        let rep = pol::classify_ul(&st, &q2, 6, pol::PURE_TOL, 32, opts.seed)?;
        moments = moments.max(rep.moments.max_abs_all());
        invariance = invariance.max(rep.max_state_residual(pol::GroupFamily::Su2));
        verdicts &= rep.verdict == UlVerdict::PScalar;
    }
    out.at_most("singlet powers k=1..3: moments s <= 6", moments, 1e-9);
    out.at_most("singlet powers: invariance over 32 SU(2)_p samples", invariance, 1e-8);
    out.flag("singlet powers classified P-scalar", verdicts);

    let b1 = PolarizedBasis::new(1, 30)?;
    let q1 = pol::build_quasispin(&b1)?;
    let tmsv = QuantumState::Pure(pol::tmsv_state(Complex64::new(0.5, 0.0), &b1)?);
    let rep = pol::classify_ul(&tmsv, &q1, 6, pol::PURE_TOL, 32, opts.seed)?;
    out.push("TMSV(0.5): max |<P0^s>|, s <= 6", rep.moments.max_abs(0), Relation::Equal, 0.0);
    out.push("TMSV(0.5): <P1^2>", rep.moments.values[1][1], Relation::Above, 1e-3);
    out.flag("TMSV(0.5) classified P0-scalar", rep.verdict == UlVerdict::P0Scalar);

    let one = PolarizedBasis::new(1, 2)?;
    let q_one = pol::build_quasispin(&one)?;
    let st = QuantumState::Pure(one.ket(&[(1, 0)])?);
    let rep = pol::classify_ul(&st, &q_one, 6, pol::PURE_TOL, 32, opts.seed)?;
    out.at_most("|1,0>: |P - 1|", (rep.polarization_degree - 1.0).abs(), 1e-10);
    out.flag("|1,0> classified polarized", rep.verdict == UlVerdict::Polarized);

    let g = Complex64::new(0.8, 0.3);
    let b = PolarizedBasis::new(1, 24)?;
    let h = pol::quadratic_hamiltonian(&[0.0], &pol::pair_preset(&[(1, 1, g)], true), &b)?;
    let t = 0.1 / g.norm();
    let evolved = linalg::expm_apply_hermitian(h.matrix(), t, &b.vacuum());
    let target = pol::tmsv_state(Complex64::new(0.0, -2.0 * t) * g, &b)?;
    out.at_most("Y-preset evolution: 1 - |<TMSV|psi(t)>|", 1.0 - linalg::vdot(&target, &evolved).norm(), 1e-6);
    Ok(())
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rows = Vec::new();
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    let mut run_one = |name: &'static str, f: &dyn Fn(&mut Rows) -> Result<()>| -> Result<()> {
        let mut r = Rows { suite: name, rows: Vec::new() };
        f(&mut r)?;
        rows.extend(r.rows);
        Ok(())
    };
    if wanted(Suite::Fock) {
        run_one("fock", &fock_suite)?;
    }
    if wanted(Suite::Algebra) {
        run_one("algebra", &|r| algebra_suite(r, opts))?;
    }
    if wanted(Suite::Spectral) {
        run_one("spectral", &|r| spectral_suite(r, opts))?;
    }
    if wanted(Suite::Quasiclassics) {
        run_one("quasiclassics", &|r| quasiclassics_suite(r, opts))?;
    }
    if wanted(Suite::Polarization) {
        run_one("polarization", &|r| polarization_suite(r, opts))?;
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(VerifyReport { seed: opts.seed, s_max: opts.s_max, rows, passed })
}

/// Fixed-width residual table.
pub fn render_table(report: &VerifyReport) -> String {
    let width = report.rows.iter().map(|r| r.check.chars().count()).max().unwrap_or(5).max(5);
    let mut s = String::new();
    let _ = writeln!(s, "{:<13}  {:<width$}  {:>10}  {:>2}  {:>10}  status", "suite", "check", "value", "", "bound");
    for r in &report.rows {
        let pad = width - r.check.chars().count();
        let _ = writeln!(
            s,
            "{:<13}  {}{}  {:>10.3e}  {:>2}  {:>10.3e}  {}",
            r.suite,
            r.check,
            " ".repeat(pad),
            r.value,
            r.relation.symbol(),
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed = report.rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(s, "seed {}  checks {}  failed {}", report.seed, report.rows.len(), failed);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_suite_passes() {
        let report = run(Suite::Fock, &VerifyOptions::default()).unwrap();
        assert!(report.passed, "{}", render_table(&report));
        assert!(report.rows.len() >= 5);
    }

    #[test]
    fn table_lists_every_row() {
        let report = run(Suite::Fock, &VerifyOptions { seed: 3, s_max: 2 }).unwrap();
        let table = render_table(&report);
        assert_eq!(table.lines().count(), report.rows.len() + 2);
        assert!(table.ends_with("failed 0\n"));
    }

    #[test]
    fn relations() {
        let mut r = Rows { suite: "x", rows: Vec::new() };
        r.at_most("a", 1.0, 1.0);
        r.push("b", 1.0, Relation::Above, 1.0);
        r.flag("c", true);
        assert_eq!(r.rows.iter().map(|x| x.pass).collect::<Vec<_>>(), [true, false, true]);
    }
}

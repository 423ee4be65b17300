use std::collections::BTreeMap;

use specdyn_core::fock::{self, OccupationState};
use specdyn_core::linalg;
use specdyn_core::polarization::*;
use specdyn_core::polyalg::*;
use specdyn_core::quasiclassics::*;
use specdyn_core::spectral::*;
use specdyn_core::Complex64;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

// matrix element ⟨η+1|a₁⁺ⁿ a₀|η⟩² from occupations alone
fn ladder_weight(n: u32, kappa: u32, s: u32, eta: u32) -> f64 {
    let n0 = f64::from(s - eta);
    let n1 = kappa + n * eta;
    (1..=n).map(|k| f64::from(n1 + k)).product::<f64>() * n0
}

#[test]
fn shift_entries_match_occupation_products() {
    for n in [2, 3] {
        for kappa in 0..n {
            for s in 1..=12 {
                let rep = build_supd2_rep(SectorLabel::new(n, kappa, s).unwrap());
                for eta in 0..s {
                    let want = ladder_weight(n, kappa, s, eta).sqrt();
                    let got = rep.y_plus.entry(eta as usize + 1, eta as usize).re;
                    assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{n} {kappa} {s} {eta}");
                }
            }
        }
    }
}

#[test]
fn sector_dimensions_by_enumeration() {
    for n in [2, 3] {
        let n_max = 9;
        let mut counts: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for n0 in 0..=n_max {
            for n1 in 0..=(n_max - n0) {
                let st = OccupationState(vec![n0, n1]);
                let label = sector_of(n, &st).unwrap();
                *counts.entry((label.s(), label.kappa())).or_default() += 1;
            }
        }
        let entries = decompose_sectors(n, n_max).unwrap();
        let listed: BTreeMap<(u32, u32), usize> =
            entries.iter().map(|e| ((e.label.s(), e.label.kappa()), e.fitted_dim)).collect();
        assert_eq!(listed, counts);
        for e in entries {
            assert_eq!(e.complete, e.fitted_dim == e.label.dim());
        }
    }
}

#[test]
fn two_level_sector_spectrum() {
    // hand-diagonalized 2x2 block
    let p = ModelParams::new(2, 1.0, 2.0, c(1.0)).unwrap();
    let sector = SectorLabel::new(2, 0, 1).unwrap();
    let spec = diagonalize(&build_hhg(&p, sector).unwrap()).unwrap();
    let want = [2.0 - 2f64.sqrt(), 2.0 + 2f64.sqrt()];
    for (e, w) in spec.eigenvalues.iter().zip(want) {
        assert!((e - w).abs() <= 1e-12);
    }
}

#[test]
fn rabi_oscillation_in_two_level_sector() {
    let p = ModelParams::resonant(2, 1.0, c(0.7)).unwrap();
    let sector = SectorLabel::new(2, 0, 1).unwrap();
    let h = build_hhg(&p, sector).unwrap();
    let coupling = h.entry(1, 0).norm();
    let times = time_grid(5.0, 51).unwrap();
    let evo = evolve(&h, &[c(1.0), c(0.0)], &times).unwrap();
    let pops = evo.block_populations(&[vec![1]]);
    for (t, p1) in times.iter().zip(&pops[0]) {
        let want = (coupling * t).sin().powi(2);
        assert!((p1 - want).abs() <= 1e-12);
    }
}

#[test]
fn variational_minimum_below_every_trial() {
    let sector = SectorLabel::new(2, 1, 4).unwrap();
    let p = ModelParams::new(2, 1.1, 1.7, Complex64::new(0.4, 0.2)).unwrap();
    let h = build_hhg(&p, sector).unwrap();
    let fam = CoherentFamily::new(hp_map(&build_supd2_rep(sector)).unwrap());
    let pts = stationary_points(&fam, &h, 0).unwrap();
    let lowest = pts.iter().map(|q| q.energy).fold(f64::INFINITY, f64::min);
    let levels = diagonalize(&h).unwrap().eigenvalues;
    let (exact, top) = (levels[0], levels[levels.len() - 1]);
    assert!(lowest >= exact - 1e-10);
    for k in 0..50 {
        let (r, th) = (0.06 * f64::from(k), 0.37 * f64::from(k));
        let e = energy_functional(&fam, &h, &TrialState::from_polar(sector, 0, r, th)).unwrap();
        assert!(e >= exact - 1e-10 && e <= top + 1e-10);
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

// states with N₊ photons in the + modes and N₋ in the − modes
fn weight_dim(m: u64, n_plus: u64, n_minus: u64) -> u64 {
    binomial(n_plus + m - 1, m - 1) * binomial(n_minus + m - 1, m - 1)
}

#[test]
fn multiplicities_match_character_counts() {
    for m in [1usize, 2] {
        let basis = PolarizedBasis::new(m, 6).unwrap();
        let q = build_quasispin(&basis).unwrap();
        for n in 0..=6u64 {
            let mut oracle = BTreeMap::new();
            for two_p in (0..=n).filter(|tp| (n - tp) % 2 == 0) {
                let top = weight_dim(m as u64, (n + two_p) / 2, (n - two_p) / 2);
                let above = if two_p + 2 <= n { weight_dim(m as u64, (n + two_p) / 2 + 1, (n - two_p) / 2 - 1) } else { 0 };
                if top > above {
                    oracle.insert(two_p as u32, (top - above) as usize);
                }
            }
            assert_eq!(numeric_multiplicities(&basis, &q, n as u32), oracle, "m={m} N={n}");
            assert_eq!(counted_multiplicities(&basis, n as u32), oracle);
        }
    }
}

#[test]
fn tmsv_matches_dense_exponential() {
    let beta = Complex64::from_polar(0.5, -0.4);
    let small = PolarizedBasis::new(1, 30).unwrap();
    let psi = tmsv_state(beta, &small).unwrap();
    let big = PolarizedBasis::new(1, 40).unwrap();
    let y = y_plus(&big, 1, 1).unwrap();
    // exp(βY⁺ - β*Y) = exp(-iK) with K = i(βY⁺ - β*Y)
    let k = y.scale(beta * Complex64::i()).add(&y.adjoint().scale(-beta.conj() * Complex64::i())).unwrap();
    let dense = linalg::expm_apply_hermitian(k.matrix(), 1.0, &big.vacuum());
    for kk in 0..=15u32 {
        let a = psi[small.fock().index_of(&small.occupation(&[(kk, kk)]).unwrap()).unwrap()];
        let b = dense[big.fock().index_of(&big.occupation(&[(kk, kk)]).unwrap()).unwrap()];
        assert!((a - b).norm() <= 1e-9, "k={kk}");
    }
}

#[test]
fn y_preset_evolution_reproduces_tmsv() {
    let g = Complex64::new(0.8, 0.3);
    let basis = PolarizedBasis::new(1, 24).unwrap();
    let h = quadratic_hamiltonian(&[0.0], &pair_preset(&[(1, 1, g)], true), &basis).unwrap();
    for t in [0.02, 0.06, 0.1 / g.norm()] {
        let evolved = linalg::expm_apply_hermitian(h.matrix(), t, &basis.vacuum());
        let target = tmsv_state(Complex64::new(0.0, -2.0 * t) * g, &basis).unwrap();
        let overlap = linalg::vdot(&target, &evolved).norm();
        assert!(overlap >= 1.0 - 1e-6, "t={t} overlap={overlap}");
    }
}

#[test]
fn x_preset_keeps_p_scalar_light() {
    let basis = PolarizedBasis::new(2, 4).unwrap();
    let q = build_quasispin(&basis).unwrap();
    let h = quadratic_hamiltonian(&[0.0, 0.0], &pair_preset(&[(1, 2, c(0.1))], false), &basis).unwrap();
    let psi = linalg::expm_apply_hermitian(h.matrix(), 0.5, &basis.vacuum());
    let st = QuantumState::pure_normalized(&psi).unwrap();
    let table = moment_profile(&st, &q, 4).unwrap();
    assert!(table.max_abs_all() <= 1e-12);
}

#[test]
fn number_operator_expectations() {
    let basis = fock::build_basis(1, 4).unwrap();
    let n = fock::number_op(&basis, 0).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![c(0.0); basis.dim()];
    psi[0] = c(r);
    psi[2] = c(r);
    assert!((fock::expect(&n, &psi).unwrap().re - 1.0).abs() <= 1e-15);
}

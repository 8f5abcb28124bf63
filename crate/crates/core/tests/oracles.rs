//! Library results against independent reference computations.

mod common;

use faer::c64;
use nesslab::bath::{correlation_rate, BathSpec, CouplingOperator};
use nesslab::engine::Dissipation;
use nesslab::lindblad::{self, LindbladSpec};
use nesslab::model::{build_hamiltonian, build_primitives, Eigensystem, Family, ModelSpec};
use nesslab::observables;
use nesslab::redfield;
use nesslab::state::DensityMatrix;
use proptest::prelude::*;

fn family(k: usize) -> Family {
    Family::ALL[k % Family::ALL.len()]
}

fn model(k: usize, delta: f64, lambda: f64, s: f64, eps: f64, nb: usize) -> ModelSpec {
    ModelSpec::rabi(delta, lambda).with_family(family(k)).with_s(s).with_epsilon(eps).with_boson_levels(nb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_matches_term_by_term_assembly(
        k in 0usize..5, delta in 0.0..8.0f64, lambda in 0.0..1.5f64, s in 0.0..1.0f64,
        eps in 0.0..0.5f64, nb in 2usize..9,
    ) {
        let m = model(k, delta, lambda, s, eps, nb);
        let h = build_hamiltonian(&m).unwrap();
        let want = common::hamiltonian_reference(&m);
        for (i, row) in want.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                prop_assert!((h[(i, j)] - c64::new(x, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn eigenvalues_match_jacobi(
        k in 0usize..5, delta in 0.0..8.0f64, lambda in 0.0..1.5f64, s in 0.0..1.0f64,
        eps in 0.0..0.5f64, nb in 2usize..9,
    ) {
        let m = model(k, delta, lambda, s, eps, nb);
        let eig = Eigensystem::of_model(&m).unwrap();
        let want = common::jacobi_eigenvalues(common::hamiltonian_reference(&m));
        for (a, b) in eig.energies.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn kernel_matches_emission_absorption_rules(
        eps in -5.0..5.0f64, eta in 1e-6..1.0f64, gamma in 0.1..5.0f64, t in prop_oneof![Just(0.0), 0.01..5.0f64],
    ) {
        let got = correlation_rate(eps, eta, gamma, t);
        let want = common::kernel_reference(eps, eta, gamma, t);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
}

#[test]
fn kernel_at_zero_gap_is_ohmic_limit() {
    assert_eq!(correlation_rate(0.0, 0.3, 1.0, 2.0), common::kernel_reference(0.0, 0.3, 1.0, 2.0));
    assert!((correlation_rate(0.0f64, 0.3, 1.0, 2.0) - 0.6).abs() < 1e-15);
}

#[test]
fn lindblad_ness_matches_product_basis_svd() {
    // Rates large enough for a plain SVD to resolve the null direction.
    for (delta, lambda) in [(1.0, 0.2), (2.3, 0.6), (3.0, 1.0)] {
        let m = ModelSpec::rabi(delta, lambda).with_boson_levels(5);
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let spec = LindbladSpec::new(1e-3, 2e-2).unwrap();
        let h = build_hamiltonian(&m).unwrap();
        let l = lindblad::build_liouvillian(&h, &spec, &p).unwrap();
        let (want, smallest, second) = common::svd_null_matrix(&l.matrix, m.hilbert.dim());
        assert!(smallest < 1e-12 * second);
        for le in [&l, &lindblad::build_liouvillian_energy(&eig, &spec, &p).unwrap()] {
            let got = lindblad::steady_state(le).unwrap();
            let dist = common::trace_distance(&got.rho.matrix().to_owned(), &want);
            assert!(dist < 1e-10, "({delta}, {lambda}): {dist:e}");
        }
    }
}

#[test]
fn lindblad_ness_at_working_rates_matches_equilibrated_svd() {
    let m = ModelSpec::rabi(3.0, 0.2).with_boson_levels(8);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    let spec = Dissipation::default().lindblad().unwrap();
    let h = build_hamiltonian(&m).unwrap();
    let l = lindblad::build_liouvillian(&h, &spec, &p).unwrap();
    let (want, _, _) = common::svd_null_energy_basis(&l.matrix, &eig.vectors);
    let got = lindblad::steady_state(&lindblad::build_liouvillian_energy(&eig, &spec, &p).unwrap()).unwrap();
    let dist = common::trace_distance(&got.rho.matrix().to_owned(), &want);
    assert!(dist < 1e-8, "{dist:e}");
}

#[test]
fn redfield_elements_match_quadruple_loop() {
    let m = ModelSpec::rabi(1.3, 0.4).with_boson_levels(3);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    let baths = [
        BathSpec { eta: 0.03, gamma: 1.3, temperature: 1.1, coupling: CouplingOperator::SpinSigmaX },
        BathSpec { eta: 0.01, gamma: 0.7, temperature: 0.0, coupling: CouplingOperator::BosonPosition },
    ];
    let t = redfield::build_redfield_tensor(&eig, &baths, &p, false).unwrap();
    let d = eig.dim();
    for m_ in 0..d {
        for n in 0..d {
            for o in 0..d {
                for q in 0..d {
                    let mut total = c64::new(0.0, 0.0);
                    for (y, b) in baths.iter().enumerate() {
                        let s = eig.to_eigenbasis(&b.coupling.matrix(&p));
                        let g = |e: f64| common::kernel_reference(e, b.eta, b.gamma, b.temperature);
                        let want = common::redfield_reference(&eig.energies, &s, &g, m_, n, o, q);
                        assert!((t.element(Some(y), m_, n, o, q) - want).norm() < 1e-14);
                        total += want;
                    }
                    assert!((t.element(None, m_, n, o, q) - total).norm() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn thermal_state_matches_explicit_sum() {
    let m = ModelSpec::rabi(2.0, 0.5).with_boson_levels(6);
    let eig = Eigensystem::of_model(&m).unwrap();
    for t in [0.0, 0.3, 1.0, 4.0] {
        let got = observables::thermal_state(&eig, t).unwrap();
        let want = common::gibbs_reference(&eig.energies, &eig.vectors, t);
        assert!(common::trace_distance(&got.matrix().to_owned(), &want) < 1e-13, "T = {t}");
    }
}

#[test]
fn secular_redfield_at_equal_temperature_is_gibbs() {
    let m = ModelSpec::rabi(2.5, 0.2).with_boson_levels(8);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    for t in [0.0, 0.5, 2.5] {
        let d = Dissipation { t_s: t, t_b: t, ..Dissipation::default() };
        let tensor = redfield::build_redfield_tensor(&eig, &d.baths(&m).unwrap(), &p, true).unwrap();
        let ness = redfield::redfield_steady_state(&tensor).unwrap();
        let want = common::gibbs_reference(&eig.energies, &eig.vectors, t);
        assert!(common::trace_distance(&ness.rho.matrix().to_owned(), &want) < 1e-8, "T = {t}");
    }
}

#[test]
fn spin_decay_population_is_exponential() {
    // λ̃ = 0 decouples the spin, whose up population then decays at r_s.
    let m = ModelSpec::rabi(1.0, 0.0).with_boson_levels(2);
    let p = build_primitives(m.hilbert).unwrap();
    let spec = LindbladSpec::new(0.3, 0.0).unwrap();
    let l = lindblad::build_liouvillian(&build_hamiltonian(&m).unwrap(), &spec, &p).unwrap();
    let rho0 = DensityMatrix::basis(m.hilbert, 0, 0).unwrap();
    let times = [0.5, 1.0, 2.0, 7.0];
    for (t, rho) in times.iter().zip(lindblad::propagate(&l, &rho0, &times).unwrap()) {
        let up = observables::local_populations(&rho).spin_up;
        assert!((up - (-0.3 * t).exp()).abs() < 1e-9);
    }
}

#[test]
fn decoupled_ness_is_joint_ground_state() {
    let m = ModelSpec::rabi(2.0, 0.0).with_boson_levels(5);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    let spec = LindbladSpec::new(1e-4, 1e-3).unwrap();
    let ness = lindblad::steady_state(&lindblad::build_liouvillian_energy(&eig, &spec, &p).unwrap()).unwrap();
    let want = DensityMatrix::basis(m.hilbert, 1, 0).unwrap();
    let dist = common::trace_distance(&ness.rho.matrix().to_owned(), &want.matrix().to_owned());
    assert!(dist < 1e-12);
}

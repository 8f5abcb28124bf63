//! Invariants that hold for every model, rate and grid.

use faer::{c64, Mat};
use nesslab::analysis::{entanglement_entropy, entanglement_entropy_boson};
use nesslab::engine::{self, Dissipation, EngineKind};
use nesslab::lindblad::{self, LindbladSpec};
use nesslab::linalg;
use nesslab::model::{
    build_hamiltonian, build_parity, build_primitives, Eigensystem, Family, ModelAxis, ModelSpec,
};
use nesslab::observables;
use nesslab::redfield;
use nesslab::state::DensityMatrix;
use nesslab::sweep::{
    linear_grid, refine_grid, run_point, run_sweep, FeatureKind, ObservableKey, SweepAxis, SweepParam,
    SweepPlan, ThermalReference,
};
use proptest::prelude::*;

fn model(k: usize, delta: f64, lambda: f64, s: f64, eps: f64, nb: usize) -> ModelSpec {
    ModelSpec::rabi(delta, lambda)
        .with_family(Family::ALL[k % Family::ALL.len()])
        .with_s(s)
        .with_epsilon(eps)
        .with_boson_levels(nb)
}

fn hermitian(d: usize, entries: &[f64]) -> Mat<c64> {
    let a = Mat::from_fn(d, d, |i, j| c64::new(entries[(i * d + j) % entries.len()], entries[(j * d + i + 7) % entries.len()]));
    linalg::hermitize(a.as_ref())
}

fn plan(m: ModelSpec, d: Dissipation, engine: EngineKind, grid: Vec<f64>) -> SweepPlan {
    SweepPlan {
        model: m,
        dissipation: d,
        engine,
        axes: vec![SweepAxis { param: SweepParam::Model(ModelAxis::DeltaTilde), grid }],
        thermal: ThermalReference::Fixed(0.0),
        observables: vec![(ObservableKey::FluxMagnitude, FeatureKind::Dip)],
    }
}

prop_compose! {
    fn any_model()(k in 0usize..5, delta in 0.1..6.0f64, lambda in 0.0..1.2f64, s in 0.0..1.0f64,
                   eps in 0.0..0.4f64, nb in 2usize..7) -> ModelSpec {
        model(k, delta, lambda, s, eps, nb)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(
        m in any_model(), r_s in 0.0..0.1f64, r_b in 0.0..0.1f64,
        entries in prop::collection::vec(-1.0..1.0f64, 50),
    ) {
        let p = build_primitives(m.hilbert).unwrap();
        let spec = LindbladSpec::new(r_s, r_b).unwrap();
        let l = lindblad::build_liouvillian(&build_hamiltonian(&m).unwrap(), &spec, &p).unwrap();
        let rho = hermitian(m.hilbert.dim(), &entries);
        let out = l.apply(&rho);
        prop_assert!(linalg::trace(out.as_ref()).norm() < 1e-10);
        prop_assert!(linalg::hermiticity_defect(out.as_ref()) < 1e-10);
    }

    #[test]
    fn steady_states_are_density_matrices(
        m in any_model(), r_s in 1e-6..1e-2f64, r_b in 1e-6..1e-2f64, engine in 0usize..4,
    ) {
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let d = Dissipation { r_s, r_b, t_s: 0.7, ..Dissipation::default() };
        let out = engine::solve(EngineKind::ALL[engine], &m, &eig, &p, &d).unwrap();
        prop_assert!(out.rho.check(1e-10, 1e-10, 1e-8).is_ok());
        let total: f64 = out.populations.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parity_commutes_with_symmetric_hamiltonians(
        delta in 0.0..8.0f64, lambda in 0.0..2.0f64, s in 0.0..1.0f64, nb in 2usize..10, k in 0usize..3,
    ) {
        let family = [Family::Rabi, Family::JaynesCummings, Family::Interpolated][k];
        let m = ModelSpec::rabi(delta, lambda).with_family(family).with_s(s).with_boson_levels(nb);
        let h = build_hamiltonian(&m).unwrap();
        let par = build_parity(m.hilbert).unwrap();
        prop_assert!(linalg::max_abs(linalg::commutator(h.as_ref(), par.as_ref()).as_ref()) < 1e-12);
    }

    #[test]
    fn eigenstate_entropy_is_bounded_and_symmetric(m in any_model()) {
        let eig = Eigensystem::of_model(&m).unwrap();
        for k in 0..eig.dim() {
            let psi: Vec<c64> = (0..eig.dim()).map(|i| eig.vectors[(i, k)]).collect();
            let s = entanglement_entropy(m.hilbert, &psi);
            prop_assert!((-1e-12..=std::f64::consts::LN_2 + 1e-12).contains(&s));
            let sb = entanglement_entropy_boson(m.hilbert, &psi).unwrap();
            prop_assert!((s - sb).abs() < 1e-9, "spin {s} boson {sb}");
        }
    }

    #[test]
    fn secular_rates_conserve_probability(m in any_model(), r_s in 0.0..1.0f64, r_b in 0.0..1.0f64) {
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let w = lindblad::build_secular_rates(&eig, &LindbladSpec::new(r_s, r_b).unwrap(), &p).unwrap();
        let d = eig.dim();
        for n in 0..d {
            let col: f64 = (0..d).map(|m| w.rates[m][n]).sum();
            prop_assert!(col.abs() < 1e-12);
            for m in 0..d {
                if m != n {
                    prop_assert!(w.rates[m][n] >= 0.0);
                    prop_assert!(w.coherence_decay[m][n] <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn equal_temperature_redfield_rates_obey_detailed_balance(
        delta in 0.5..5.0f64, lambda in 0.05..1.0f64, t in 0.2..3.0f64, nb in 2usize..6,
    ) {
        let m = ModelSpec::rabi(delta, lambda).with_boson_levels(nb);
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let d = Dissipation { t_s: t, t_b: t, ..Dissipation::default() };
        let tensor = redfield::build_redfield_tensor(&eig, &d.baths(&m).unwrap(), &p, true).unwrap();
        for bath in 0..2 {
            let w = tensor.population_rates(bath);
            for a in 0..eig.dim() {
                for b in 0..eig.dim() {
                    let gap = eig.energies[b] - eig.energies[a];
                    if a == b || gap.abs() < 1e-6 || w[b][a] < 1e-300 || w[a][b] < 1e-300 {
                        continue;
                    }
                    let ratio = w[a][b] / w[b][a];
                    prop_assert!((ratio / (gap / t).exp() - 1.0).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn secular_ness_invariant_under_common_rate_scaling(
        delta in 0.5..5.0f64, lambda in 0.05..1.0f64, c in 0.01..100.0f64,
    ) {
        let m = ModelSpec::rabi(delta, lambda).with_boson_levels(6);
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let base = Dissipation { r_s: 1e-6, r_b: 1e-4, ..Dissipation::default() };
        let scaled = Dissipation { r_s: c * base.r_s, r_b: c * base.r_b, ..base };
        let a = engine::solve(EngineKind::LindbladSecular, &m, &eig, &p, &base).unwrap();
        let b = engine::solve(EngineKind::LindbladSecular, &m, &eig, &p, &scaled).unwrap();
        for (x, y) in a.populations.iter().zip(&b.populations) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert!((b.spin_flux - c * a.spin_flux).abs() <= 1e-8 * (c * a.spin_flux).abs() + 1e-300);
    }

    #[test]
    fn spin_flux_is_minus_rate_times_excited_population(
        m in any_model(), r_s in 1e-5..1e-2f64, r_b in 1e-5..1e-2f64,
    ) {
        let eig = Eigensystem::of_model(&m).unwrap();
        let p = build_primitives(m.hilbert).unwrap();
        let d = Dissipation { r_s, r_b, ..Dissipation::default() };
        let out = engine::solve(EngineKind::LindbladFull, &m, &eig, &p, &d).unwrap();
        let up = observables::local_populations(&out.rho).spin_up;
        prop_assert!((out.spin_flux + r_s * up).abs() < 1e-12 * r_s.max(1e-300) + 1e-18);
    }

    #[test]
    fn refined_grid_is_strictly_increasing_superset(
        start in -2.0..2.0f64, n in 2usize..200, step in 1e-3..0.1f64,
        centers in prop::collection::vec(-3.0..6.0f64, 0..5), half in 1e-3..0.5f64, fine in 1e-5..1e-2f64,
    ) {
        let grid = linear_grid(start, start + step * n as f64, step);
        let out = refine_grid(&grid, &centers, half, fine);
        prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
        for g in &grid {
            prop_assert!(out.contains(g));
        }
    }
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let pl = plan(ModelSpec::rabi(1.0, 0.2).with_boson_levels(8), Dissipation::default(), EngineKind::LindbladSecular, linear_grid(0.5, 3.5, 0.1));
    let a = run_sweep(&pl, 1).unwrap();
    let b = run_sweep(&pl, 3).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        let (p, q) = (x.ok().unwrap(), y.ok().unwrap());
        assert_eq!(p.observables.spin_flux.to_bits(), q.observables.spin_flux.to_bits());
        assert_eq!(p.observables.purity.to_bits(), q.observables.purity.to_bits());
        assert_eq!(p.populations, q.populations);
    }
}

#[test]
fn one_point_sweep_equals_direct_evaluation() {
    for engine in EngineKind::ALL {
        let m = ModelSpec::rabi(2.0, 0.3).with_boson_levels(6);
        let d = Dissipation { t_s: 1.0, ..Dissipation::default() };
        let rec = run_sweep(&plan(m, d, engine, vec![2.7]), 1).unwrap();
        let m27 = ModelSpec { delta_tilde: 2.7, ..m };
        let eig = Eigensystem::of_model(&m27).unwrap();
        let direct = run_point(engine, &m27, &d, &eig, &build_primitives(m.hilbert).unwrap(), 0.0).unwrap();
        assert_eq!(rec[0].ok().unwrap(), &direct, "{}", engine.name());
    }
}

#[test]
fn zero_coupling_carries_no_flux() {
    for engine in [EngineKind::LindbladFull, EngineKind::LindbladSecular] {
        let pl = plan(ModelSpec::rabi(1.0, 0.0).with_boson_levels(6), Dissipation::default(), engine, linear_grid(0.5, 6.5, 0.5));
        for r in run_sweep(&pl, 2).unwrap() {
            assert_eq!(r.ok().unwrap().observables.spin_flux, 0.0);
        }
    }
}

#[test]
fn secular_and_full_flux_agree_along_a_sweep() {
    let grid = linear_grid(0.5, 5.4, 0.1);
    assert_eq!(grid.len(), 50);
    let m = ModelSpec::rabi(1.0, 0.2).with_boson_levels(10);
    let full = run_sweep(&plan(m, Dissipation::default(), EngineKind::LindbladFull, grid.clone()), 2).unwrap();
    let sec = run_sweep(&plan(m, Dissipation::default(), EngineKind::LindbladSecular, grid), 2).unwrap();
    for (a, b) in full.iter().zip(&sec) {
        let (x, y) = (a.ok().unwrap().observables.spin_flux, b.ok().unwrap().observables.spin_flux);
        assert!((x - y).abs() <= 0.01 * x.abs().max(y.abs()), "at {:?}: {x:e} vs {y:e}", a.params);
    }
}

#[test]
fn secular_propagation_relaxes_to_secular_ness() {
    let m = ModelSpec::rabi(1.4, 0.3).with_boson_levels(6);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    let spec = LindbladSpec::new(1e-3, 1e-2).unwrap();
    let w = lindblad::build_secular_rates(&eig, &spec, &p).unwrap();
    let ness = lindblad::secular_steady_populations(&w.rates).unwrap();
    let rho0 = DensityMatrix::basis(m.hilbert, 0, 3).unwrap();
    let traj = lindblad::secular_propagate(&eig, &w, &rho0, &[1e2, 1e4, 1e7]).unwrap();
    let last = observables::eigenbasis_populations(&eig, traj.last().unwrap());
    for (x, y) in last.iter().zip(&ness) {
        assert!((x - y).abs() < 1e-9);
    }
    for rho in &traj {
        assert!(rho.check(1e-10, 1e-10, 1e-9).is_ok());
    }
}

#[test]
fn unbiased_redfield_dynamics_restores_purity() {
    let m = ModelSpec::rabi(2.0, 0.2).with_boson_levels(6);
    let eig = Eigensystem::of_model(&m).unwrap();
    let p = build_primitives(m.hilbert).unwrap();
    let d = Dissipation { eta_b: 1e-2, ..Dissipation::default() };
    let tensor = redfield::build_redfield_tensor(&eig, &d.baths(&m).unwrap(), &p, true).unwrap();
    let rho0 = DensityMatrix::basis(m.hilbert, 0, 0).unwrap();
    let traj = redfield::redfield_propagate(&tensor, &rho0, &[1.0, 1e2, 1e4, 1e8]).unwrap();
    let purity: Vec<f64> = traj.iter().map(observables::purity).collect();
    assert!(purity.iter().any(|&x| x < 0.99));
    assert!((purity[3] - 1.0).abs() < 1e-4, "{purity:?}");
}

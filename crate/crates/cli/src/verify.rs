//! Post-run invariant checks behind `--verify`.

use nesslab::engine::EngineKind;
use nesslab::model::{build_primitives, Eigensystem};
use nesslab::observables;
use nesslab::sweep::{run_point, SweepPlan, SweepRecord};

use crate::config::RunConfig;
use crate::run::LineAnalysis;

/// Slack for quantities bounded to `[0, 1]`.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Largest accepted steady-state residual.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Largest trace distance between an equal-temperature secular Redfield NESS
/// and the Gibbs state.
pub const GIBBS_TOLERANCE: f64 = 1e-8;

fn in_unit(x: f64) -> bool {
    (-BOUND_TOLERANCE..=1.0 + BOUND_TOLERANCE).contains(&x)
}

fn at(params: &[f64]) -> String {
    let p: Vec<String> = params.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", p.join(", "))
}

/// Every violated invariant, one line each.
pub fn verify(_cfg: &RunConfig, plan: &SweepPlan, records: &[SweepRecord], lines: &[LineAnalysis]) -> Vec<String> {
    let mut v = Vec::new();
    let expected = plan.points().len();
    if records.len() != expected {
        v.push(format!("record count {} differs from grid size {expected}", records.len()));
    }
    for r in records {
        let Some(p) = r.ok() else { continue };
        let o = &p.observables;
        for (name, x) in [
            ("p_down", o.spin_down_population),
            ("p_boson0", o.boson_ground_population),
            ("purity", o.purity),
            ("trace_distance_thermal", o.trace_distance_to_thermal),
        ] {
            if !in_unit(x) {
                v.push(format!("{name} = {x} outside [0, 1] at {}", at(&r.params)));
            }
        }
        if !o.spin_flux.is_finite() {
            v.push(format!("spin_flux not finite at {}", at(&r.params)));
        }
        if !(p.residual <= RESIDUAL_TOLERANCE) {
            v.push(format!("residual {:e} above {RESIDUAL_TOLERANCE:e} at {}", p.residual, at(&r.params)));
        }
        let total: f64 = p.populations.iter().sum();
        if (total - 1.0).abs() > BOUND_TOLERANCE {
            v.push(format!("populations sum to {total} at {}", at(&r.params)));
        }
    }
    for l in lines {
        for m in &l.report.matches {
            if m.feature >= l.report.features.len() {
                v.push(format!("dip match refers to missing feature {} on line {}", m.feature, at(&l.outer)));
            }
        }
    }
    v.extend(determinism(plan, records));
    if plan.engine == EngineKind::RedfieldSecular {
        v.extend(gibbs(plan, records));
    }
    v
}

/// Re-evaluates the first and last points and demands bitwise equality.
fn determinism(plan: &SweepPlan, records: &[SweepRecord]) -> Vec<String> {
    let mut v = Vec::new();
    let Ok(prims) = build_primitives(plan.model.hilbert) else {
        return vec!["primitive operators could not be rebuilt".to_string()];
    };
    let picks: Vec<&SweepRecord> = match records {
        [] => Vec::new(),
        [one] => vec![one],
        [first, .., last] => vec![first, last],
    };
    for r in picks {
        let (m, d) = plan.configure(&r.params);
        let again = Eigensystem::of_model(&m)
            .and_then(|eig| run_point(plan.engine, &m, &d, &eig, &prims, plan.thermal.temperature(&d)))
            .map_err(|e| e.to_string());
        let same = match (&again, &r.outcome) {
            (Ok(a), Ok(b)) => {
                let (x, y) = (&a.observables, &b.observables);
                [
                    (x.spin_flux, y.spin_flux),
                    (x.spin_down_population, y.spin_down_population),
                    (x.boson_ground_population, y.boson_ground_population),
                    (x.purity, y.purity),
                    (x.trace_distance_to_thermal, y.trace_distance_to_thermal),
                ]
                .iter()
                .all(|(p, q)| p.to_bits() == q.to_bits())
            }
            (Err(a), Err(b)) => a == b,
            _ => false,
        };
        if !same {
            v.push(format!("re-evaluation at {} is not bitwise identical", at(&r.params)));
        }
    }
    v
}

/// With both baths at one temperature the secular Redfield NESS is the Gibbs
/// state of the system Hamiltonian.
fn gibbs(plan: &SweepPlan, records: &[SweepRecord]) -> Vec<String> {
    let mut v = Vec::new();
    let Ok(prims) = build_primitives(plan.model.hilbert) else { return v };
    for r in records {
        let (m, d) = plan.configure(&r.params);
        if d.t_s != d.t_b || r.ok().is_none() {
            continue;
        }
        let check = Eigensystem::of_model(&m).and_then(|eig| {
            let out = nesslab::engine::solve(plan.engine, &m, &eig, &prims, &d)?;
            let gibbs = observables::thermal_state(&eig, d.t_s)?;
            observables::trace_distance(&out.rho, &gibbs)
        });
        match check {
            Ok(dist) if dist <= GIBBS_TOLERANCE => {}
            Ok(dist) => v.push(format!(
                "equal-temperature NESS differs from Gibbs state by {dist:e} at {}",
                at(&r.params)
            )),
            Err(e) => v.push(format!("Gibbs check failed at {}: {e}", at(&r.params))),
        }
    }
    v
}

//! Parameter sweeps, dip detection and dip–crossing correlation.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::analysis::{self, AvoidedCrossing, CrossingReport, LacSettings};
use crate::engine::{self, Dissipation, EngineKind};
use crate::error::{Error, Result};
use crate::model::{build_primitives, Eigensystem, ModelAxis, ModelSpec, Primitives};
use crate::observables::{self, LocalPopulations, ObservableSet};
use crate::signal::{self, Dip, DipSettings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Model(ModelAxis),
    RS,
    RB,
    TS,
    TB,
}

impl SweepParam {
    pub const ALL: [SweepParam; 8] = [
        SweepParam::Model(ModelAxis::DeltaTilde),
        SweepParam::Model(ModelAxis::LambdaTilde),
        SweepParam::Model(ModelAxis::S),
        SweepParam::Model(ModelAxis::EpsilonTilde),
        SweepParam::RS,
        SweepParam::RB,
        SweepParam::TS,
        SweepParam::TB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Model(a) => a.name(),
            SweepParam::RS => "r_s",
            SweepParam::RB => "r_b",
            SweepParam::TS => "t_s",
            SweepParam::TB => "t_b",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    fn apply(self, model: &mut ModelSpec, diss: &mut Dissipation, v: f64) {
        match self {
            SweepParam::Model(a) => *model = a.set(model, v),
            SweepParam::RS => diss.r_s = v,
            SweepParam::RB => diss.r_b = v,
            SweepParam::TS => diss.t_s = v,
            SweepParam::TB => diss.t_b = v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub grid: Vec<f64>,
}

/// Temperature of the thermal state each NESS is compared with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThermalReference {
    Fixed(f64),
    /// The spin-bath temperature at each point.
    SpinBath,
    /// The boson-bath temperature at each point.
    BosonBath,
}

impl ThermalReference {
    pub fn temperature(self, d: &Dissipation) -> f64 {
        match self {
            ThermalReference::Fixed(t) => t,
            ThermalReference::SpinBath => d.t_s,
            ThermalReference::BosonBath => d.t_b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub model: ModelSpec,
    pub dissipation: Dissipation,
    pub engine: EngineKind,
    /// Outer axis first; at most two.
    pub axes: Vec<SweepAxis>,
    /// Temperature of the thermal reference state.
    pub thermal: ThermalReference,
    /// Observables whose dips or peaks are reported.
    pub observables: Vec<(ObservableKey, FeatureKind)>,
}

impl SweepPlan {
    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.axes.is_empty() {
            v.push("at least one swept axis is required".to_string());
        }
        if self.axes.len() > 2 {
            v.push(format!("at most 2 swept axes are allowed, got {}", self.axes.len()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.grid.is_empty() {
                v.push(format!("grid for {} is empty", a.param.name()));
            }
            if a.grid.iter().any(|x| !x.is_finite()) {
                v.push(format!("grid for {} contains non-finite values", a.param.name()));
            }
            if a.grid.windows(2).any(|w| !(w[1] > w[0])) {
                v.push(format!("grid for {} must be strictly increasing", a.param.name()));
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                v.push(format!("axis {} is swept twice", a.param.name()));
            }
        }
        if let Err(e) = self.model.validate() {
            v.push(e.to_string());
        }
        let d = &self.dissipation;
        for (name, x) in [("r_s", d.r_s), ("r_b", d.r_b), ("t_s", d.t_s), ("t_b", d.t_b)] {
            if !(x.is_finite() && x >= 0.0) {
                v.push(format!("{name} must be finite and nonnegative, got {x}"));
            }
        }
        for (name, x) in [("eta_b", d.eta_b), ("eta_ratio", d.eta_ratio), ("gamma_b", d.gamma_b)] {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("{name} must be positive, got {x}"));
            }
        }
        if let Some(g) = d.gamma_s {
            if !(g.is_finite() && g > 0.0) {
                v.push(format!("gamma_s must be positive, got {g}"));
            }
        }
        if let ThermalReference::Fixed(t) = self.thermal {
            if !(t.is_finite() && t >= 0.0) {
                v.push(format!("thermal temperature must be nonnegative, got {t}"));
            }
        }
        for (i, o) in self.observables.iter().enumerate() {
            if self.observables[..i].contains(o) {
                v.push(format!("observable {} {} is requested twice", o.0.name(), o.1.name()));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v.join("; ")))
        }
    }

    /// Parameter tuples in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for a in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    a.grid.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn configure(&self, params: &[f64]) -> (ModelSpec, Dissipation) {
        let mut m = self.model;
        let mut d = self.dissipation;
        for (a, &x) in self.axes.iter().zip(params) {
            a.param.apply(&mut m, &mut d, x);
        }
        (m, d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub observables: ObservableSet,
    /// Energy-eigenbasis populations of the NESS, ascending energy.
    pub populations: Vec<f64>,
    pub thermal: LocalPopulations,
    pub flux_scale: f64,
    pub residual: f64,
    pub gap_ratio: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub params: Vec<f64>,
    pub outcome: std::result::Result<PointResult, String>,
}

impl SweepRecord {
    pub fn ok(&self) -> Option<&PointResult> {
        self.outcome.as_ref().ok()
    }
}

fn model_key(m: &ModelSpec) -> [u64; 6] {
    [
        m.family as u64,
        m.delta_tilde.to_bits(),
        m.lambda_tilde.to_bits(),
        m.s.to_bits(),
        m.epsilon_tilde.to_bits(),
        m.hilbert.n_boson_levels as u64,
    ]
}

/// Evaluates one grid point.
pub fn run_point(
    engine: EngineKind,
    model: &ModelSpec,
    diss: &Dissipation,
    eig: &Eigensystem,
    primitives: &Primitives,
    thermal_temperature: f64,
) -> Result<PointResult> {
    let out = engine::solve(engine, model, eig, primitives, diss)?;
    engine::check_state(&out.rho)?;
    let thermal = observables::thermal_state(eig, thermal_temperature)?;
    let set = observables::observable_set(&out.rho, out.spin_flux, &thermal)?;
    Ok(PointResult {
        observables: set,
        populations: out.populations,
        thermal: observables::local_populations(&thermal),
        flux_scale: out.flux_scale,
        residual: out.residual,
        gap_ratio: out.gap_ratio,
        warnings: out.warnings,
    })
}

/// Runs every grid point on a pool of `workers` threads. Records come back in
/// grid order and do not depend on the worker count.
pub fn run_sweep(plan: &SweepPlan, workers: usize) -> Result<Vec<SweepRecord>> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("worker pool: {e}")))?;
    pool.install(|| run_sweep_in_pool(plan))
}

fn run_sweep_in_pool(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    let primitives = build_primitives(plan.model.hilbert)?;
    let points = plan.points();
    let configured: Vec<(ModelSpec, Dissipation)> =
        points.iter().map(|p| plan.configure(p)).collect();

    // Diagonalize each distinct Hamiltonian once.
    let mut distinct: Vec<ModelSpec> = Vec::new();
    let mut index: HashMap<[u64; 6], usize> = HashMap::new();
    let slot: Vec<usize> = configured
        .iter()
        .map(|(m, _)| {
            *index.entry(model_key(m)).or_insert_with(|| {
                distinct.push(*m);
                distinct.len() - 1
            })
        })
        .collect();
    let eigs: Vec<std::result::Result<Eigensystem, String>> = distinct
        .par_iter()
        .map(|m| Eigensystem::of_model(m).map_err(|e| e.to_string()))
        .collect();

    let records = points
        .into_par_iter()
        .zip(configured.into_par_iter())
        .zip(slot.into_par_iter())
        .map(|((params, (m, d)), k)| {
            let outcome = match &eigs[k] {
                Ok(eig) => run_point(plan.engine, &m, &d, eig, &primitives, plan.thermal.temperature(&d))
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            SweepRecord { params, outcome }
        })
        .collect();
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ObservableKey {
    /// `|J_s|`.
    FluxMagnitude,
    SpinDown,
    BosonGround,
    Purity,
    TraceDistance,
}

impl ObservableKey {
    pub const ALL: [ObservableKey; 5] = [
        ObservableKey::FluxMagnitude,
        ObservableKey::SpinDown,
        ObservableKey::BosonGround,
        ObservableKey::Purity,
        ObservableKey::TraceDistance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObservableKey::FluxMagnitude => "abs_spin_flux",
            ObservableKey::SpinDown => "p_down",
            ObservableKey::BosonGround => "p_boson0",
            ObservableKey::Purity => "purity",
            ObservableKey::TraceDistance => "trace_distance_thermal",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn value(self, p: &PointResult) -> f64 {
        let o = &p.observables;
        match self {
            ObservableKey::FluxMagnitude => o.spin_flux.abs(),
            ObservableKey::SpinDown => o.spin_down_population,
            ObservableKey::BosonGround => o.boson_ground_population,
            ObservableKey::Purity => o.purity,
            ObservableKey::TraceDistance => o.trace_distance_to_thermal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Dip,
    Peak,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Dip => "dip",
            FeatureKind::Peak => "peak",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [FeatureKind::Dip, FeatureKind::Peak].into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureSettings {
    pub min_prominence_fraction: f64,
    /// Flat-series threshold for the flux, relative to the largest flux scale
    /// along the line.
    pub flux_noise_relative: f64,
    /// Flat-series threshold for bounded observables.
    pub noise_absolute: f64,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self { min_prominence_fraction: 0.1, flux_noise_relative: 1e-8, noise_absolute: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feature {
    pub observable: ObservableKey,
    pub kind: FeatureKind,
    /// Values of the outer axes fixing the line the feature lies on.
    pub line: Vec<f64>,
    pub dip: Dip<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DipMatch {
    /// Index into the feature list passed to the matcher.
    pub feature: usize,
    pub lac: AvoidedCrossing,
    pub mismatch: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DipReport {
    pub features: Vec<Feature>,
    pub matches: Vec<DipMatch>,
    pub unmatched_features: Vec<usize>,
    pub unmatched_lacs: Vec<AvoidedCrossing>,
}

/// Successful points along one line of the innermost axis: `(x, record)`.
fn lines(plan: &SweepPlan, records: &[SweepRecord]) -> Vec<(Vec<f64>, Vec<(f64, PointResult)>)> {
    let inner = plan.axes.last().map_or(0, |a| a.grid.len()).max(1);
    records
        .chunks(inner)
        .map(|chunk| {
            let outer = chunk[0].params[..chunk[0].params.len().saturating_sub(1)].to_vec();
            let pts = chunk
                .iter()
                .filter_map(|r| r.ok().map(|p| (*r.params.last().unwrap_or(&0.0), p.clone())))
                .collect();
            (outer, pts)
        })
        .collect()
}

/// Dips (or peaks) of one observable along the innermost axis.
pub fn detect_features(
    plan: &SweepPlan,
    records: &[SweepRecord],
    observable: ObservableKey,
    kind: FeatureKind,
    settings: &FeatureSettings,
) -> Vec<Feature> {
    let mut out = Vec::new();
    for (line, pts) in lines(plan, records) {
        let x: Vec<f64> = pts.iter().map(|(x, _)| *x).collect();
        let y: Vec<f64> = pts.iter().map(|(_, p)| observable.value(p)).collect();
        let noise_floor = if observable == ObservableKey::FluxMagnitude {
            let scale = pts.iter().map(|(_, p)| p.flux_scale.abs()).fold(0.0, f64::max);
            settings.flux_noise_relative * scale
        } else {
            settings.noise_absolute
        };
        let s = DipSettings { min_prominence_fraction: settings.min_prominence_fraction, noise_floor };
        let found = match kind {
            FeatureKind::Dip => signal::detect_dips(&x, &y, &s),
            FeatureKind::Peak => signal::detect_peaks(&x, &y, &s),
        };
        out.extend(found.into_iter().map(|dip| Feature { observable, kind, line: line.clone(), dip }));
    }
    out
}

/// Features of every observable requested by the plan, in request order.
pub fn detect_requested(plan: &SweepPlan, records: &[SweepRecord], settings: &FeatureSettings) -> Vec<Feature> {
    plan.observables
        .iter()
        .flat_map(|&(key, kind)| detect_features(plan, records, key, kind, settings))
        .collect()
}

/// Avoided crossings along a one-dimensional sweep of a Hamiltonian
/// parameter.
pub fn sweep_crossings(plan: &SweepPlan, settings: &LacSettings) -> Result<Option<CrossingReport>> {
    let [axis] = plan.axes.as_slice() else {
        return Ok(None);
    };
    let SweepParam::Model(model_axis) = axis.param else {
        return Ok(None);
    };
    let spectra = analysis::spectra_on_grid(&plan.model, model_axis, &axis.grid)?;
    analysis::find_avoided_crossings(&plan.model, model_axis, &spectra, settings).map(Some)
}

/// Greedy nearest matching of features to sharp avoided crossings within
/// `tolerance` along the swept axis.
pub fn correlate_dips_with_lac(
    features: &[Feature],
    lacs: &[AvoidedCrossing],
    tolerance: f64,
) -> DipReport {
    let sharp: Vec<&AvoidedCrossing> = lacs.iter().filter(|c| c.order > 0).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, f) in features.iter().enumerate() {
        for (j, c) in sharp.iter().enumerate() {
            let dist = (f.dip.location - c.location).abs();
            if dist <= tolerance {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_f = vec![false; features.len()];
    let mut used_l = vec![false; sharp.len()];
    let mut matches = Vec::new();
    for (dist, i, j) in pairs {
        if !used_f[i] && !used_l[j] {
            used_f[i] = true;
            used_l[j] = true;
            matches.push(DipMatch { feature: i, lac: sharp[j].clone(), mismatch: dist });
        }
    }
    matches.sort_by_key(|m| m.feature);
    DipReport {
        features: features.to_vec(),
        unmatched_features: (0..features.len()).filter(|&i| !used_f[i]).collect(),
        unmatched_lacs: sharp
            .iter()
            .enumerate()
            .filter(|(j, _)| !used_l[*j])
            .map(|(_, c)| (*c).clone())
            .collect(),
        matches,
    }
}

/// Evenly spaced grid from `start` to `stop` inclusive with spacing `step`,
/// computed by index so no error accumulates.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// `grid` merged with windows of spacing `step` and half-width
/// `half_width` around each center. Window points closer than `step / 2`
/// to a grid point or to another window point are dropped, so the result
/// is strictly increasing whenever `grid` is.
pub fn refine_grid(grid: &[f64], centers: &[f64], half_width: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0 && half_width > 0.0) {
        return grid.to_vec();
    }
    let mut extra: Vec<f64> =
        centers.iter().flat_map(|&c| linear_grid(c - half_width, c + half_width, step)).collect();
    extra.sort_by(f64::total_cmp);
    extra.dedup_by(|b, a| *b - *a < 0.5 * step);
    let near_grid = |x: f64| {
        let i = grid.partition_point(|&g| g < x);
        let close = |j: usize| grid.get(j).is_some_and(|&g| (g - x).abs() < 0.5 * step);
        close(i) || (i > 0 && close(i - 1))
    };
    extra.retain(|&x| !near_grid(x));
    let mut out: Vec<f64> = grid.iter().copied().chain(extra).collect();
    out.sort_by(f64::total_cmp);
    out
}

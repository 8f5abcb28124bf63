//! Executes a configuration and writes its output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use nesslab::analysis::{self, CrossingReport};
use nesslab::engine::{Dissipation, EngineKind};
use nesslab::lindblad;
use nesslab::model::{build_primitives, Eigensystem, ModelSpec, Sector};
use nesslab::observables;
use nesslab::redfield;
use nesslab::state::DensityMatrix;
use nesslab::sweep::{
    correlate_dips_with_lac, detect_requested, refine_grid, run_sweep, sweep_crossings, DipReport, Feature,
    SweepAxis, SweepParam, SweepPlan, SweepRecord,
};

use crate::config::RunConfig;
use crate::output::{num, text, unit_of, Table};
use crate::verify;

pub const RECORDS_FILE: &str = "records.csv";
pub const DIPS_FILE: &str = "dips.csv";
pub const LAC_FILE: &str = "lac.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const POPULATIONS_FILE: &str = "populations.csv";
pub const DYNAMICS_FILE: &str = "dynamics.csv";
pub const DYNAMICS_LEVELS_FILE: &str = "dynamics_levels.csv";
pub const VERIFY_FILE: &str = "verify.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Core(#[from] nesslab::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug)]
pub struct Options {
    pub workers: usize,
    pub out: PathBuf,
    pub verify: bool,
    /// Configuration text as given, echoed into the manifest.
    pub config_text: String,
}

#[derive(Clone, Debug, Default)]
pub struct Summary {
    pub points: usize,
    pub failed_points: usize,
    pub features: usize,
    pub matched: usize,
    pub crossings: usize,
    pub dynamics_failures: usize,
    pub verify_violations: Vec<String>,
    pub wall_seconds: f64,
}

impl Summary {
    /// 0 when every point succeeded and verification (if any) passed, 2
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed_points > 0 || self.dynamics_failures > 0 || !self.verify_violations.is_empty() {
            2
        } else {
            0
        }
    }
}

/// One line of the innermost axis with its features and crossings.
pub struct LineAnalysis {
    pub outer: Vec<f64>,
    pub report: DipReport,
    pub crossings: Option<CrossingReport>,
}

fn write(table: &Table, dir: &Path, name: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    table.write(&path).map_err(|source| RunError::Io { path, source })
}

pub fn sector_label(s: Sector) -> String {
    match s {
        Sector::Parity(p) if p > 0 => "parity+".to_string(),
        Sector::Parity(_) => "parity-".to_string(),
        Sector::Excitation(n) => format!("excitation{n}"),
        Sector::Unlabeled => "unlabeled".to_string(),
    }
}

/// The plan actually swept: the configured grid, refined around sharp
/// crossings when requested.
pub fn effective_plan(cfg: &RunConfig) -> Result<SweepPlan, RunError> {
    let mut plan = cfg.plan();
    let a = &cfg.analysis;
    if a.refine_half_width > 0.0 {
        if let Some(rep) = sweep_crossings(&plan, &a.lac_settings)? {
            let centers: Vec<f64> = rep.avoided.iter().filter(|c| c.order > 0).map(|c| c.location).collect();
            plan.axes[0].grid = refine_grid(&plan.axes[0].grid, &centers, a.refine_half_width, a.refine_step);
        }
    }
    Ok(plan)
}

/// The one-dimensional plan along the inner axis at fixed outer values.
fn line_plan(plan: &SweepPlan, outer: &[f64]) -> SweepPlan {
    let (model, dissipation) = plan.configure(outer);
    let inner: SweepAxis = plan.axes.last().cloned().expect("plan has an axis");
    SweepPlan { model, dissipation, axes: vec![inner], ..plan.clone() }
}

pub fn analyze_lines(cfg: &RunConfig, plan: &SweepPlan, records: &[SweepRecord]) -> Result<Vec<LineAnalysis>, RunError> {
    let features = detect_requested(plan, records, &cfg.analysis.features);
    let outers: Vec<Vec<f64>> = match plan.axes.as_slice() {
        [outer, _] => outer.grid.iter().map(|&x| vec![x]).collect(),
        _ => vec![Vec::new()],
    };
    let inner_is_model = matches!(plan.axes.last().map(|a| a.param), Some(SweepParam::Model(_)));
    let mut out = Vec::with_capacity(outers.len());
    for outer in outers {
        let line_features: Vec<Feature> = features.iter().filter(|f| f.line == outer).cloned().collect();
        let crossings = if cfg.analysis.lac && inner_is_model {
            sweep_crossings(&line_plan(plan, &outer), &cfg.analysis.lac_settings)?
        } else {
            None
        };
        let lacs = crossings.as_ref().map(|c| c.avoided.as_slice()).unwrap_or(&[]);
        let report = correlate_dips_with_lac(&line_features, lacs, cfg.analysis.match_tolerance);
        out.push(LineAnalysis { outer, report, crossings });
    }
    Ok(out)
}

fn param_columns(plan: &SweepPlan) -> Vec<(String, &'static str)> {
    plan.axes.iter().map(|a| (a.param.name().to_string(), unit_of(a.param.name()))).collect()
}

pub fn records_table(plan: &SweepPlan, records: &[SweepRecord]) -> Table {
    let mut cols = param_columns(plan);
    for (n, u) in [
        ("spin_flux", "omega"),
        ("abs_spin_flux", "omega"),
        ("p_down", "1"),
        ("p_boson0", "1"),
        ("purity", "1"),
        ("trace_distance_thermal", "1"),
        ("thermal_p_down", "1"),
        ("thermal_p_boson0", "1"),
        ("residual", "1"),
        ("gap_ratio", "1"),
        ("status", "text"),
        ("warnings", "text"),
    ] {
        cols.push((n.to_string(), u));
    }
    let mut t = Table::new(&cols);
    for r in records {
        let mut cells: Vec<String> = r.params.iter().map(|&x| num(x)).collect();
        match &r.outcome {
            Ok(p) => {
                let o = &p.observables;
                for x in [
                    o.spin_flux,
                    o.spin_flux.abs(),
                    o.spin_down_population,
                    o.boson_ground_population,
                    o.purity,
                    o.trace_distance_to_thermal,
                    p.thermal.spin_down,
                    p.thermal.boson_ground,
                    p.residual,
                    p.gap_ratio,
                ] {
                    cells.push(num(x));
                }
                cells.push("ok".to_string());
                cells.push(text(&p.warnings.join(" ")));
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n(num(f64::NAN), 10));
                cells.push("failed".to_string());
                cells.push(text(e));
            }
        }
        t.row(&cells);
    }
    t
}

fn outer_columns(plan: &SweepPlan) -> Vec<(String, &'static str)> {
    let mut cols = param_columns(plan);
    cols.pop();
    cols
}

pub fn dips_table(plan: &SweepPlan, lines: &[LineAnalysis]) -> Table {
    let mut cols = outer_columns(plan);
    let axis = plan.axes.last().map_or("x", |a| a.param.name());
    let au = unit_of(axis);
    for (n, u) in [
        ("observable", "text"),
        ("kind", "text"),
        ("location", au),
        ("width", au),
        ("prominence", "observable"),
        ("value", "observable"),
        ("lac_location", au),
        ("lac_gap", "omega"),
        ("lac_order", "1"),
        ("lac_series", "1"),
        ("mismatch", au),
    ] {
        cols.push((n.to_string(), u));
    }
    let mut t = Table::new(&cols);
    for l in lines {
        for (i, f) in l.report.features.iter().enumerate() {
            let mut cells: Vec<String> = l.outer.iter().map(|&x| num(x)).collect();
            cells.push(f.observable.name().to_string());
            cells.push(f.kind.name().to_string());
            for x in [f.dip.location, f.dip.width, f.dip.prominence, f.dip.value] {
                cells.push(num(x));
            }
            match l.report.matches.iter().find(|m| m.feature == i) {
                Some(m) => {
                    cells.push(num(m.lac.location));
                    cells.push(num(m.lac.gap));
                    cells.push(m.lac.order.to_string());
                    cells.push(m.lac.series.map_or(String::new(), |s| s.to_string()));
                    cells.push(num(m.mismatch));
                }
                None => cells.extend(std::iter::repeat_n(String::new(), 5)),
            }
            t.row(&cells);
        }
    }
    t
}

pub fn lac_table(plan: &SweepPlan, lines: &[LineAnalysis]) -> Table {
    let mut cols = outer_columns(plan);
    let axis = plan.axes.last().map_or("x", |a| a.param.name());
    let au = unit_of(axis);
    for (n, u) in [
        ("kind", "text"),
        ("location", au),
        ("gap", "omega"),
        ("mean_energy", "omega"),
        ("sector", "text"),
        ("other_sector", "text"),
        ("parity", "1"),
        ("order", "1"),
        ("series", "1"),
        ("lower_level", "1"),
        ("upper_level", "1"),
        ("matched", "1"),
    ] {
        cols.push((n.to_string(), u));
    }
    let mut t = Table::new(&cols);
    for l in lines {
        let Some(rep) = &l.crossings else { continue };
        let prefix: Vec<String> = l.outer.iter().map(|&x| num(x)).collect();
        for c in &rep.avoided {
            let matched = l.report.matches.iter().any(|m| m.lac == *c);
            let mut cells = prefix.clone();
            cells.extend([
                "avoided".to_string(),
                num(c.location),
                num(c.gap),
                num(c.mean_energy),
                sector_label(c.sector),
                String::new(),
                c.parity.map_or(String::new(), |p| p.to_string()),
                c.order.to_string(),
                c.series.map_or(String::new(), |s| s.to_string()),
                c.branch_indices.0.to_string(),
                c.branch_indices.1.to_string(),
                u8::from(matched).to_string(),
            ]);
            t.row(&cells);
        }
        for c in &rep.crossings {
            let mut cells = prefix.clone();
            cells.extend([
                "crossing".to_string(),
                num(c.location),
                num(c.gap),
                num(c.mean_energy),
                sector_label(c.sectors.0),
                sector_label(c.sectors.1),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "0".to_string(),
            ]);
            t.row(&cells);
        }
    }
    t
}

/// Lowest levels of each symmetry sector with their entanglement entropy,
/// along every line whose inner axis is a Hamiltonian parameter.
pub fn spectrum_table(plan: &SweepPlan, levels: usize) -> Result<Option<Table>, RunError> {
    let Some(inner) = plan.axes.last() else { return Ok(None) };
    let SweepParam::Model(model_axis) = inner.param else { return Ok(None) };
    let outers: Vec<Vec<f64>> = match plan.axes.as_slice() {
        [outer, _] => outer.grid.iter().map(|&x| vec![x]).collect(),
        _ => vec![Vec::new()],
    };
    let mut cols = param_columns(plan);
    for (n, u) in [
        ("sector", "text"),
        ("level", "1"),
        ("energy", "omega"),
        ("parity_expectation", "1"),
        ("entanglement_entropy", "nat"),
    ] {
        cols.push((n.to_string(), u));
    }
    let mut t = Table::new(&cols);
    for outer in outers {
        let line = line_plan(plan, &outer);
        let spectra = analysis::spectra_on_grid(&line.model, model_axis, &inner.grid)?;
        for s in &spectra {
            for sector in s.sectors() {
                for (i, &k) in s.sector_levels(sector).iter().take(levels).enumerate() {
                    let entropy = analysis::entanglement_entropy(line.model.hilbert, &s.state(k));
                    let mut cells: Vec<String> = outer.iter().map(|&x| num(x)).collect();
                    cells.extend([
                        num(s.parameter),
                        sector_label(sector),
                        i.to_string(),
                        num(s.energies()[k]),
                        num(s.parity_expectations[k]),
                        num(entropy),
                    ]);
                    t.row(&cells);
                }
            }
        }
    }
    Ok(Some(t))
}

pub fn populations_table(plan: &SweepPlan, records: &[SweepRecord]) -> Table {
    let mut cols = param_columns(plan);
    cols.push(("level".to_string(), "1"));
    cols.push(("population".to_string(), "1"));
    let mut t = Table::new(&cols);
    for r in records {
        let Some(p) = r.ok() else { continue };
        for (k, &x) in p.populations.iter().enumerate() {
            let mut cells: Vec<String> = r.params.iter().map(|&v| num(v)).collect();
            cells.push(k.to_string());
            cells.push(num(x));
            t.row(&cells);
        }
    }
    t
}

/// Trajectory of one grid point.
pub fn propagate_point(
    engine: EngineKind,
    model: &ModelSpec,
    diss: &Dissipation,
    rho0: &DensityMatrix,
    times: &[f64],
) -> nesslab::Result<(Eigensystem, Vec<DensityMatrix>)> {
    let eig = Eigensystem::of_model(model)?;
    let prims = build_primitives(model.hilbert)?;
    let traj = match engine {
        EngineKind::LindbladFull => {
            let l = lindblad::build_liouvillian_energy(&eig, &diss.lindblad()?, &prims)?;
            lindblad::propagate(&l, rho0, times)?
        }
        EngineKind::LindbladSecular => {
            let rates = lindblad::build_secular_rates(&eig, &diss.lindblad()?, &prims)?;
            lindblad::secular_propagate(&eig, &rates, rho0, times)?
        }
        EngineKind::RedfieldSecular | EngineKind::RedfieldFull => {
            let t = redfield::build_redfield_tensor(
                &eig,
                &diss.baths(model)?,
                &prims,
                engine == EngineKind::RedfieldSecular,
            )?;
            redfield::redfield_propagate(&t, rho0, times)?
        }
    };
    Ok((eig, traj))
}

/// Dynamics tables and the number of points whose propagation failed.
pub fn dynamics_tables(cfg: &RunConfig, plan: &SweepPlan) -> Result<(Table, Option<Table>, usize), RunError> {
    let d = &cfg.dynamics;
    let times = d.time_points();
    let rho0 = DensityMatrix::basis(plan.model.hilbert, d.initial_spin, d.initial_boson)?;
    let points = plan.points();
    let results: Vec<_> = points
        .par_iter()
        .map(|p| {
            let (m, diss) = plan.configure(p);
            propagate_point(plan.engine, &m, &diss, &rho0, &times)
        })
        .collect();

    let mut cols = param_columns(plan);
    for (n, u) in [
        ("t", "1/omega"),
        ("p_down", "1"),
        ("p_boson0", "1"),
        ("purity", "1"),
        ("status", "text"),
    ] {
        cols.push((n.to_string(), u));
    }
    let mut main = Table::new(&cols);
    let mut lcols = param_columns(plan);
    for (n, u) in [("t", "1/omega"), ("basis", "text"), ("index", "1"), ("population", "1")] {
        lcols.push((n.to_string(), u));
    }
    let mut levels = d.level_populations.then(|| Table::new(&lcols));
    let mut failures = 0;
    for (p, res) in points.iter().zip(results) {
        let prefix: Vec<String> = p.iter().map(|&x| num(x)).collect();
        match res {
            Ok((eig, traj)) => {
                for (&t, rho) in times.iter().zip(&traj) {
                    let lp = observables::local_populations(rho);
                    let mut cells = prefix.clone();
                    cells.extend([
                        num(t),
                        num(lp.spin_down),
                        num(lp.boson_ground),
                        num(observables::purity(rho)),
                        "ok".to_string(),
                    ]);
                    main.row(&cells);
                    if let Some(lt) = levels.as_mut() {
                        let m = rho.matrix();
                        for k in 0..m.nrows() {
                            let mut c = prefix.clone();
                            c.extend([num(t), "site".to_string(), k.to_string(), num(m[(k, k)].re)]);
                            lt.row(&c);
                        }
                        for (k, &x) in observables::eigenbasis_populations(&eig, rho).iter().enumerate() {
                            let mut c = prefix.clone();
                            c.extend([num(t), "energy".to_string(), k.to_string(), num(x)]);
                            lt.row(&c);
                        }
                    }
                }
            }
            Err(e) => {
                failures += 1;
                let mut cells = prefix.clone();
                cells.extend([num(f64::NAN), num(f64::NAN), num(f64::NAN), num(f64::NAN), text(&format!("failed: {e}"))]);
                main.row(&cells);
            }
        }
    }
    Ok((main, levels, failures))
}

fn manifest(cfg: &RunConfig, opts: &Options, plan: &SweepPlan, s: &Summary, files: &[&str]) -> String {
    let mut m = String::new();
    m.push_str("# nesslab run manifest\n");
    m.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    m.push_str(&format!("wall_time_seconds = {:.3}\n", s.wall_seconds));
    m.push_str(&format!("workers = {}\n", opts.workers));
    m.push_str(&format!("engine = {}\n", plan.engine.name()));
    m.push_str(&format!("points = {}\n", s.points));
    m.push_str(&format!("failed_points = {}\n", s.failed_points));
    m.push_str(&format!("features = {}\n", s.features));
    m.push_str(&format!("matched_features = {}\n", s.matched));
    m.push_str(&format!("crossings = {}\n", s.crossings));
    if cfg.dynamics.enabled {
        m.push_str(&format!("dynamics_failures = {}\n", s.dynamics_failures));
    }
    if opts.verify {
        m.push_str(&format!("verify_violations = {}\n", s.verify_violations.len()));
    }
    m.push_str(&format!("files = {}\n", files.join(", ")));
    m.push_str("\n# configuration as given\n");
    for line in opts.config_text.lines() {
        m.push_str("> ");
        m.push_str(line);
        m.push('\n');
    }
    m.push_str("\n# effective configuration\n");
    for line in cfg.serialize().lines() {
        m.push_str("= ");
        m.push_str(line);
        m.push('\n');
    }
    m
}

/// Runs the sweep described by `cfg` and writes every output file into
/// `opts.out`.
pub fn execute(cfg: &RunConfig, opts: &Options) -> Result<Summary, RunError> {
    let start = Instant::now();
    fs::create_dir_all(&opts.out).map_err(|source| RunError::Io { path: opts.out.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| nesslab::Error::InvalidSpec(format!("worker pool: {e}")))?;
    pool.install(|| execute_in_pool(cfg, opts, start))
}

fn execute_in_pool(cfg: &RunConfig, opts: &Options, start: Instant) -> Result<Summary, RunError> {
    let plan = effective_plan(cfg)?;
    let records = run_sweep(&plan, opts.workers)?;
    let lines = analyze_lines(cfg, &plan, &records)?;
    let mut files = vec![RECORDS_FILE, DIPS_FILE, LAC_FILE];
    write(&records_table(&plan, &records), &opts.out, RECORDS_FILE)?;
    write(&dips_table(&plan, &lines), &opts.out, DIPS_FILE)?;
    write(&lac_table(&plan, &lines), &opts.out, LAC_FILE)?;
    if cfg.analysis.spectrum {
        if let Some(t) = spectrum_table(&plan, cfg.analysis.spectrum_levels)? {
            write(&t, &opts.out, SPECTRUM_FILE)?;
            files.push(SPECTRUM_FILE);
        }
    }
    if cfg.analysis.populations {
        write(&populations_table(&plan, &records), &opts.out, POPULATIONS_FILE)?;
        files.push(POPULATIONS_FILE);
    }
    let mut summary = Summary {
        points: records.len(),
        failed_points: records.iter().filter(|r| r.ok().is_none()).count(),
        features: lines.iter().map(|l| l.report.features.len()).sum(),
        matched: lines.iter().map(|l| l.report.matches.len()).sum(),
        crossings: lines.iter().filter_map(|l| l.crossings.as_ref()).map(|c| c.avoided.len()).sum(),
        ..Summary::default()
    };
    if cfg.dynamics.enabled {
        let (main, levels, failures) = dynamics_tables(cfg, &plan)?;
        write(&main, &opts.out, DYNAMICS_FILE)?;
        files.push(DYNAMICS_FILE);
        if let Some(t) = levels {
            write(&t, &opts.out, DYNAMICS_LEVELS_FILE)?;
            files.push(DYNAMICS_LEVELS_FILE);
        }
        summary.dynamics_failures = failures;
    }
    if opts.verify {
        summary.verify_violations = verify::verify(cfg, &plan, &records, &lines);
        let mut report = String::new();
        if summary.verify_violations.is_empty() {
            report.push_str("all invariants hold\n");
        }
        for v in &summary.verify_violations {
            report.push_str(v);
            report.push('\n');
        }
        let path = opts.out.join(VERIFY_FILE);
        fs::write(&path, report).map_err(|source| RunError::Io { path, source })?;
        files.push(VERIFY_FILE);
    }
    summary.wall_seconds = start.elapsed().as_secs_f64();
    files.push(MANIFEST_FILE);
    let path = opts.out.join(MANIFEST_FILE);
    fs::write(&path, manifest(cfg, opts, &plan, &summary, &files)).map_err(|source| RunError::Io { path, source })?;
    Ok(summary)
}

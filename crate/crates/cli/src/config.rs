//! Run configuration: `key = value` lines grouped under `[section]` headers.
//!
//! ```text
//! [model]
//! family = rabi
//! lambda_tilde = 0.2
//!
//! [sweep]
//! axis1 = delta_tilde
//! grid1 = 0.5:6.5:0.005
//! ```
//!
//! Grids are `start:stop:step` (inclusive) or comma-separated lists. Every
//! key not given takes the default shown by [`RunConfig::serialize`].

use std::fmt::Write as _;

use nesslab::analysis::LacSettings;
use nesslab::engine::{Dissipation, EngineKind};
use nesslab::model::{Family, HilbertSpec, ModelSpec};
use nesslab::sweep::{
    linear_grid, FeatureKind, FeatureSettings, ObservableKey, SweepAxis, SweepParam, SweepPlan,
    ThermalReference,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range { start, stop, step } => linear_grid(*start, *stop, *step),
            GridSpec::List(v) => v.clone(),
        }
    }

    fn violations(&self, name: &str) -> Vec<String> {
        let mut v = Vec::new();
        match self {
            GridSpec::Range { start, stop, step } => {
                if ![start, stop, step].iter().all(|x| x.is_finite()) {
                    v.push(format!("{name}: range bounds must be finite"));
                } else if *step <= 0.0 {
                    v.push(format!("{name}: step must be positive, got {step}"));
                } else if stop < start {
                    v.push(format!("{name}: stop {stop} lies below start {start}"));
                }
            }
            GridSpec::List(xs) => {
                if xs.is_empty() {
                    v.push(format!("{name}: list is empty"));
                }
                if xs.iter().any(|x| !x.is_finite()) {
                    v.push(format!("{name}: values must be finite"));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    v.push(format!("{name}: values must be strictly increasing"));
                }
            }
        }
        v
    }

    fn parse(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').map(str::trim).collect();
            let [a, b, c] = parts.as_slice() else {
                return Err(format!("range must be start:stop:step, got `{s}`"));
            };
            Ok(GridSpec::Range { start: parse_f64(a)?, stop: parse_f64(b)?, step: parse_f64(c)? })
        } else {
            s.split(',').map(|x| parse_f64(x.trim())).collect::<Result<_, _>>().map(GridSpec::List)
        }
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridSpec::Range { start, stop, step } => {
                write!(f, "{}:{}:{}", fmt_f64(*start), fmt_f64(*stop), fmt_f64(*step))
            }
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisConfig {
    pub param: SweepParam,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub features: FeatureSettings,
    pub match_tolerance: f64,
    /// Write the crossing report for sweeps whose inner axis is a
    /// Hamiltonian parameter.
    pub lac: bool,
    pub lac_settings: LacSettings,
    /// Half-width of the fine windows added around sharp crossings; 0 turns
    /// refinement off.
    pub refine_half_width: f64,
    pub refine_step: f64,
    pub spectrum: bool,
    /// Levels per symmetry sector in the spectrum file.
    pub spectrum_levels: usize,
    pub populations: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            features: FeatureSettings::default(),
            match_tolerance: 0.05,
            lac: true,
            lac_settings: LacSettings::default(),
            refine_half_width: 0.0,
            refine_step: 2e-6,
            spectrum: false,
            spectrum_levels: 6,
            populations: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScale {
    Linear,
    /// Grid values are decimal exponents; `0` stands for t = 0 itself.
    Log10,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsConfig {
    pub enabled: bool,
    /// 0 for ↑, 1 for ↓.
    pub initial_spin: usize,
    pub initial_boson: usize,
    pub times: GridSpec,
    pub time_scale: TimeScale,
    pub level_populations: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            initial_spin: 0,
            initial_boson: 0,
            times: GridSpec::Range { start: 0.0, stop: 8.0, step: 0.25 },
            time_scale: TimeScale::Log10,
            level_populations: false,
        }
    }
}

impl DynamicsConfig {
    /// Propagation times, starting at t = 0.
    pub fn time_points(&self) -> Vec<f64> {
        let v = self.times.values();
        match self.time_scale {
            TimeScale::Linear => v,
            TimeScale::Log10 => std::iter::once(0.0).chain(v.into_iter().map(|e| 10f64.powf(e))).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunSection {
    pub out: Option<String>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub dissipation: Dissipation,
    pub engine: EngineKind,
    pub axes: Vec<AxisConfig>,
    pub thermal: ThermalReference,
    pub observables: Vec<(ObservableKey, FeatureKind)>,
    pub analysis: AnalysisConfig,
    pub dynamics: DynamicsConfig,
    pub run: RunSection,
}

impl RunConfig {
    pub fn plan(&self) -> SweepPlan {
        SweepPlan {
            model: self.model,
            dissipation: self.dissipation,
            engine: self.engine,
            axes: self.axes.iter().map(|a| SweepAxis { param: a.param, grid: a.grid.values() }).collect(),
            thermal: self.thermal,
            observables: self.observables.clone(),
        }
    }

    /// Every violated constraint.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.axes.is_empty() {
            v.push("sweep.axis1 and sweep.grid1 are required".to_string());
        }
        for (i, a) in self.axes.iter().enumerate() {
            v.extend(a.grid.violations(&format!("sweep.grid{}", i + 1)));
        }
        // Grid and axis-count problems are reported above and by the parser.
        v.extend(
            self.plan()
                .violations()
                .into_iter()
                .filter(|m| !m.starts_with("grid for") && !m.starts_with("at least one swept axis")),
        );
        let a = &self.analysis;
        let f = &a.features;
        if !(0.0..=1.0).contains(&f.min_prominence_fraction) {
            v.push(format!("analysis.prominence_fraction must lie in [0, 1], got {}", f.min_prominence_fraction));
        }
        for (name, x) in [
            ("analysis.flux_noise_relative", f.flux_noise_relative),
            ("analysis.noise_absolute", f.noise_absolute),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                v.push(format!("{name} must be nonnegative, got {x}"));
            }
        }
        for (name, x) in [
            ("analysis.match_tolerance", a.match_tolerance),
            ("analysis.lac_max_gap", a.lac_settings.max_gap),
            ("analysis.lac_tolerance", a.lac_settings.tolerance),
            ("analysis.refine_step", a.refine_step),
        ] {
            if !(x.is_finite() && x > 0.0) {
                v.push(format!("{name} must be positive, got {x}"));
            }
        }
        if !(a.lac_settings.degenerate_gap.is_finite() && a.lac_settings.degenerate_gap >= 0.0) {
            v.push(format!("analysis.lac_degenerate_gap must be nonnegative, got {}", a.lac_settings.degenerate_gap));
        }
        if !(a.refine_half_width.is_finite() && a.refine_half_width >= 0.0) {
            v.push(format!("analysis.refine_half_width must be nonnegative, got {}", a.refine_half_width));
        }
        if a.refine_half_width > 0.0 && !self.refinable() {
            v.push("analysis.refine_half_width requires a single swept Hamiltonian parameter".to_string());
        }
        if a.lac_settings.levels_per_sector < 2 {
            v.push("analysis.lac_levels_per_sector must be at least 2".to_string());
        }
        if a.spectrum_levels == 0 {
            v.push("analysis.spectrum_levels must be at least 1".to_string());
        }
        let d = &self.dynamics;
        if d.enabled {
            v.extend(d.times.violations("dynamics.times"));
            if d.initial_boson >= self.model.hilbert.n_boson_levels {
                v.push(format!(
                    "dynamics.initial_boson {} exceeds the truncation ({} levels)",
                    d.initial_boson, self.model.hilbert.n_boson_levels
                ));
            }
            if d.time_scale == TimeScale::Linear && d.times.values().first().is_some_and(|&t| t < 0.0) {
                v.push("dynamics.times must be nonnegative".to_string());
            }
        }
        if self.run.workers == Some(0) {
            v.push("run.workers must be at least 1".to_string());
        }
        v
    }

    fn refinable(&self) -> bool {
        matches!(self.axes.as_slice(), [a] if matches!(a.param, SweepParam::Model(_)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Validation(v))
        }
    }

    /// Canonical text with every key written out.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let m = &self.model;
        let _ = writeln!(s, "[model]");
        let _ = writeln!(s, "family = {}", m.family.name());
        let _ = writeln!(s, "delta_tilde = {}", fmt_f64(m.delta_tilde));
        let _ = writeln!(s, "lambda_tilde = {}", fmt_f64(m.lambda_tilde));
        let _ = writeln!(s, "s = {}", fmt_f64(m.s));
        let _ = writeln!(s, "epsilon_tilde = {}", fmt_f64(m.epsilon_tilde));
        let _ = writeln!(s, "n_boson_levels = {}", m.hilbert.n_boson_levels);

        let d = &self.dissipation;
        let _ = writeln!(s, "\n[dissipation]");
        for (k, x) in [("r_s", d.r_s), ("r_b", d.r_b), ("eta_b", d.eta_b), ("eta_ratio", d.eta_ratio)] {
            let _ = writeln!(s, "{k} = {}", fmt_f64(x));
        }
        let _ = writeln!(s, "gamma_s = {}", d.gamma_s.map_or("auto".to_string(), fmt_f64));
        for (k, x) in [("gamma_b", d.gamma_b), ("t_s", d.t_s), ("t_b", d.t_b)] {
            let _ = writeln!(s, "{k} = {}", fmt_f64(x));
        }

        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "engine = {}", self.engine.name());
        for (i, a) in self.axes.iter().enumerate() {
            let _ = writeln!(s, "axis{} = {}", i + 1, a.param.name());
            let _ = writeln!(s, "grid{} = {}", i + 1, a.grid);
        }
        let thermal = match self.thermal {
            ThermalReference::Fixed(t) => fmt_f64(t),
            ThermalReference::SpinBath => "spin_bath".to_string(),
            ThermalReference::BosonBath => "boson_bath".to_string(),
        };
        let _ = writeln!(s, "thermal_temperature = {thermal}");
        let obs: Vec<String> = self.observables.iter().map(|(k, f)| format!("{}:{}", k.name(), f.name())).collect();
        let _ = writeln!(s, "observables = {}", obs.join(", "));

        let a = &self.analysis;
        let _ = writeln!(s, "\n[analysis]");
        let _ = writeln!(s, "prominence_fraction = {}", fmt_f64(a.features.min_prominence_fraction));
        let _ = writeln!(s, "flux_noise_relative = {}", fmt_f64(a.features.flux_noise_relative));
        let _ = writeln!(s, "noise_absolute = {}", fmt_f64(a.features.noise_absolute));
        let _ = writeln!(s, "match_tolerance = {}", fmt_f64(a.match_tolerance));
        let _ = writeln!(s, "lac = {}", a.lac);
        let _ = writeln!(s, "lac_max_gap = {}", fmt_f64(a.lac_settings.max_gap));
        let _ = writeln!(s, "lac_levels_per_sector = {}", a.lac_settings.levels_per_sector);
        let _ = writeln!(s, "lac_tolerance = {}", fmt_f64(a.lac_settings.tolerance));
        let _ = writeln!(s, "lac_degenerate_gap = {}", fmt_f64(a.lac_settings.degenerate_gap));
        let _ = writeln!(s, "refine_half_width = {}", fmt_f64(a.refine_half_width));
        let _ = writeln!(s, "refine_step = {}", fmt_f64(a.refine_step));
        let _ = writeln!(s, "spectrum = {}", a.spectrum);
        let _ = writeln!(s, "spectrum_levels = {}", a.spectrum_levels);
        let _ = writeln!(s, "populations = {}", a.populations);

        let y = &self.dynamics;
        let _ = writeln!(s, "\n[dynamics]");
        let _ = writeln!(s, "enabled = {}", y.enabled);
        let _ = writeln!(s, "initial_spin = {}", if y.initial_spin == 0 { "up" } else { "down" });
        let _ = writeln!(s, "initial_boson = {}", y.initial_boson);
        let _ = writeln!(s, "times = {}", y.times);
        let _ = writeln!(s, "time_scale = {}", match y.time_scale {
            TimeScale::Linear => "linear",
            TimeScale::Log10 => "log10",
        });
        let _ = writeln!(s, "level_populations = {}", y.level_populations);

        let _ = writeln!(s, "\n[run]");
        if let Some(o) = &self.run.out {
            let _ = writeln!(s, "out = {o}");
        }
        if let Some(w) = self.run.workers {
            let _ = writeln!(s, "workers = {w}");
        }
        let _ = writeln!(s, "format = csv");
        s
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn names<T: Copy>(all: &[T], name: impl Fn(T) -> &'static str) -> String {
    all.iter().map(|&x| name(x)).collect::<Vec<_>>().join(", ")
}

const SECTIONS: [&str; 6] = ["model", "dissipation", "sweep", "analysis", "dynamics", "run"];

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut family: Option<Family> = None;
    let mut model = ModelSpec::rabi(1.0, 0.2);
    let mut diss = Dissipation::default();
    let mut engine = EngineKind::LindbladSecular;
    let mut axis: [Option<SweepParam>; 2] = [None, None];
    let mut grid: [Option<GridSpec>; 2] = [None, None];
    let mut thermal = ThermalReference::Fixed(0.0);
    let mut observables = vec![(ObservableKey::FluxMagnitude, FeatureKind::Dip)];
    let mut analysis = AnalysisConfig::default();
    let mut dynamics = DynamicsConfig::default();
    let mut run = RunSection::default();

    let mut section: Option<&str> = None;
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| perr(line, content, "unterminated section header"))?
                .trim();
            section = Some(
                SECTIONS
                    .into_iter()
                    .find(|s| *s == name)
                    .ok_or_else(|| perr(line, name, &format!("unknown section; expected one of {}", SECTIONS.join(", "))))?,
            );
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| perr(line, content, "expected `key = value`"))?;
        let sec = section.ok_or_else(|| perr(line, key, "key appears before any [section] header"))?;
        let full = format!("{sec}.{key}");
        if seen.contains(&full) {
            return Err(perr(line, &full, "duplicate key"));
        }
        seen.push(full.clone());
        let err = |m: String| perr(line, &full, &m);
        let f = || parse_f64(value).map_err(err);
        match (sec, key) {
            ("model", "family") => {
                family = Some(Family::from_name(value).ok_or_else(|| {
                    err(format!("unknown family `{value}`; expected one of {}", names(&Family::ALL, Family::name)))
                })?)
            }
            ("model", "delta_tilde") => model.delta_tilde = f()?,
            ("model", "lambda_tilde") => model.lambda_tilde = f()?,
            ("model", "s") => model.s = f()?,
            ("model", "epsilon_tilde") => model.epsilon_tilde = f()?,
            ("model", "n_boson_levels") => {
                model.hilbert = HilbertSpec { n_boson_levels: parse_usize(value).map_err(err)? }
            }
            ("dissipation", "r_s") => diss.r_s = f()?,
            ("dissipation", "r_b") => diss.r_b = f()?,
            ("dissipation", "eta_b") => diss.eta_b = f()?,
            ("dissipation", "eta_ratio") => diss.eta_ratio = f()?,
            ("dissipation", "gamma_s") => diss.gamma_s = if value == "auto" { None } else { Some(f()?) },
            ("dissipation", "gamma_b") => diss.gamma_b = f()?,
            ("dissipation", "t_s") => diss.t_s = f()?,
            ("dissipation", "t_b") => diss.t_b = f()?,
            ("sweep", "engine") => {
                engine = EngineKind::from_name(value).ok_or_else(|| {
                    err(format!("unknown engine `{value}`; expected one of {}", names(&EngineKind::ALL, EngineKind::name)))
                })?
            }
            ("sweep", "axis1" | "axis2") => {
                let k = usize::from(key == "axis2");
                axis[k] = Some(SweepParam::from_name(value).ok_or_else(|| {
                    err(format!("unknown axis `{value}`; expected one of {}", names(&SweepParam::ALL, SweepParam::name)))
                })?)
            }
            ("sweep", "grid1" | "grid2") => {
                let k = usize::from(key == "grid2");
                grid[k] = Some(GridSpec::parse(value).map_err(err)?)
            }
            ("sweep", "thermal_temperature") => {
                thermal = match value {
                    "spin_bath" => ThermalReference::SpinBath,
                    "boson_bath" => ThermalReference::BosonBath,
                    _ => ThermalReference::Fixed(f()?),
                }
            }
            ("sweep", "observables") => observables = parse_observables(value).map_err(err)?,
            ("analysis", "prominence_fraction") => analysis.features.min_prominence_fraction = f()?,
            ("analysis", "flux_noise_relative") => analysis.features.flux_noise_relative = f()?,
            ("analysis", "noise_absolute") => analysis.features.noise_absolute = f()?,
            ("analysis", "match_tolerance") => analysis.match_tolerance = f()?,
            ("analysis", "lac") => analysis.lac = parse_bool(value).map_err(err)?,
            ("analysis", "lac_max_gap") => analysis.lac_settings.max_gap = f()?,
            ("analysis", "lac_levels_per_sector") => {
                analysis.lac_settings.levels_per_sector = parse_usize(value).map_err(err)?
            }
            ("analysis", "lac_tolerance") => analysis.lac_settings.tolerance = f()?,
            ("analysis", "lac_degenerate_gap") => analysis.lac_settings.degenerate_gap = f()?,
            ("analysis", "refine_half_width") => analysis.refine_half_width = f()?,
            ("analysis", "refine_step") => analysis.refine_step = f()?,
            ("analysis", "spectrum") => analysis.spectrum = parse_bool(value).map_err(err)?,
            ("analysis", "spectrum_levels") => analysis.spectrum_levels = parse_usize(value).map_err(err)?,
            ("analysis", "populations") => analysis.populations = parse_bool(value).map_err(err)?,
            ("dynamics", "enabled") => dynamics.enabled = parse_bool(value).map_err(err)?,
            ("dynamics", "initial_spin") => {
                dynamics.initial_spin = match value {
                    "up" => 0,
                    "down" => 1,
                    _ => return Err(err(format!("`{value}` is not `up` or `down`"))),
                }
            }
            ("dynamics", "initial_boson") => dynamics.initial_boson = parse_usize(value).map_err(err)?,
            ("dynamics", "times") => dynamics.times = GridSpec::parse(value).map_err(err)?,
            ("dynamics", "time_scale") => {
                dynamics.time_scale = match value {
                    "linear" => TimeScale::Linear,
                    "log10" => TimeScale::Log10,
                    _ => return Err(err(format!("`{value}` is not `linear` or `log10`"))),
                }
            }
            ("dynamics", "level_populations") => dynamics.level_populations = parse_bool(value).map_err(err)?,
            ("run", "out") => run.out = Some(value.to_string()),
            ("run", "workers") => run.workers = Some(parse_usize(value).map_err(err)?),
            ("run", "format") => {
                if value != "csv" {
                    return Err(err(format!("unsupported format `{value}`; only `csv` is available")));
                }
            }
            _ => return Err(perr(line, &full, "unknown key")),
        }
    }

    let mut missing = Vec::new();
    match family {
        Some(f) => model.family = f,
        None => missing.push("model.family is required".to_string()),
    }
    let mut axes = Vec::new();
    for k in 0..2 {
        match (axis[k], grid[k].take()) {
            (Some(param), Some(grid)) => axes.push(AxisConfig { param, grid }),
            (Some(_), None) => missing.push(format!("sweep.axis{} is set without sweep.grid{}", k + 1, k + 1)),
            (None, Some(_)) => missing.push(format!("sweep.grid{} is set without sweep.axis{}", k + 1, k + 1)),
            (None, None) => {}
        }
    }
    if axis[0].is_none() && axis[1].is_some() {
        missing.push("sweep.axis2 requires sweep.axis1".to_string());
    }
    let cfg = RunConfig {
        model,
        dissipation: diss,
        engine,
        axes,
        thermal,
        observables,
        analysis,
        dynamics,
        run,
    };
    missing.extend(cfg.violations());
    if missing.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Validation(missing))
    }
}

fn parse_observables(s: &str) -> Result<Vec<(ObservableKey, FeatureKind)>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let (k, f) = item.split_once(':').unwrap_or((item, "dip"));
            let key = ObservableKey::from_name(k.trim()).ok_or_else(|| {
                format!("unknown observable `{k}`; expected one of {}", names(&ObservableKey::ALL, ObservableKey::name))
            })?;
            let kind = FeatureKind::from_name(f.trim()).ok_or_else(|| format!("`{f}` is not `dip` or `peak`"))?;
            Ok((key, kind))
        })
        .collect()
}

fn perr(line: usize, key: &str, message: &str) -> ConfigError {
    ConfigError::Parse { line, key: key.to_string(), message: message.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 5e-12, 0.2, 1.0 / 3.0, 6.5, 1e7, 123456.789, -0.005, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn grid_forms() {
        assert_eq!(GridSpec::parse("0:1:0.5").unwrap().values(), vec![0.0, 0.5, 1.0]);
        assert_eq!(GridSpec::parse("0.6").unwrap().values(), vec![0.6]);
        assert_eq!(GridSpec::parse("1, 2,3").unwrap().values(), vec![1.0, 2.0, 3.0]);
        assert!(GridSpec::parse("1:2").is_err());
    }
}

//! TOML run configuration.
//!
//! Frequencies and rates are read in the unit named by `frequency_unit`
//! (hertz by default) and stored in rad/s. Lengths are in metres,
//! temperatures in kelvin, masses in kilograms.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::{default_clamping_calibration, BeamGeometry, Material, MaterialDb};
use crate::model::{CavityDrive, Fidelity, MechanicalMode, ModeName, SystemSpec, ThermalBathSpec};
use crate::spectral::GridConfig;
use crate::sweep::{default_cooperativity_grid, log_space, DetuningMode};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}unknown key `{key}`{}", line_prefix(*.line), suggestion_suffix(.suggestion))]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
        line: Option<usize>,
    },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("missing required {field}")]
    Missing { field: String },
    #[error("cannot read {path}: {message}")]
    File { path: String, message: String },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

fn suggestion_suffix(s: &Option<String>) -> String {
    s.as_ref()
        .map(|s| format!("; did you mean `{s}`?"))
        .unwrap_or_default()
}

impl ConfigError {
    fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    fn missing(field: &str) -> Self {
        ConfigError::Missing {
            field: field.into(),
        }
    }

    /// Field named by a validation or missing-field error.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } | ConfigError::Missing { field } => Some(field),
            ConfigError::UnknownKey { key, .. } => Some(key),
            _ => None,
        }
    }
}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Invalid { field, message } => ConfigError::Validation { field, message },
            crate::Error::Config(c) => c,
            other => ConfigError::validation("config", other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Spectrum,
    Sweep,
    Optimize,
    Design,
    Sense,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Spectrum => "spectrum",
            Task::Sweep => "sweep",
            Task::Optimize => "optimize",
            Task::Design => "design",
            Task::Sense => "sense",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    #[default]
    Hz,
    RadS,
}

impl FrequencyUnit {
    /// Factor taking a value in this unit to rad/s.
    pub fn to_rad_s(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 2.0 * PI,
            FrequencyUnit::RadS => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTask {
    pub mode: ModeName,
    /// Fit window in rad/s; defaults to ±10 closed-form linewidths around the mode.
    pub fit_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTask {
    pub c_om: Vec<f64>,
    /// When set, sweep |ω_a − ω_b| (rad/s) instead of 𝒞_OM.
    pub detuning: Option<Vec<f64>>,
    pub detuning_mode: DetuningMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeTask {
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignTask {
    pub geometry: BeamGeometry,
    pub material: Material,
    pub temperature: f64,
    pub clamping_calibration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseTask {
    /// Half-width of the tabulated band, in closed-form linewidths of mode a.
    pub window_linewidths: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub fidelity: Fidelity,
    pub frequency_unit: FrequencyUnit,
    /// Present for every task except `design`, which builds its own.
    pub system: Option<SystemSpec>,
    /// Occupation overrides; otherwise derived from bath temperatures.
    pub baths: Option<ThermalBathSpec>,
    pub grid: GridConfig,
    pub spectrum: SpectrumTask,
    pub sweep: SweepTask,
    pub optimize: OptimizeTask,
    pub design: Option<DesignTask>,
    pub sense: SenseTask,
    pub output: OutputOptions,
    /// The parsed document, echoed into summaries.
    pub source: toml::Table,
}

impl RunConfig {
    pub fn set_fidelity(&mut self, fidelity: Fidelity) {
        self.fidelity = fidelity;
        self.source
            .insert("fidelity".into(), toml::Value::String(fidelity.to_string()));
    }

    pub fn set_output_format(&mut self, format: OutputFormat) {
        self.output.format = format;
        let name = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        self.output_table()
            .insert("format".into(), toml::Value::String(name.into()));
    }

    pub fn set_output_path(&mut self, path: &Path) {
        self.output.path = Some(path.to_path_buf());
        self.output_table().insert(
            "path".into(),
            toml::Value::String(path.display().to_string()),
        );
    }

    fn output_table(&mut self) -> &mut toml::Table {
        let entry = self
            .source
            .entry("output")
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => t,
            _ => unreachable!("validated at parse time"),
        }
    }

    pub fn system(&self) -> crate::Result<&SystemSpec> {
        self.system
            .as_ref()
            .ok_or_else(|| ConfigError::missing("mode_a/mode_b/cavity/coupling sections").into())
    }

    /// Bath occupations for the configured system.
    pub fn baths_for(&self, spec: &SystemSpec) -> crate::Result<ThermalBathSpec> {
        match self.baths {
            Some(b) => Ok(b),
            None => spec.thermal_baths(),
        }
    }
}

// ---- raw document -------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<Task>,
    fidelity: Option<Fidelity>,
    frequency_unit: Option<FrequencyUnit>,
    mode_a: Option<RawMode>,
    mode_b: Option<RawMode>,
    cavity: Option<RawCavity>,
    coupling: Option<RawCoupling>,
    baths: Option<RawBaths>,
    grid: Option<GridConfig>,
    spectrum: Option<RawSpectrum>,
    sweep: Option<RawSweep>,
    optimize: Option<RawOptimize>,
    design: Option<RawDesign>,
    sense: Option<RawSense>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    omega: Option<f64>,
    gamma: Option<f64>,
    #[serde(default)]
    bath_temperature: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    kappa: Option<f64>,
    detuning: Option<f64>,
    #[serde(default)]
    g0: f64,
    c_om: Option<f64>,
    optical_damping: Option<f64>,
    alpha: Option<f64>,
    alpha_im: Option<f64>,
    pump_re: Option<f64>,
    pump_im: Option<f64>,
    #[serde(default)]
    bath_temperature: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    lambda: Option<f64>,
    mass_a: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBaths {
    nbar_a: Option<f64>,
    nbar_b: Option<f64>,
    nbar_c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    mode: Option<ModeName>,
    fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    c_om: Option<Vec<f64>>,
    c_om_min: Option<f64>,
    c_om_max: Option<f64>,
    points_per_decade: Option<usize>,
    detuning: Option<Vec<f64>>,
    detuning_mode: Option<String>,
    fixed_c_om: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimize {
    bracket: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    #[serde(default = "default_material")]
    material: String,
    materials_file: Option<String>,
    l_left: Option<f64>,
    l_right: Option<f64>,
    h: Option<f64>,
    w: Option<f64>,
    thickness: Option<f64>,
    temperature: Option<f64>,
    clamping_calibration: Option<f64>,
}

fn default_material() -> String {
    "SiN".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSense {
    window_linewidths: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<OutputFormat>,
    path: Option<String>,
}

/// Every accepted key, by section ("" is the top level).
const SCHEMA: &[(&str, &[&str])] = &[
    (
        "",
        &[
            "task",
            "fidelity",
            "frequency_unit",
            "mode_a",
            "mode_b",
            "cavity",
            "coupling",
            "baths",
            "grid",
            "spectrum",
            "sweep",
            "optimize",
            "design",
            "sense",
            "output",
        ],
    ),
    ("mode_a", &["omega", "gamma", "bath_temperature"]),
    ("mode_b", &["omega", "gamma", "bath_temperature"]),
    (
        "cavity",
        &[
            "kappa",
            "detuning",
            "g0",
            "c_om",
            "optical_damping",
            "alpha",
            "alpha_im",
            "pump_re",
            "pump_im",
            "bath_temperature",
        ],
    ),
    ("coupling", &["lambda", "mass_a"]),
    ("baths", &["nbar_a", "nbar_b", "nbar_c"]),
    (
        "grid",
        &[
            "span_linewidths",
            "points_per_linewidth",
            "core_linewidths",
            "growth",
        ],
    ),
    ("spectrum", &["mode", "fit_window"]),
    (
        "sweep",
        &[
            "c_om",
            "c_om_min",
            "c_om_max",
            "points_per_decade",
            "detuning",
            "detuning_mode",
            "fixed_c_om",
        ],
    ),
    ("optimize", &["bracket"]),
    (
        "design",
        &[
            "material",
            "materials_file",
            "l_left",
            "l_right",
            "h",
            "w",
            "thickness",
            "temperature",
            "clamping_calibration",
        ],
    ),
    ("sense", &["window_linewidths", "points"]),
    ("output", &["format", "path"]),
];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k)
}

/// Closest accepted key, preferring the same section.
fn suggest(section: &str, key: &str) -> Option<String> {
    let score = |candidate: &str| strsim::jaro_winkler(key, candidate);
    let local = section_keys(section).unwrap_or(&[]);
    if let Some(best) = local
        .iter()
        .copied()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .filter(|c| score(c) >= 0.8)
    {
        return Some(best.to_string());
    }
    SCHEMA
        .iter()
        .flat_map(|(s, keys)| keys.iter().map(move |k| (*s, *k)))
        .filter(|(s, k)| !s.is_empty() && score(k) >= 0.9)
        .max_by(|a, b| score(a.1).total_cmp(&score(b.1)))
        .map(|(s, k)| format!("{s}.{k}"))
}

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            let t = t.strip_prefix('"').unwrap_or(t);
            t.strip_prefix(key)
                .map(|rest| rest.trim_start_matches('"').trim_start().starts_with('='))
                .unwrap_or(false)
                || t.trim_start_matches('[').trim_end_matches(']').trim() == key
        })
        .map(|i| i + 1)
}

fn check_keys(table: &toml::Table, text: &str) -> Result<()> {
    for (key, value) in table {
        let top = section_keys("").unwrap_or(&[]);
        if !top.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key: key.clone(),
                suggestion: suggest("", key),
                line: line_of_key(text, key),
            });
        }
        if let (Some(keys), toml::Value::Table(inner)) = (section_keys(key), value) {
            for k in inner.keys() {
                if !keys.contains(&k.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        key: format!("{key}.{k}"),
                        suggestion: suggest(key, k),
                        line: line_of_key(text, k),
                    });
                }
            }
        }
    }
    Ok(())
}

fn parse_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    ConfigError::Parse {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

// ---- parsing ------------------------------------------------------------

/// Parse and validate a configuration whose `task` key names the task.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_with(text, None, Path::new("."))
}

/// Parse for a task chosen elsewhere (a subcommand); a `task` key in the
/// document must agree with it.
pub fn parse_config_for(text: &str, task: Task) -> Result<RunConfig> {
    parse_with(text, Some(task), Path::new("."))
}

/// Read a file; relative `materials_file` paths resolve against its directory.
pub fn parse_config_file(path: &Path, task: Option<Task>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_with(&text, task, base)
}

/// Rebuild a configuration from the `config` echo of a JSON summary.
pub fn config_from_echo(echo: &serde_json::Value, base: &Path) -> Result<RunConfig> {
    let table: toml::Table = serde_json::from_value(echo.clone())
        .map_err(|e| ConfigError::validation("config", e.to_string()))?;
    let text =
        toml::to_string(&table).map_err(|e| ConfigError::validation("config", e.to_string()))?;
    parse_with(&text, None, base)
}

fn parse_with(text: &str, task: Option<Task>, base: &Path) -> Result<RunConfig> {
    let mut source: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    check_keys(&source, text)?;
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;

    let task = match (task, raw.task) {
        (Some(t), Some(doc)) if t != doc => {
            return Err(ConfigError::validation(
                "task",
                format!("document says {doc} but {t} was requested"),
            ))
        }
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(ConfigError::missing("task")),
    };
    source.insert("task".into(), toml::Value::String(task.to_string()));
    let unit = raw.frequency_unit.unwrap_or_default();
    let k = unit.to_rad_s();

    let grid = raw.grid.unwrap_or_default();
    grid.validate().map_err(|e| match e {
        crate::Error::Invalid { message, .. } => ConfigError::validation("grid", message),
        other => other.into(),
    })?;

    let system = if task == Task::Design {
        None
    } else {
        Some(build_system(&raw, k, task)?)
    };
    let baths = raw.baths.as_ref().map(build_baths).transpose()?;

    let spectrum = {
        let s = raw.spectrum.unwrap_or_default();
        let fit_window = s.fit_window.map(|[lo, hi]| (lo * k, hi * k));
        if let Some((lo, hi)) = fit_window {
            if !(hi > lo) {
                return Err(ConfigError::validation(
                    "spectrum.fit_window",
                    "need lower < upper",
                ));
            }
        }
        SpectrumTask {
            mode: s.mode.unwrap_or(ModeName::A),
            fit_window,
        }
    };

    let sweep = build_sweep(raw.sweep.unwrap_or_default(), k)?;

    let optimize = {
        let [lo, hi] = raw.optimize.and_then(|o| o.bracket).unwrap_or([1e-2, 1e3]);
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(ConfigError::validation(
                "optimize.bracket",
                "need 0 < lower < upper",
            ));
        }
        OptimizeTask { bracket: (lo, hi) }
    };

    let design = match (task, raw.design) {
        (_, Some(d)) => Some(build_design(d, base)?),
        (Task::Design, None) => return Err(ConfigError::missing("design section")),
        _ => None,
    };

    let sense = {
        let s = raw.sense.unwrap_or_default();
        let window = s.window_linewidths.unwrap_or(20.0);
        let points = s.points.unwrap_or(401);
        if !(window > 0.0) || !window.is_finite() {
            return Err(ConfigError::validation(
                "sense.window_linewidths",
                "must be > 0",
            ));
        }
        if points < 2 {
            return Err(ConfigError::validation(
                "sense.points",
                "need at least 2 points",
            ));
        }
        SenseTask {
            window_linewidths: window,
            points,
        }
    };

    let output = {
        let o = raw.output.unwrap_or_default();
        OutputOptions {
            format: o.format.unwrap_or_default(),
            path: o.path.map(PathBuf::from),
        }
    };

    Ok(RunConfig {
        task,
        fidelity: raw.fidelity.unwrap_or(Fidelity::Rwa),
        frequency_unit: unit,
        system,
        baths,
        grid,
        spectrum,
        sweep,
        optimize,
        design,
        sense,
        output,
        source,
    })
}

fn require(v: Option<f64>, field: &str) -> Result<f64> {
    v.ok_or_else(|| ConfigError::missing(field))
}

fn build_mode(raw: Option<&RawMode>, name: &str, k: f64) -> Result<MechanicalMode> {
    let raw = raw.ok_or_else(|| ConfigError::missing(&format!("[{name}] section")))?;
    let mode = MechanicalMode {
        omega: require(raw.omega, &format!("{name}.omega"))? * k,
        gamma: require(raw.gamma, &format!("{name}.gamma"))? * k,
        bath_temperature: raw.bath_temperature,
    };
    mode.validate(name)?;
    Ok(mode)
}

fn build_system(raw: &RawConfig, k: f64, task: Task) -> Result<SystemSpec> {
    let mode_a = build_mode(raw.mode_a.as_ref(), "mode_a", k)?;
    let mode_b = build_mode(raw.mode_b.as_ref(), "mode_b", k)?;
    let coupling = raw
        .coupling
        .as_ref()
        .ok_or_else(|| ConfigError::missing("[coupling] section"))?;
    let lambda = require(coupling.lambda, "coupling.lambda")? * k;
    let mass_a = coupling.mass_a.unwrap_or(1.0);
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(ConfigError::validation(
            "coupling.lambda",
            "lambda must be ≥ 0",
        ));
    }
    if !(mass_a > 0.0) || !mass_a.is_finite() {
        return Err(ConfigError::validation(
            "coupling.mass_a",
            "mass must be > 0",
        ));
    }

    let c = raw
        .cavity
        .as_ref()
        .ok_or_else(|| ConfigError::missing("[cavity] section"))?;
    let kappa = require(c.kappa, "cavity.kappa")? * k;
    let detuning = c.detuning.map(|d| d * k).unwrap_or(-mode_b.omega);
    let g0 = c.g0 * k;

    let given: Vec<&str> = [
        ("c_om", c.c_om.is_some()),
        ("optical_damping", c.optical_damping.is_some()),
        ("alpha", c.alpha.is_some() || c.alpha_im.is_some()),
        ("pump", c.pump_re.is_some() || c.pump_im.is_some()),
    ]
    .into_iter()
    .filter(|(_, set)| *set)
    .map(|(n, _)| n)
    .collect();
    if given.len() > 1 {
        return Err(ConfigError::validation(
            "cavity",
            format!(
                "drive is over-specified by {}; give one",
                given.join(" and ")
            ),
        ));
    }
    let base = CavityDrive::from_alpha(kappa, detuning, g0, Complex64::default())?
        .with_bath_temperature(c.bath_temperature);
    base.validate()?;
    let drive_needs_g0 = |v: f64| v > 0.0 && !(g0 > 0.0);
    let cavity = if let Some(c_om) = c.c_om {
        if !(c_om >= 0.0) {
            return Err(ConfigError::validation("cavity.c_om", "must be ≥ 0"));
        }
        if drive_needs_g0(c_om) {
            return Err(ConfigError::validation(
                "cavity.g0",
                "g0 must be > 0 to drive the cavity",
            ));
        }
        base.with_optical_damping(c_om * mode_b.gamma)?
    } else if let Some(gamma_opt) = c.optical_damping {
        if !(gamma_opt >= 0.0) {
            return Err(ConfigError::validation(
                "cavity.optical_damping",
                "must be ≥ 0",
            ));
        }
        if drive_needs_g0(gamma_opt) {
            return Err(ConfigError::validation(
                "cavity.g0",
                "g0 must be > 0 to drive the cavity",
            ));
        }
        base.with_optical_damping(gamma_opt * k)?
    } else if c.alpha.is_some() || c.alpha_im.is_some() {
        let alpha = Complex64::new(c.alpha.unwrap_or(0.0), c.alpha_im.unwrap_or(0.0));
        CavityDrive::from_alpha(kappa, detuning, g0, alpha)?
            .with_bath_temperature(c.bath_temperature)
    } else if c.pump_re.is_some() || c.pump_im.is_some() {
        let pump = Complex64::new(c.pump_re.unwrap_or(0.0), c.pump_im.unwrap_or(0.0)) * k;
        CavityDrive::from_pump(kappa, detuning, g0, pump)?.with_bath_temperature(c.bath_temperature)
    } else {
        base
    };
    if matches!(task, Task::Sweep | Task::Optimize) && !(g0 > 0.0) {
        return Err(ConfigError::validation(
            "cavity.g0",
            "g0 must be > 0 to vary the optomechanical cooperativity",
        ));
    }
    if matches!(task, Task::Sweep | Task::Optimize) && !(mode_b.gamma > 0.0) {
        return Err(ConfigError::validation(
            "mode_b.gamma",
            "gamma must be > 0 to define the optomechanical cooperativity",
        ));
    }

    let spec = SystemSpec {
        mode_a,
        mode_b,
        cavity,
        lambda,
        mass_a,
    };
    spec.validate()?;
    Ok(spec)
}

fn build_baths(raw: &RawBaths) -> Result<ThermalBathSpec> {
    let mut out = [0.0; 3];
    for (slot, (name, v)) in out.iter_mut().zip([
        ("baths.nbar_a", raw.nbar_a),
        ("baths.nbar_b", raw.nbar_b),
        ("baths.nbar_c", raw.nbar_c),
    ]) {
        let v = match (name, v) {
            ("baths.nbar_c", None) => 0.0,
            (_, None) => return Err(ConfigError::missing(name)),
            (_, Some(v)) => v,
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(ConfigError::validation(name, "occupation must be ≥ 0"));
        }
        *slot = v;
    }
    Ok(ThermalBathSpec {
        nbar_a: out[0],
        nbar_b: out[1],
        nbar_c: out[2],
    })
}

fn build_sweep(s: RawSweep, k: f64) -> Result<SweepTask> {
    let c_om = match (&s.c_om, s.c_om_min, s.c_om_max, s.points_per_decade) {
        (Some(_), Some(_), _, _) | (Some(_), _, Some(_), _) | (Some(_), _, _, Some(_)) => {
            return Err(ConfigError::validation(
                "sweep.c_om",
                "give either an explicit list or c_om_min/c_om_max/points_per_decade",
            ))
        }
        (Some(list), ..) => list.clone(),
        (None, None, None, None) => default_cooperativity_grid(),
        (None, lo, hi, ppd) => {
            let lo = lo.unwrap_or(1e-2);
            let hi = hi.unwrap_or(1e3);
            let ppd = ppd.unwrap_or(60);
            if !(lo > 0.0 && hi > lo && hi.is_finite()) || ppd == 0 {
                return Err(ConfigError::validation(
                    "sweep.c_om_min",
                    "need 0 < c_om_min < c_om_max and points_per_decade ≥ 1",
                ));
            }
            let n = ((hi / lo).log10() * ppd as f64).round() as usize + 1;
            log_space(lo, hi, n.max(2))
        }
    };
    if c_om.is_empty() {
        return Err(ConfigError::validation("sweep.c_om", "empty list"));
    }
    if c_om.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
        return Err(ConfigError::validation("sweep.c_om", "values must be ≥ 0"));
    }
    if c_om.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::validation(
            "sweep.c_om",
            "values must be increasing",
        ));
    }

    let detuning = s
        .detuning
        .map(|d| d.iter().map(|v| v * k).collect::<Vec<_>>());
    if let Some(d) = &detuning {
        if d.is_empty() || d.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(ConfigError::validation(
                "sweep.detuning",
                "need a non-empty list of values ≥ 0",
            ));
        }
    }
    let detuning_mode = match s.detuning_mode.as_deref().unwrap_or("fixed") {
        "fixed" => {
            let c = s.fixed_c_om.unwrap_or(1.0);
            if !(c >= 0.0) || !c.is_finite() {
                return Err(ConfigError::validation("sweep.fixed_c_om", "must be ≥ 0"));
            }
            DetuningMode::Fixed(c)
        }
        "reoptimize" => DetuningMode::Reoptimize {
            lo: c_om[0].max(1e-6),
            hi: c_om[c_om.len() - 1],
        },
        other => {
            return Err(ConfigError::validation(
                "sweep.detuning_mode",
                format!("expected \"fixed\" or \"reoptimize\", got {other:?}"),
            ))
        }
    };
    Ok(SweepTask {
        c_om,
        detuning,
        detuning_mode,
    })
}

fn build_design(d: RawDesign, base: &Path) -> Result<DesignTask> {
    let db = match &d.materials_file {
        Some(file) => {
            let path = base.join(file);
            let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::File {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            MaterialDb::parse(&text)?
        }
        None => MaterialDb::builtin(),
    };
    let material = db.lookup(&d.material)?.clone();
    let h = require(d.h, "design.h")?;
    let geometry = BeamGeometry {
        l_left: require(d.l_left, "design.l_left")?,
        l_right: require(d.l_right, "design.l_right")?,
        h,
        w: require(d.w, "design.w")?,
        thickness: d.thickness.unwrap_or(h),
    };
    geometry.validate()?;
    let temperature = d.temperature.unwrap_or(300.0);
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(ConfigError::validation(
            "design.temperature",
            "temperature must be ≥ 0",
        ));
    }
    let clamping_calibration = d
        .clamping_calibration
        .unwrap_or_else(default_clamping_calibration);
    if !(clamping_calibration > 0.0) {
        return Err(ConfigError::validation(
            "design.clamping_calibration",
            "must be > 0",
        ));
    }
    Ok(DesignTask {
        geometry,
        material,
        temperature,
        clamping_calibration,
    })
}

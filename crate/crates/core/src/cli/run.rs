//! Task dispatch and deterministic output.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::analytics::{
    cooling_limit_ratio, cooling_summary, force_noise_factor, force_noise_psd, narrowed_linewidth,
    optimal_cooperativity, RegimeFlags,
};
use crate::design::{cantilever_frequency, design_to_system, normal_mode_map};
use crate::error::{Error, Result};
use crate::model::{build_system_with_baths, CavityDrive, ModeName, SystemSpec};
use crate::spectral::{
    force_noise_at, force_noise_factor_numeric, position_spectrum, position_spectrum_values,
    FrequencyGrid,
};
use crate::sweep::{find_optimum, sweep_cooperativity, sweep_detuning, SweepResult, SweepSettings};

use super::config::{OutputFormat, RunConfig, Task};

pub const TOOL_NAME: &str = "optobath";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest round-trip scientific notation; `NaN`/`inf` spelled out.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

/// JSON number, or null when not finite.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Column-headed result table. Numeric headers end in a unit suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)
            .map_err(|e| Error::Output(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| Error::Output(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Output(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Output(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub task: Task,
    pub table: Table,
    pub summary: Value,
}

impl RunOutput {
    pub fn summary_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary)
            .map_err(|e| Error::Output(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Table in the requested format.
    pub fn table_text(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.table.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.table.to_json())
                    .map_err(|e| Error::Output(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    /// Write `<task>.csv|json` and `summary.json` into `dir`; returns the paths.
    pub fn write_to(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        let table_path = dir.join(format!("{}.{ext}", self.task));
        let summary_path = dir.join("summary.json");
        std::fs::write(&table_path, self.table_text(format)?)?;
        std::fs::write(&summary_path, self.summary_text()?)?;
        Ok(vec![table_path, summary_path])
    }
}

/// Execute the configured task.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let (table, results) = match config.task {
        Task::Spectrum => run_spectrum(config)?,
        Task::Sweep => run_sweep(config)?,
        Task::Optimize => run_optimize(config)?,
        Task::Design => run_design(config)?,
        Task::Sense => run_sense(config)?,
    };
    let summary = json!({
        "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
        "task": config.task.to_string(),
        "fidelity": config.fidelity.to_string(),
        "config": serde_json::to_value(&config.source).map_err(|e| Error::Output(e.to_string()))?,
        "results": results,
    });
    Ok(RunOutput {
        task: config.task,
        table,
        summary,
    })
}

fn flags_json(flags: &RegimeFlags) -> Value {
    json!({
        "near_degenerate": flags.near_degenerate,
        "sideband_resolved": flags.sideband_resolved,
        "damping_hierarchy": flags.damping_hierarchy,
        "rotating_wave": flags.rotating_wave,
        "all": flags.all(),
    })
}

fn flags_text(flags: &RegimeFlags) -> String {
    let mut failed = Vec::new();
    if !flags.near_degenerate {
        failed.push("near_degenerate");
    }
    if !flags.sideband_resolved {
        failed.push("sideband_resolved");
    }
    if !flags.damping_hierarchy {
        failed.push("damping_hierarchy");
    }
    if !flags.rotating_wave {
        failed.push("rotating_wave");
    }
    if failed.is_empty() {
        "ok".into()
    } else {
        failed.join("|")
    }
}

fn settings(config: &RunConfig, spec: &SystemSpec) -> Result<SweepSettings> {
    Ok(SweepSettings::new(spec, config.fidelity)?
        .with_baths(config.baths_for(spec)?)
        .with_grid(config.grid))
}

fn system_json(spec: &SystemSpec) -> Value {
    json!({
        "omega_a_rad_s": num(spec.mode_a.omega),
        "omega_b_rad_s": num(spec.mode_b.omega),
        "gamma_a_rad_s": num(spec.mode_a.gamma),
        "gamma_b_rad_s": num(spec.mode_b.gamma),
        "lambda_rad_s": num(spec.lambda),
        "kappa_rad_s": num(spec.cavity.kappa),
        "detuning_rad_s": num(spec.cavity.detuning),
        "optical_damping_rad_s": num(spec.optical_damping()),
        "C_ab": num(spec.c_ab()),
        "C_OM": num(if spec.mode_b.gamma > 0.0 { spec.c_om() } else { f64::NAN }),
    })
}

/// Centre and half-width of the default fit window for `mode`.
fn default_window(spec: &SystemSpec, mode: ModeName) -> Result<(f64, f64)> {
    let (center, width) = match mode {
        ModeName::A => {
            let cs = cooling_summary(spec)?;
            (cs.omega_a_pulled, cs.linewidth_a)
        }
        ModeName::B => (
            spec.mode_b.omega,
            spec.mode_b.gamma + spec.optical_damping(),
        ),
        ModeName::C => (spec.cavity.detuning.abs(), spec.cavity.kappa),
    };
    Ok((center - 10.0 * width, center + 10.0 * width))
}

fn run_spectrum(config: &RunConfig) -> Result<(Table, Value)> {
    let spec = config.system()?;
    let baths = config.baths_for(spec)?;
    let mode = config.spectrum.mode;
    let model = build_system_with_baths(spec, config.fidelity, &baths);
    let grid = FrequencyGrid::for_model(&model, &config.grid)?;
    let mut s = position_spectrum(&model, mode, &grid)?;

    // Normalize by the peak of the same line with the cavity switched off.
    let mut bare = *spec;
    bare.cavity = spec.cavity.with_optical_damping(0.0)?;
    let bare_model = build_system_with_baths(&bare, config.fidelity, &baths);
    let reference = match bare_model.ensure_stable() {
        Ok(_) => position_spectrum_values(&bare_model, mode, grid.points())?
            .into_iter()
            .fold(0.0, f64::max),
        Err(_) => f64::NAN,
    };
    let reference = if reference > 0.0 { reference } else { f64::NAN };

    let fit = match config.spectrum.fit_window {
        Some(window) => Some(s.fit_line(window)?),
        None => {
            let window = default_window(spec, mode)?;
            s.fit_line(window).ok()
        }
    };

    let mut table = Table::new(&["omega_rad_s", "S_xx_s_per_rad", "S_rescaled_dimless"]);
    for (&w, &v) in s.omega.iter().zip(&s.values) {
        table.push(vec![w.into(), v.into(), (v / reference).into()]);
    }

    let (peak_omega, peak_value) = s.peak();
    let closed_form = if mode == ModeName::A {
        crate::analytics::n_eff_closed_form(spec, spec.optical_damping(), &baths)
            .map(|c| num(c.n_eff))
            .unwrap_or(Value::Null)
    } else {
        Value::Null
    };
    let results = json!({
        "mode": mode.to_string(),
        "system": system_json(spec),
        "baths": { "nbar_a": num(baths.nbar_a), "nbar_b": num(baths.nbar_b), "nbar_c": num(baths.nbar_c) },
        "n_eff": num(s.n_eff),
        "n_eff_closed_form": closed_form,
        "T_eff_K": num(s.t_eff),
        "quadrature_error": num(s.occupation.quadrature_error),
        "tail_fraction": num(s.occupation.tail_fraction),
        "clipped_points": s.clipped,
        "grid_points": s.omega.len(),
        "peak": { "omega_rad_s": num(peak_omega), "S_xx_s_per_rad": num(peak_value) },
        "rescale_reference_s_per_rad": num(reference),
        "fit": fit.map(|f| json!({
            "center_rad_s": num(f.center),
            "fwhm_rad_s": num(f.fwhm),
            "area": num(f.area),
            "baseline_s_per_rad": num(f.baseline),
            "relative_residual": num(f.relative_residual),
        })),
        "validity_flags": flags_json(&RegimeFlags::evaluate(spec, spec.optical_damping())),
    });
    Ok((table, results))
}

fn sweep_table(sweep: &SweepResult) -> Table {
    let axis = match sweep.axis.as_str() {
        "delta_ab" => "delta_ab_rad_s",
        _ => "C_OM_dimless",
    };
    let mut table = Table::new(&[
        axis,
        "n_eff_dimless",
        "T_ratio_dimless",
        "linewidth_rad_s",
        "flags",
        "error",
    ]);
    for i in 0..sweep.len() {
        table.push(vec![
            sweep.values[i].into(),
            sweep.n_eff[i].into(),
            sweep.t_ratio[i].into(),
            sweep.linewidths[i].into(),
            sweep.validity_flags[i]
                .as_ref()
                .map(flags_text)
                .unwrap_or_default()
                .into(),
            sweep.errors[i].clone().unwrap_or_default().into(),
        ]);
    }
    table
}

fn run_sweep(config: &RunConfig) -> Result<(Table, Value)> {
    let spec = config.system()?;
    let settings = settings(config, spec)?;
    let nbar = settings.baths.nbar_a;
    let c_ab = spec.c_ab();
    let analytic = json!({
        "C_OM_star": optimal_cooperativity(c_ab).map(num).unwrap_or(Value::Null),
        "n_ratio_min": cooling_limit_ratio(c_ab).map(num).unwrap_or(Value::Null),
    });
    let failures = |s: &SweepResult| s.errors.iter().filter(|e| e.is_some()).count();

    if let Some(deltas) = &config.sweep.detuning {
        let sweep = sweep_detuning(spec, deltas, &settings, config.sweep.detuning_mode);
        let best = sweep.argmin();
        let results = json!({
            "axis": "delta_ab_rad_s",
            "system": system_json(spec),
            "points": sweep.len(),
            "failed_points": failures(&sweep),
            "n_ratio_min": best.map(|i| num(sweep.n_eff[i] / nbar)).unwrap_or(Value::Null),
            "delta_ab_at_min_rad_s": best.map(|i| num(sweep.values[i])).unwrap_or(Value::Null),
            "closed_form": analytic,
        });
        return Ok((sweep_table(&sweep), results));
    }

    let c_om = &config.sweep.c_om;
    let sweep = sweep_cooperativity(spec, c_om, &settings);
    let best = sweep.argmin();
    // Refine between the grid neighbours of the discrete minimum.
    let refined = best.and_then(|i| {
        let lo = c_om[i.saturating_sub(1)]
            .max(c_om[i] * 1e-3)
            .max(f64::MIN_POSITIVE);
        let hi = c_om[(i + 1).min(c_om.len() - 1)];
        if i == 0 || i + 1 == c_om.len() {
            return None;
        }
        find_optimum(spec, (lo, hi), &settings).ok()
    });
    let (c_star, n_min) = match (refined, best) {
        (Some(opt), _) => (num(opt.c_om_star), num(opt.n_eff_star)),
        (None, Some(i)) => (num(sweep.values[i]), num(sweep.n_eff[i])),
        (None, None) => (Value::Null, Value::Null),
    };
    let n_ratio = n_min.as_f64().map(|n| num(n / nbar)).unwrap_or(Value::Null);
    let results = json!({
        "axis": "C_OM_dimless",
        "system": system_json(spec),
        "points": sweep.len(),
        "failed_points": failures(&sweep),
        "C_OM_star": c_star,
        "C_OM_star_on_grid": best.map(|i| num(sweep.values[i])).unwrap_or(Value::Null),
        "interior_minimum": refined.is_some(),
        "n_eff_min": n_min,
        "n_ratio_min": n_ratio,
        "nbar_a": num(nbar),
        "closed_form": analytic,
    });
    Ok((sweep_table(&sweep), results))
}

fn run_optimize(config: &RunConfig) -> Result<(Table, Value)> {
    let spec = config.system()?;
    let settings = settings(config, spec)?;
    let opt = find_optimum(spec, config.optimize.bracket, &settings)?;
    let at = spec.with_cooperativity(opt.c_om_star)?;
    let flags = RegimeFlags::evaluate(&at, at.optical_damping());
    let c_ab = spec.c_ab();

    let mut table = Table::new(&[
        "C_OM_star_dimless",
        "n_eff_dimless",
        "n_ratio_dimless",
        "T_ratio_dimless",
        "linewidth_rad_s",
        "flags",
    ]);
    table.push(vec![
        opt.c_om_star.into(),
        opt.n_eff_star.into(),
        opt.n_ratio.into(),
        opt.t_ratio.into(),
        opt.linewidth.into(),
        flags_text(&flags).into(),
    ]);
    let results = json!({
        "system": system_json(spec),
        "bracket": [num(config.optimize.bracket.0), num(config.optimize.bracket.1)],
        "C_OM_star": num(opt.c_om_star),
        "n_eff_star": num(opt.n_eff_star),
        "n_ratio_min": num(opt.n_ratio),
        "T_ratio": num(opt.t_ratio),
        "linewidth_rad_s": num(opt.linewidth),
        "evaluations": opt.evaluations,
        "nbar_a": num(settings.baths.nbar_a),
        "closed_form": {
            "C_OM_star": optimal_cooperativity(c_ab).map(num).unwrap_or(Value::Null),
            "n_ratio_min": cooling_limit_ratio(c_ab).map(num).unwrap_or(Value::Null),
            "linewidth_rad_s": narrowed_linewidth(spec.mode_a.gamma, c_ab).map(num).unwrap_or(Value::Null),
        },
        "validity_flags": flags_json(&flags),
    });
    Ok((table, results))
}

fn run_design(config: &RunConfig) -> Result<(Table, Value)> {
    let d = config
        .design
        .as_ref()
        .ok_or_else(|| Error::invalid("design", "missing [design] section"))?;
    let g = &d.geometry;
    let omega0 = normal_mode_map(
        cantilever_frequency(g.l_left, g.h, &d.material),
        cantilever_frequency(g.l_right, g.h, &d.material),
    )?
    .omega0;
    // Undriven placeholder cavity on the red sideband; it does not enter the loss budget.
    let cavity = CavityDrive::from_alpha(0.1 * omega0, -omega0, 0.0, Default::default())?;
    let report = design_to_system(
        &d.geometry,
        &d.material,
        d.temperature,
        &cavity,
        d.clamping_calibration,
    )?;
    let b = &report.budget;
    let (c_star, n_ratio) = if report.c_ab.is_finite() {
        (
            optimal_cooperativity(report.c_ab)?,
            cooling_limit_ratio(report.c_ab)?,
        )
    } else {
        (f64::INFINITY, 0.0)
    };

    let mut table = Table::new(&[
        "omega0_rad_s",
        "epsilon_dimless",
        "lambda_rad_s",
        "gamma_clamp_rad_s",
        "gamma_ted_rad_s",
        "Q_clamp_dimless",
        "Q_ted_dimless",
        "C_ab_dimless",
        "mass_a_kg",
    ]);
    table.push(vec![
        b.omega0.into(),
        report.epsilon.into(),
        b.lambda.into(),
        b.gamma_clamp.into(),
        b.gamma_ted.into(),
        b.q_clamp.into(),
        b.q_ted.into(),
        report.c_ab.into(),
        report.spec.mass_a.into(),
    ]);
    let mut budget = Map::new();
    for (k, v) in [
        ("omega0_rad_s", b.omega0),
        ("f0_Hz", b.omega0 / (2.0 * std::f64::consts::PI)),
        ("lambda_rad_s", b.lambda),
        ("gamma_clamp_rad_s", b.gamma_clamp),
        ("gamma_ted_rad_s", b.gamma_ted),
        ("Q_clamp", b.q_clamp),
        ("Q_ted", b.q_ted),
    ] {
        budget.insert(k.into(), num(v));
    }
    let results = json!({
        "material": d.material.name,
        "temperature_K": num(d.temperature),
        "omega0": num(b.omega0),
        "budget": budget,
        "epsilon": num(report.epsilon),
        "C_ab": num(report.c_ab),
        "mass_a_kg": num(report.spec.mass_a),
        "predicted_C_OM_star": num(c_star),
        "predicted_n_ratio_min": num(n_ratio),
        "warnings": report.warnings,
    });
    Ok((table, results))
}

fn run_sense(config: &RunConfig) -> Result<(Table, Value)> {
    let spec = config.system()?;
    let baths = config.baths_for(spec)?;
    let model = build_system_with_baths(spec, config.fidelity, &baths);
    model.ensure_stable()?;
    let cs = cooling_summary(spec)?;
    let center = spec.mode_a.omega;
    let half = config.sense.window_linewidths * cs.linewidth_a.max(spec.mode_a.gamma);
    let n = config.sense.points;

    let mut table = Table::new(&["omega_rad_s", "S_FF_N2_per_Hz", "factor_dimless"]);
    let prefactor_rate = crate::analytics::force_prefactor(spec) * spec.mode_a.gamma;
    for i in 0..n {
        let w = center - half + 2.0 * half * i as f64 / (n - 1) as f64;
        let s_ff = force_noise_at(&model, spec, w)?;
        let factor = force_noise_factor_numeric(&model, spec, w)?;
        table.push(vec![w.into(), s_ff.into(), factor.into()]);
    }

    let c_om = if spec.mode_b.gamma > 0.0 {
        spec.c_om()
    } else {
        0.0
    };
    let numeric_factor = force_noise_factor_numeric(&model, spec, center)?;
    let analytic_factor = force_noise_factor(spec.c_ab(), c_om);
    let conventional = force_noise_factor(spec.c_ab(), 0.0);
    let classical = if spec.mode_a.bath_temperature > 0.0 {
        let f = force_noise_psd(spec, spec.optical_damping(), spec.mode_a.bath_temperature)?;
        json!({
            "S_FF_N2_per_Hz": num(f.s_ff),
            "factor": num(f.factor),
            "classical_regime": f.classical,
        })
    } else {
        Value::Null
    };
    let note = if prefactor_rate > 0.0 {
        Value::Null
    } else {
        Value::String("gamma_a = 0: force noise factor undefined".into())
    };
    let results = json!({
        "system": system_json(spec),
        "S_FF_at_omega_a_N2_per_Hz": num(force_noise_at(&model, spec, center)?),
        "factor_numeric": num(numeric_factor),
        "factor_closed_form": num(analytic_factor),
        "conventional_factor": num(conventional),
        "improvement_over_conventional": num(conventional / numeric_factor),
        "closed_form_psd": classical,
        "note": note,
    });
    Ok((table, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;

    fn cfg(task: &str, extra: &str) -> RunConfig {
        let text = format!(
            r#"
task = "{task}"
frequency_unit = "rad_s"

[mode_a]
omega = 1.0
gamma = 1e-5
bath_temperature = 0.0

[mode_b]
omega = 1.0
gamma = 1e-3
bath_temperature = 0.0

[cavity]
kappa = 0.05
g0 = 1e-3
c_om = 3.0

[coupling]
lambda = 1.4142135623730951e-4

[baths]
nbar_a = 100.0
nbar_b = 100.0
{extra}
"#
        );
        parse_config(&text).unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, 1e-5, 6.92e6, -3.25, 1.0 / 3.0] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn sweep_reports_optimum() {
        let c = cfg(
            "sweep",
            "[sweep]\nc_om_min = 0.1\nc_om_max = 100.0\npoints_per_decade = 10\n",
        );
        let out = run(&c).unwrap();
        let r = &out.summary["results"];
        assert!((r["C_OM_star"].as_f64().unwrap() / 3.0 - 1.0).abs() < 1e-3);
        assert!((r["n_ratio_min"].as_f64().unwrap() / 0.5 - 1.0).abs() < 1e-3);
        assert_eq!(out.table.rows.len(), 31);
        assert!(out
            .table
            .to_csv()
            .unwrap()
            .starts_with("C_OM_dimless,n_eff_dimless"));
    }

    #[test]
    fn spectrum_table_and_fit() {
        let out = run(&cfg("spectrum", "")).unwrap();
        let r = &out.summary["results"];
        let fwhm = r["fit"]["fwhm_rad_s"].as_f64().unwrap();
        assert!((fwhm / 3e-5 - 1.0).abs() < 0.03, "{fwhm}");
        let s = out.table.column("S_rescaled_dimless").unwrap();
        assert!(s.iter().all(|v| (0.0..=2.0).contains(v)));
    }

    #[test]
    fn sense_factor_at_resonance() {
        let out = run(&cfg("sense", "[sense]\npoints = 11\n")).unwrap();
        let r = &out.summary["results"];
        let f = r["factor_numeric"].as_f64().unwrap();
        assert!((f / (1.0 + 8.0 / 16.0) - 1.0).abs() < 0.05, "{f}");
        assert_eq!(out.table.rows.len(), 11);
    }

    #[test]
    fn output_is_deterministic() {
        let c = cfg("optimize", "[optimize]\nbracket = [0.1, 100.0]\n");
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.summary_text().unwrap(), b.summary_text().unwrap());
        assert_eq!(a.table.to_csv().unwrap(), b.table.to_csv().unwrap());
    }
}

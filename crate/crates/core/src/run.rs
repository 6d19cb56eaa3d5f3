//! Mode dispatch: computes, then writes `<prefix>_<mode>.csv` and
//! `<prefix>_<mode>.json` into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde_json::{json, Value};

use crate::config::{Mode, RunConfig};
use crate::cumulant::{find_steady_state, pairs, SteadyStateSolution};
use crate::error::{Error, Result};
use crate::kernels::SpacingUnit;
use crate::output::{finite_or_null, json_document, sha256_hex, version_string, write_atomic, Cell, CsvTable, Diagnostics};
use crate::scaling::{coherence_decomposition, density_from_spacing, extrapolate, scaling_study};
use crate::spectrum::{auto_spectrum, build_regression};
use crate::sweep::{locate_optimum, run_sweep, AxisName, Objective, Optimum, SweepRecord};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub mode: Mode,
    pub out_dir: PathBuf,
    /// Worker threads for sweeps; `None` uses all cores.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub document: Value,
}

struct Computed {
    table: CsvTable,
    results: Value,
    residual: f64,
    iterations: usize,
}

/// Runs `mode` on a validated config and writes both artifacts.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<RunOutcome> {
    if let Some(m) = config.mode {
        if m != options.mode {
            return Err(Error::param(
                "mode",
                format!("config declares `{m}` but `{}` was requested", options.mode),
            ));
        }
    }
    let started = Instant::now();
    info!("running {} for N = {}", options.mode, config.params.n_atoms);
    let computed = match options.mode {
        Mode::Steady => steady(config)?,
        Mode::Spectrum => spectrum(config)?,
        Mode::Sweep => sweep(config, options.jobs)?,
        Mode::Scaling => scaling(config, options.jobs)?,
        Mode::OracleCheck => oracle_check(config)?,
        Mode::Fig5 => fig5(config, options.jobs)?,
    };
    let wallclock = started.elapsed().as_secs_f64();

    let canonical = config.to_toml();
    let comments = [
        version_string(),
        format!("config_sha256 {}", sha256_hex(&canonical)),
        format!("mode {}", options.mode),
    ];
    let document = json_document(
        options.mode.as_str(),
        config.to_json(),
        computed.results,
        Diagnostics {
            residual: computed.residual,
            iterations: computed.iterations,
            wallclock,
        },
    );
    let stem = format!("{}_{}", config.prefix, options.mode);
    let csv_path = options.out_dir.join(format!("{stem}.csv"));
    let json_path = options.out_dir.join(format!("{stem}.json"));
    write_atomic(&csv_path, computed.table.render(&comments).as_bytes())?;
    let mut text = serde_json::to_string_pretty(&document).expect("JSON values always serialise");
    text.push('\n');
    write_atomic(&json_path, text.as_bytes())?;
    Ok(RunOutcome {
        csv_path,
        json_path,
        document,
    })
}

/// Parses `text` and runs it.
pub fn run_text(text: &str, options: &RunOptions) -> Result<RunOutcome> {
    run(&crate::config::parse_config(text)?, options)
}

/// Reads a config file; unreadable files are I/O errors.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    crate::config::parse_config(&text)
}

fn complex(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

fn state_json(sol: &SteadyStateSolution) -> Value {
    let s = &sol.state;
    let coherences: Vec<Value> = pairs(s.n_atoms())
        .zip(&s.atom_atom)
        .map(|((a, b), z)| json!({"i": a + 1, "j": b + 1, "re": z.re, "im": z.im}))
        .collect();
    json!({
        "photon_number": s.photon_number,
        "populations": s.populations,
        "atom_photon": s.atom_photon.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "coherences": coherences,
        "residual": sol.residual_norm,
        "method": sol.method,
        "iterations": sol.iterations,
    })
}

fn state_table(sol: &SteadyStateSolution) -> CsvTable {
    let s = &sol.state;
    let mut t = CsvTable::new(["observable", "re", "im"]);
    t.push(vec!["photon_number".into(), s.photon_number.into(), 0.0.into()]);
    for (i, p) in s.populations.iter().enumerate() {
        t.push(vec![Cell::Text(format!("population_{}", i + 1)), (*p).into(), 0.0.into()]);
    }
    for (i, z) in s.atom_photon.iter().enumerate() {
        t.push(vec![Cell::Text(format!("atom_photon_{}", i + 1)), z.re.into(), z.im.into()]);
    }
    for ((a, b), z) in pairs(s.n_atoms()).zip(&s.atom_atom) {
        t.push(vec![Cell::Text(format!("coherence_{}_{}", a + 1, b + 1)), z.re.into(), z.im.into()]);
    }
    t
}

fn steady(config: &RunConfig) -> Result<Computed> {
    let couplings = config.couplings()?;
    let sol = find_steady_state(&config.params, &couplings, &config.solver)?;
    Ok(Computed {
        table: state_table(&sol),
        results: state_json(&sol),
        residual: sol.residual_norm,
        iterations: sol.iterations,
    })
}

fn hz(config: &RunConfig, v: f64) -> Value {
    config.gamma_hz.map_or(Value::Null, |g| finite_or_null(v * g))
}

fn spectrum(config: &RunConfig) -> Result<Computed> {
    let couplings = config.couplings()?;
    let sol = find_steady_state(&config.params, &couplings, &config.solver)?;
    let sys = build_regression(&config.params, &couplings, &sol)?;
    let (spec, line) = auto_spectrum(&sys, &config.grid)?;
    let mut table = CsvTable::new(["nu", "s"]);
    for (nu, s) in spec.nu.iter().zip(&spec.s) {
        table.push(vec![(*nu).into(), (*s).into()]);
    }
    let results = json!({
        "fwhm": line.fwhm,
        "center": line.center,
        "peak": line.peak,
        "half_max_left": line.left,
        "half_max_right": line.right,
        "fwhm_hz": hz(config, line.fwhm),
        "center_hz": hz(config, line.center),
        "grid": {
            "center": spec.meta.center,
            "half_span": spec.meta.half_span,
            "points": spec.meta.points,
            "refined": spec.meta.refined,
        },
        "steady_state": state_json(&sol),
    });
    Ok(Computed {
        table,
        results,
        residual: sol.residual_norm,
        iterations: sol.iterations,
    })
}

/// Axis value as reported: spacings in the configured unit.
fn report_axis(axis: AxisName, unit: SpacingUnit, v: f64) -> f64 {
    match axis {
        AxisName::Spacing => unit.from_wavelengths(v),
        _ => v,
    }
}

fn optimum_json(o: &Optimum, objective: Objective, axis: AxisName, unit: SpacingUnit) -> Value {
    json!({
        "objective": objective,
        "axis_value": report_axis(axis, unit, o.axis_value),
        "value": o.objective,
        "interior": o.interior,
        "refined": o.refined,
        "bracket": [report_axis(axis, unit, o.bracket.0), report_axis(axis, unit, o.bracket.1)],
    })
}

fn record_stats(records: &[SweepRecord]) -> (f64, usize) {
    records.iter().filter(|r| r.converged).fold((0.0_f64, 0), |(res, it), r| {
        (res.max(r.residual), it + r.iterations)
    })
}

const SWEEP_HEADER: [&str; 16] = [
    "axis_value",
    "spacing",
    "w",
    "n_atoms",
    "photon_number",
    "population_mean",
    "population_min",
    "population_max",
    "coherence_sum_re",
    "coherence_max_abs",
    "fwhm",
    "center",
    "peak",
    "converged",
    "residual",
    "iterations",
];

fn sweep(config: &RunConfig, jobs: Option<usize>) -> Result<Computed> {
    let sc = config.sweep_or_default();
    let unit = config.geometry.unit;
    let axis = sc.axis(unit)?;
    let template = config.sweep_template()?;
    if axis.name == AxisName::Pump && config.params.n_atoms > 1 && config.geometry.spacing.is_none() {
        return Err(Error::param("spacing", "a pump sweep needs [geometry] `spacing`"));
    }
    let records = run_sweep(&template, &axis, sc.spectrum, jobs)?;
    let shown = sc.configured_axis()?.values;
    let fixed_spacing = config.geometry.spacing.unwrap_or(f64::NAN);

    let mut table = CsvTable::new(SWEEP_HEADER);
    for (r, &value) in records.iter().zip(&shown) {
        let np = r.populations.len().max(1) as f64;
        let (pmin, pmax) = r
            .populations
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| (a.min(p), b.max(p)));
        let nan_unless = |v: f64| if r.converged { v } else { f64::NAN };
        table.push(vec![
            value.into(),
            match axis.name {
                AxisName::Spacing => value,
                _ => fixed_spacing,
            }
            .into(),
            r.params.w.into(),
            r.params.n_atoms.into(),
            r.photon_number.into(),
            nan_unless(r.populations.iter().sum::<f64>() / np).into(),
            nan_unless(pmin).into(),
            nan_unless(pmax).into(),
            nan_unless(r.pair_coherences.iter().map(|z| z.re).sum()).into(),
            nan_unless(r.pair_coherences.iter().map(|z| z.norm()).fold(0.0, f64::max)).into(),
            r.fwhm.into(),
            r.center.into(),
            r.peak.into(),
            r.converged.into(),
            r.residual.into(),
            r.iterations.into(),
        ]);
    }

    let objectives = match sc.objective {
        Some(o) => vec![o],
        None if sc.spectrum => vec![Objective::MaxPhoton, Objective::MinFwhm],
        None => vec![Objective::MaxPhoton],
    };
    let mut optima = Vec::new();
    for obj in objectives {
        if obj == Objective::MinFwhm && !sc.spectrum {
            return Err(Error::param("objective", "min_fwhm needs `spectrum = true`"));
        }
        let o = locate_optimum(&template, axis.name, &records, obj, sc.refine)?;
        optima.push(optimum_json(&o, obj, axis.name, unit));
    }
    let failures: Vec<Value> = records
        .iter()
        .zip(&shown)
        .filter(|(r, _)| !r.converged)
        .map(|(r, v)| json!({"axis_value": v, "error": r.error}))
        .collect();
    let (residual, iterations) = record_stats(&records);
    let results = json!({
        "axis": axis.name,
        "spacing_unit": unit,
        "points": records.len(),
        "converged": records.iter().filter(|r| r.converged).count(),
        "optima": optima,
        "failures": failures,
    });
    Ok(Computed {
        table,
        results,
        residual,
        iterations,
    })
}

fn scaling(config: &RunConfig, jobs: Option<usize>) -> Result<Computed> {
    let sc = config.sweep_or_default();
    if sc.axis != AxisName::Spacing {
        return Err(Error::param("axis", "scaling sweeps the spacing axis"));
    }
    let unit = config.geometry.unit;
    let axis = sc.axis(unit)?;
    let template = config.sweep_template()?;
    let objectives = match sc.objective {
        Some(o) => vec![o],
        None => vec![Objective::MaxPhoton, Objective::MinFwhm],
    };
    let mut table = CsvTable::new([
        "objective",
        "n_atoms",
        "optimal_spacing",
        "value",
        "interior",
        "refined",
        "density_cm3",
    ]);
    let mut studies = Vec::new();
    for obj in objectives {
        let study = scaling_study(&template, &sc.n_values, &axis, obj, sc.refine, jobs)?;
        let tag = match obj {
            Objective::MaxPhoton => "max_photon",
            Objective::MinFwhm => "min_fwhm",
        };
        for p in &study.points {
            let spacing = unit.from_wavelengths(p.optimum.axis_value);
            table.push(vec![
                tag.into(),
                p.n_atoms.into(),
                spacing.into(),
                p.optimum.objective.into(),
                p.optimum.interior.into(),
                p.optimum.refined.into(),
                density_from_spacing(spacing, sc.wavelength_nm)?.into(),
            ]);
        }
        let ext = extrapolate(&study.fit, sc.extrapolate_to);
        let value_hz = match obj {
            Objective::MinFwhm => hz(config, ext.value),
            Objective::MaxPhoton => Value::Null,
        };
        studies.push(json!({
            "objective": obj,
            "fit": study.fit,
            "extrapolation": {
                "n_target": ext.n_target,
                "value": ext.value,
                "value_hz": value_hz,
                "note": ext.note,
            },
        }));
    }
    let results = json!({
        "interactions": config.interactions,
        "spacing_unit": unit,
        "wavelength_nm": sc.wavelength_nm,
        "n_values": sc.n_values,
        "studies": studies,
    });
    Ok(Computed {
        table,
        results,
        residual: f64::NAN,
        iterations: 0,
    })
}

fn oracle_check(config: &RunConfig) -> Result<Computed> {
    if config.params.n_atoms > 3 {
        return Err(Error::param("n_atoms", "the exact oracle handles at most 3 atoms"));
    }
    let couplings = config.couplings()?;
    let sol = find_steady_state(&config.params, &couplings, &config.solver)?;
    let report = crate::oracle::compare(&config.params, &couplings, &sol.state, config.photon_cutoff)?;
    let mut table = CsvTable::new(["observable", "cumulant", "exact", "absolute_deviation", "relative_deviation"]);
    for r in &report.rows {
        table.push(vec![
            r.observable.as_str().into(),
            r.cumulant.into(),
            r.exact.into(),
            r.absolute_deviation.into(),
            r.relative_deviation.into(),
        ]);
    }
    let results = json!({
        "photon_cutoff": report.photon_cutoff,
        "cutoff_change": finite_or_null(report.cutoff_change),
        "rows": report.rows,
    });
    Ok(Computed {
        table,
        results,
        residual: sol.residual_norm,
        iterations: sol.iterations,
    })
}

fn fig5(config: &RunConfig, jobs: Option<usize>) -> Result<Computed> {
    if config.params.n_atoms != 3 {
        return Err(Error::param("n_atoms", "fig5 needs n_atoms = 3"));
    }
    let sc = config.sweep_or_default();
    if sc.axis != AxisName::Spacing {
        return Err(Error::param("axis", "fig5 sweeps the spacing axis"));
    }
    let unit = config.geometry.unit;
    let rows = coherence_decomposition(&config.sweep_template()?, &sc.axis(unit)?, jobs)?;
    let shown = sc.configured_axis()?.values;
    let mut table = CsvTable::new(["spacing", "x12", "x23", "x13", "sum", "three_nearest", "converged"]);
    for (r, &spacing) in rows.iter().zip(&shown) {
        table.push(vec![
            spacing.into(),
            r.x12.into(),
            r.x23.into(),
            r.x13.into(),
            r.sum.into(),
            r.three_nearest.into(),
            r.converged.into(),
        ]);
    }
    let gaps: Vec<f64> = rows.iter().filter(|r| r.converged).map(|r| r.relative_gap()).collect();
    let results = json!({
        "spacing_unit": unit,
        "points": rows.len(),
        "max_relative_gap": finite_or_null(gaps.iter().copied().fold(f64::NAN, f64::max)),
        "relative_gap_at_largest_spacing": finite_or_null(gaps.last().copied().unwrap_or(f64::NAN)),
    });
    Ok(Computed {
        table,
        results,
        residual: f64::NAN,
        iterations: 0,
    })
}

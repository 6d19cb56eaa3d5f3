//! Run configuration: TOML text with `[system]`, `[geometry]`, `[sweep]`,
//! `[solver]`, `[spectrum]`, `[oracle]` and `[output]` sections.
//!
//! Parsing rejects unknown keys, fills defaults and validates every field
//! before any computation starts. Errors carry the 1-based line of the
//! offending key. [`RunConfig::to_toml`] emits a canonical text that parses
//! back to an identical config.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::cumulant::{SolveOptions, SolveStrategy, SystemParams};
use crate::error::{Error, Result};
use crate::kernels::{build_couplings, disable_interactions, equidistant_chain, AtomGeometry, CouplingMatrices, SpacingUnit};
use crate::spectrum::GridOptions;
use crate::sweep::{AxisName, Objective, SweepAxis, SweepTemplate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Steady,
    Spectrum,
    Sweep,
    Scaling,
    OracleCheck,
    Fig5,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Steady,
        Mode::Spectrum,
        Mode::Sweep,
        Mode::Scaling,
        Mode::OracleCheck,
        Mode::Fig5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Steady => "steady",
            Mode::Spectrum => "spectrum",
            Mode::Sweep => "sweep",
            Mode::Scaling => "scaling",
            Mode::OracleCheck => "oracle-check",
            Mode::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::param("mode", format!("unknown mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

/// Axis values, either listed or generated.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range {
        scale: GridScale,
        start: f64,
        stop: f64,
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: AxisName,
    /// Spacing values are in the geometry's `spacing_unit`.
    pub grid: GridSpec,
    pub spectrum: bool,
    pub objective: Option<Objective>,
    pub refine: bool,
    pub n_values: Vec<usize>,
    pub extrapolate_to: f64,
    pub wavelength_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Chain spacing in `unit`.
    pub spacing: Option<f64>,
    pub unit: SpacingUnit,
    /// Explicit positions in wavelengths; replaces the chain.
    pub positions: Option<Vec<[f64; 3]>>,
    pub dipole: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub params: SystemParams,
    pub interactions: bool,
    /// Γ in Hz; only used to report widths in Hz.
    pub gamma_hz: Option<f64>,
    pub geometry: GeometryConfig,
    pub sweep: Option<SweepConfig>,
    pub solver: SolveOptions,
    pub grid: GridOptions,
    pub photon_cutoff: usize,
    pub prefix: String,
}

// On-disk layout. Every field is optional so defaults can be applied after
// unknown keys are rejected.

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    spectrum: RawSpectrum,
    #[serde(default)]
    oracle: RawOracle,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n_atoms: Option<usize>,
    g: Option<f64>,
    kappa: Option<f64>,
    w: Option<f64>,
    delta: Option<f64>,
    interactions: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_hz: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    #[serde(skip_serializing_if = "Option::is_none")]
    spacing: Option<f64>,
    spacing_unit: Option<SpacingUnit>,
    dipole: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Option<AxisName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<GridScale>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    spectrum: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<Objective>,
    refine: Option<bool>,
    n_values: Option<Vec<usize>>,
    extrapolate_to: Option<f64>,
    wavelength_nm: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tolerance: Option<f64>,
    max_newton_iterations: Option<usize>,
    handoff_residual: Option<f64>,
    max_integration_steps: Option<usize>,
    strategy: Option<SolveStrategy>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    points: Option<usize>,
    half_span_widths: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    photon_cutoff: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    prefix: Option<String>,
}

const DEFAULT_N_VALUES: [usize; 4] = [2, 3, 4, 5];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of `key` inside `[section]` (or at top level), or of the section header.
fn key_line(text: &str, section: Option<&str>, key: &str) -> usize {
    use toml::de::{DeTable, DeValue};
    let Ok(root) = DeTable::parse(text) else {
        return 1;
    };
    fn find<'t, 'i>(table: &'t DeTable<'i>, name: &str) -> Option<(std::ops::Range<usize>, &'t DeValue<'i>)> {
        table
            .iter()
            .find(|(k, _)| k.get_ref().as_ref() == name)
            .map(|(k, v)| (k.span(), v.get_ref()))
    }
    let root = root.get_ref();
    let scope = match section {
        None => return find(root, key).map_or(1, |(s, _)| line_of(text, s.start)),
        Some(sec) => find(root, sec),
    };
    match scope {
        Some((header, value)) => match value {
            DeValue::Table(t) => find(t, key).map_or(line_of(text, header.start), |(s, _)| line_of(text, s.start)),
            _ => line_of(text, header.start),
        },
        None => 1,
    }
}

/// Validation context carrying the source text for line lookups.
struct Check<'a> {
    text: &'a str,
    section: &'static str,
}

impl Check<'_> {
    fn fail(&self, key: &str, message: impl fmt::Display) -> Error {
        Error::Config {
            line: key_line(self.text, Some(self.section), key),
            message: format!("[{}] `{key}`: {message}", self.section),
        }
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be positive and finite (got {v})")))
        }
    }

    fn non_negative(&self, key: &str, v: f64) -> Result<f64> {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be non-negative and finite (got {v})")))
        }
    }

    fn finite(&self, key: &str, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail(key, format!("must be finite (got {v})")))
        }
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    validate(raw, text)
}

fn validate(raw: RawConfig, text: &str) -> Result<RunConfig> {
    let sys = Check { text, section: "system" };
    let s = raw.system;
    let defaults = SystemParams::bad_cavity(2, 0.1);
    let g = sys.non_negative("g", s.g.unwrap_or(defaults.g))?;
    let kappa = sys.positive("kappa", s.kappa.unwrap_or(defaults.kappa))?;
    let w = sys.non_negative("w", s.w.unwrap_or(defaults.w))?;
    let delta = sys.finite("delta", s.delta.unwrap_or(defaults.delta))?;
    let gamma_hz = s.gamma_hz.map(|v| sys.positive("gamma_hz", v)).transpose()?;

    let geo = Check { text, section: "geometry" };
    let gr = raw.geometry;
    let unit = gr.spacing_unit.unwrap_or_default();
    let spacing = gr.spacing.map(|v| geo.positive("spacing", v)).transpose()?;
    let dipole = gr.dipole.unwrap_or([1.0, 0.0, 0.0]);
    if Vector3::from(dipole).norm() == 0.0 || dipole.iter().any(|c| !c.is_finite()) {
        return Err(geo.fail("dipole", "must be a finite non-zero vector"));
    }
    if let Some(p) = &gr.positions {
        if spacing.is_some() {
            return Err(geo.fail("positions", "give either `spacing` or `positions`, not both"));
        }
        if p.is_empty() {
            return Err(geo.fail("positions", "needs at least one atom"));
        }
    }
    let n_atoms = match (&gr.positions, s.n_atoms) {
        (Some(p), Some(n)) if p.len() != n => {
            return Err(sys.fail(
                "n_atoms",
                format!("{n} atoms but [geometry] lists {} positions", p.len()),
            ))
        }
        (Some(p), _) => p.len(),
        (None, n) => n.unwrap_or(defaults.n_atoms),
    };
    if n_atoms == 0 {
        return Err(sys.fail("n_atoms", "must be at least 1"));
    }
    let params = SystemParams {
        n_atoms,
        g,
        kappa,
        w,
        delta,
    };
    let geometry = GeometryConfig {
        spacing,
        unit,
        positions: gr.positions,
        dipole,
    };
    if let Some(p) = &geometry.positions {
        geometry.explicit().map_err(|e| geo.fail("positions", strip(&e)))?;
        debug_assert_eq!(p.len(), n_atoms);
    }

    let sweep = raw.sweep.map(|r| validate_sweep(r, text, unit)).transpose()?;

    let sol = Check { text, section: "solver" };
    let d = SolveOptions::default();
    let r = raw.solver;
    let solver = SolveOptions {
        tolerance: sol.positive("tolerance", r.tolerance.unwrap_or(d.tolerance))?,
        max_newton_iterations: r.max_newton_iterations.unwrap_or(d.max_newton_iterations),
        handoff_residual: sol.positive("handoff_residual", r.handoff_residual.unwrap_or(d.handoff_residual))?,
        max_integration_steps: r.max_integration_steps.unwrap_or(d.max_integration_steps),
        strategy: r.strategy.unwrap_or(d.strategy),
        initial_guess: None,
    };
    if solver.max_newton_iterations == 0 {
        return Err(sol.fail("max_newton_iterations", "must be at least 1"));
    }

    let spc = Check { text, section: "spectrum" };
    let dg = GridOptions::default();
    let grid = GridOptions {
        points: raw.spectrum.points.unwrap_or(dg.points),
        half_span_widths: spc.positive(
            "half_span_widths",
            raw.spectrum.half_span_widths.unwrap_or(dg.half_span_widths),
        )?,
    };
    if grid.points < 5 {
        return Err(spc.fail("points", "needs at least 5 grid points"));
    }

    let photon_cutoff = raw.oracle.photon_cutoff.unwrap_or(3);
    if photon_cutoff < 2 {
        return Err(Check { text, section: "oracle" }.fail("photon_cutoff", "must be at least 2"));
    }

    let prefix = raw.output.prefix.unwrap_or_else(|| "srlaser".to_string());
    if prefix.is_empty() || prefix.contains(['/', '\\']) {
        return Err(Check { text, section: "output" }.fail("prefix", "must be a non-empty file stem"));
    }

    Ok(RunConfig {
        mode: raw.mode,
        params,
        interactions: s.interactions.unwrap_or(true),
        gamma_hz,
        geometry,
        sweep,
        solver,
        grid,
        photon_cutoff,
        prefix,
    })
}

fn strip(e: &Error) -> String {
    match e {
        Error::Parameter { reason, .. } => reason.clone(),
        other => other.to_string(),
    }
}

fn validate_sweep(r: RawSweep, text: &str, unit: SpacingUnit) -> Result<SweepConfig> {
    let c = Check { text, section: "sweep" };
    let axis = r.axis.ok_or_else(|| c.fail("axis", "missing required field"))?;
    let range = r.start.is_some() || r.stop.is_some() || r.points.is_some() || r.scale.is_some();
    let grid = match (r.values, range) {
        (Some(_), true) => return Err(c.fail("values", "give either `values` or start/stop/points, not both")),
        (Some(v), false) => GridSpec::Values(v),
        (None, true) => GridSpec::Range {
            scale: r.scale.unwrap_or(match axis {
                AxisName::NAtoms => GridScale::Linear,
                _ => GridScale::Log,
            }),
            start: c.finite("start", r.start.ok_or_else(|| c.fail("start", "missing required field"))?)?,
            stop: c.finite("stop", r.stop.ok_or_else(|| c.fail("stop", "missing required field"))?)?,
            points: r.points.ok_or_else(|| c.fail("points", "missing required field"))?,
        },
        (None, false) if axis == AxisName::Spacing => GridSpec::Range {
            scale: GridScale::Log,
            start: unit.from_wavelengths(0.05),
            stop: unit.from_wavelengths(100.0),
            points: 200,
        },
        (None, false) => return Err(c.fail("axis", "needs `values` or start/stop/points")),
    };
    if let GridSpec::Range { points: 0, .. } = grid {
        return Err(c.fail("points", "axis has no grid points"));
    }
    let n_values = r.n_values.unwrap_or_else(|| DEFAULT_N_VALUES.to_vec());
    if n_values.len() < 3 || n_values.iter().any(|&n| n < 1) || n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(c.fail("n_values", "needs at least 3 strictly increasing atom numbers"));
    }
    let cfg = SweepConfig {
        axis,
        grid,
        spectrum: r.spectrum.unwrap_or(true),
        objective: r.objective,
        refine: r.refine.unwrap_or(false),
        n_values,
        extrapolate_to: c.positive("extrapolate_to", r.extrapolate_to.unwrap_or(1e6))?,
        wavelength_nm: c.positive("wavelength_nm", r.wavelength_nm.unwrap_or(795.0))?,
    };
    let key = match cfg.grid {
        GridSpec::Values(_) => "values",
        GridSpec::Range { .. } => "start",
    };
    cfg.axis(unit).map_err(|e| c.fail(key, strip(&e)))?;
    Ok(cfg)
}

impl SweepConfig {
    /// Axis with spacings converted to wavelengths.
    pub fn axis(&self, unit: SpacingUnit) -> Result<SweepAxis> {
        let raw = self.configured_axis()?;
        if self.axis == AxisName::Spacing {
            SweepAxis::new(self.axis, raw.values.iter().map(|&v| unit.to_wavelengths(v)).collect())
        } else {
            Ok(raw)
        }
    }

    /// Axis values exactly as configured, before any unit conversion.
    pub fn configured_axis(&self) -> Result<SweepAxis> {
        match &self.grid {
            GridSpec::Values(v) => SweepAxis::new(self.axis, v.clone()),
            GridSpec::Range {
                scale: GridScale::Linear,
                start,
                stop,
                points,
            } => SweepAxis::linear(self.axis, *start, *stop, *points),
            GridSpec::Range {
                scale: GridScale::Log,
                start,
                stop,
                points,
            } => SweepAxis::log(self.axis, *start, *stop, *points),
        }
    }
}

impl GeometryConfig {
    fn explicit(&self) -> Result<Option<AtomGeometry>> {
        self.positions
            .as_ref()
            .map(|p| AtomGeometry::new(p.iter().map(|&r| Vector3::from(r)).collect(), self.unit_dipole()))
            .transpose()
    }

    /// Configured dipole direction, normalised.
    pub fn unit_dipole(&self) -> Vector3<f64> {
        Vector3::from(self.dipole).normalize()
    }

    /// Chain spacing in wavelengths.
    pub fn spacing_wavelengths(&self) -> Option<f64> {
        self.spacing.map(|s| self.unit.to_wavelengths(s))
    }
}

impl RunConfig {
    /// Geometry for single-point modes: explicit positions, or a chain.
    pub fn atom_geometry(&self) -> Result<AtomGeometry> {
        if let Some(g) = self.geometry.explicit()? {
            return Ok(g);
        }
        let n = self.params.n_atoms;
        match self.geometry.spacing_wavelengths() {
            Some(s) => {
                let chain = equidistant_chain(n, s)?;
                AtomGeometry::new(chain.positions().to_vec(), self.geometry.unit_dipole())
            }
            None if n == 1 => equidistant_chain(1, 1.0),
            None => Err(Error::param("spacing", "[geometry] needs `spacing` or `positions`")),
        }
    }

    pub fn couplings(&self) -> Result<CouplingMatrices> {
        let c = build_couplings(&self.atom_geometry()?)?;
        Ok(if self.interactions { c } else { disable_interactions(&c) })
    }

    /// Template for sweeps over an equidistant chain.
    pub fn sweep_template(&self) -> Result<SweepTemplate> {
        if self.geometry.positions.is_some() {
            return Err(Error::param("positions", "sweeps use an equidistant chain; give `spacing` instead"));
        }
        let mut t = SweepTemplate::new(self.params, self.geometry.spacing_wavelengths().unwrap_or(1.0));
        t.interactions = self.interactions;
        t.solver = self.solver.clone();
        t.grid = self.grid;
        Ok(t)
    }

    /// Sweep section, or the default spacing sweep when absent.
    pub fn sweep_or_default(&self) -> SweepConfig {
        self.sweep.clone().unwrap_or(SweepConfig {
            axis: AxisName::Spacing,
            grid: GridSpec::Range {
                scale: GridScale::Log,
                start: self.geometry.unit.from_wavelengths(0.05),
                stop: self.geometry.unit.from_wavelengths(100.0),
                points: 200,
            },
            spectrum: true,
            objective: None,
            refine: false,
            n_values: DEFAULT_N_VALUES.to_vec(),
            extrapolate_to: 1e6,
            wavelength_nm: 795.0,
        })
    }

    /// Canonical TOML text with every default written out.
    pub fn to_toml(&self) -> String {
        let sweep = self.sweep.as_ref().map(|s| {
            let mut r = RawSweep {
                axis: Some(s.axis),
                spectrum: Some(s.spectrum),
                objective: s.objective,
                refine: Some(s.refine),
                n_values: Some(s.n_values.clone()),
                extrapolate_to: Some(s.extrapolate_to),
                wavelength_nm: Some(s.wavelength_nm),
                ..RawSweep::default()
            };
            match &s.grid {
                GridSpec::Values(v) => r.values = Some(v.clone()),
                GridSpec::Range {
                    scale,
                    start,
                    stop,
                    points,
                } => {
                    r.scale = Some(*scale);
                    r.start = Some(*start);
                    r.stop = Some(*stop);
                    r.points = Some(*points);
                }
            }
            r
        });
        let raw = RawConfig {
            mode: self.mode,
            system: RawSystem {
                n_atoms: Some(self.params.n_atoms),
                g: Some(self.params.g),
                kappa: Some(self.params.kappa),
                w: Some(self.params.w),
                delta: Some(self.params.delta),
                interactions: Some(self.interactions),
                gamma_hz: self.gamma_hz,
            },
            geometry: RawGeometry {
                spacing: self.geometry.spacing,
                spacing_unit: Some(self.geometry.unit),
                dipole: Some(self.geometry.dipole),
                positions: self.geometry.positions.clone(),
            },
            sweep,
            solver: RawSolver {
                tolerance: Some(self.solver.tolerance),
                max_newton_iterations: Some(self.solver.max_newton_iterations),
                handoff_residual: Some(self.solver.handoff_residual),
                max_integration_steps: Some(self.solver.max_integration_steps),
                strategy: Some(self.solver.strategy),
            },
            spectrum: RawSpectrum {
                points: Some(self.grid.points),
                half_span_widths: Some(self.grid.half_span_widths),
            },
            oracle: RawOracle {
                photon_cutoff: Some(self.photon_cutoff),
            },
            output: RawOutput {
                prefix: Some(self.prefix.clone()),
            },
        };
        toml::to_string(&raw).expect("config is always representable as TOML")
    }

    /// Canonical config as a JSON value.
    pub fn to_json(&self) -> serde_json::Value {
        let raw: RawConfig = toml::from_str(&self.to_toml()).expect("canonical text parses");
        serde_json::to_value(raw).expect("config is always representable as JSON")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_system_takes_bad_cavity_defaults() {
        let c = parse_config("[system]\n").unwrap();
        assert_eq!(c.params.g, 40.0);
        assert_eq!(c.params.kappa, 1e6);
        assert_eq!(c.params.delta, 0.0);
        assert_eq!(c.params.w, 0.1);
        assert_eq!(c.params.n_atoms, 2);
        assert!(c.interactions);
        assert_eq!(c.solver, SolveOptions::default());
        assert_eq!(c.grid, GridOptions::default());
        assert!(c.sweep.is_none());
    }

    #[test]
    fn negative_kappa_is_named_with_its_line() {
        let e = parse_config("[system]\ng = 40\nkappa = -1\n").unwrap_err();
        match &e {
            Error::Config { line, message } => {
                assert_eq!(*line, 3);
                assert!(message.contains("kappa"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let e = parse_config("[system]\ng = 40\n\n[geometry]\nspacing = 4\nspcaing_unit = \"phase\"\n").unwrap_err();
        match e {
            Error::Config { line, message } => {
                assert_eq!(line, 6);
                assert!(message.contains("spcaing_unit"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_config("[sytem]\n").unwrap_err();
        assert!(e.to_string().contains("sytem"), "{e}");
    }

    #[test]
    fn non_numeric_value_reports_line() {
        let e = parse_config("[system]\n\nw = \"fast\"\n").unwrap_err();
        match e {
            Error::Config { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_point_sweep_is_rejected() {
        let text = "[sweep]\naxis = \"spacing\"\nstart = 0.1\nstop = 10\npoints = 0\n";
        match parse_config(text).unwrap_err() {
            Error::Config { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("points"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = "[sweep]\naxis = \"spacing\"\nvalues = [2.0, 1.0]\n";
        assert!(matches!(parse_config(bad), Err(Error::Config { line: 3, .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let texts = [
            "",
            "mode = \"sweep\"\n[system]\nn_atoms = 3\nw = 2\ngamma_hz = 7500\n[geometry]\nspacing = 4.2\nspacing_unit = \"phase\"\n\
             [sweep]\naxis = \"pump\"\nstart = 0.01\nstop = 1000\npoints = 31\nobjective = \"min_fwhm\"\n[solver]\nstrategy = \"integrate-then-newton\"\n",
            "[geometry]\npositions = [[0, 0, 0], [0.3, 0.1, 0.7]]\ndipole = [0, 1, 1]\n[sweep]\naxis = \"n_atoms\"\nvalues = [1, 2, 3]\n[output]\nprefix = \"x\"\n",
            "[system]\nw = 0.1\ndelta = -3.5\n[sweep]\naxis = \"spacing\"\n",
        ];
        for text in texts {
            let c = parse_config(text).unwrap();
            let emitted = c.to_toml();
            let back = parse_config(&emitted).unwrap();
            assert_eq!(back, c, "{emitted}");
            assert_eq!(back.to_toml(), emitted);
        }
    }

    #[test]
    fn spacing_units_and_geometry() {
        let c = parse_config("[geometry]\nspacing = 4\nspacing_unit = \"phase\"\n").unwrap();
        let s = c.geometry.spacing_wavelengths().unwrap();
        assert!((s - 4.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(c.atom_geometry().unwrap().n_atoms(), 2);
        let p = parse_config("[system]\nn_atoms = 3\n[geometry]\npositions = [[0,0,0],[0,0,1]]\n").unwrap_err();
        assert!(p.to_string().contains("n_atoms"));
        assert!(parse_config("[geometry]\nspacing = 1\npositions = [[0,0,0]]\n").is_err());
        assert!(parse_config("[geometry]\npositions = [[0,0,0],[0,0,0]]\n").is_err());
        assert!(parse_config("[system]\nn_atoms = 2\n").unwrap().couplings().is_err());
        assert!(parse_config("[system]\nn_atoms = 1\n").unwrap().couplings().is_ok());
    }

    #[test]
    fn sweep_axis_defaults_and_conversion() {
        let c = parse_config("[geometry]\nspacing_unit = \"phase\"\n[sweep]\naxis = \"spacing\"\nvalues = [6.283185307179586]\n").unwrap();
        let ax = c.sweep.as_ref().unwrap().axis(c.geometry.unit).unwrap();
        assert!((ax.values[0] - 1.0).abs() < 1e-15);
        let d = parse_config("").unwrap().sweep_or_default().axis(SpacingUnit::Wavelength).unwrap();
        assert_eq!(d, SweepAxis::default_spacing());
        assert!(parse_config("[sweep]\naxis = \"pump\"\n").is_err());
        assert!(parse_config("[sweep]\nstart = 1\n").is_err());
    }

    #[test]
    fn modes_parse() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            let c = parse_config(&format!("mode = \"{m}\"\n")).unwrap();
            assert_eq!(c.mode, Some(m));
        }
        assert!("plot".parse::<Mode>().is_err());
    }
}

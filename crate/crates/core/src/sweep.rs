//! Parameter sweeps over spacing, pump rate or atom number.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cumulant::{find_steady_state, SolveOptions, SystemParams};
use crate::error::{Error, Result};
use crate::kernels::{build_couplings, disable_interactions, equidistant_chain, CouplingMatrices};
use crate::spectrum::{auto_spectrum, build_regression, GridOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Chain spacing in wavelengths.
    Spacing,
    /// Repump rate w.
    Pump,
    NAtoms,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::Spacing => "spacing",
            AxisName::Pump => "pump",
            AxisName::NAtoms => "n_atoms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(name: AxisName, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("sweep", "axis has no grid points"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("sweep", "axis values must be strictly increasing"));
        }
        let positive = match name {
            AxisName::Spacing => values.iter().all(|&v| v > 0.0 && v.is_finite()),
            AxisName::Pump => values.iter().all(|&v| v >= 0.0 && v.is_finite()),
            AxisName::NAtoms => values.iter().all(|&v| v >= 1.0 && v.fract() == 0.0),
        };
        if !positive {
            return Err(Error::param("sweep", format!("invalid {} values", name.as_str())));
        }
        Ok(Self { name, values })
    }

    pub fn linear(name: AxisName, lo: f64, hi: f64, points: usize) -> Result<Self> {
        let values = match points {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect(),
        };
        Self::new(name, values)
    }

    pub fn log(name: AxisName, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::param("sweep", "log axis bounds must be positive"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let values = match points {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..points)
                .map(|i| match i {
                    0 => lo,
                    i if i == points - 1 => hi,
                    _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
                })
                .collect(),
        };
        Self::new(name, values)
    }

    /// 200 log-spaced spacings over `[0.05, 100]` wavelengths.
    pub fn default_spacing() -> Self {
        Self::log(AxisName::Spacing, 0.05, 100.0, 200).expect("valid default axis")
    }
}

/// Fixed parameters of a sweep on an equidistant chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTemplate {
    pub params: SystemParams,
    /// Chain spacing in wavelengths.
    pub spacing: f64,
    /// When false, off-diagonal decay and all shifts are zeroed.
    pub interactions: bool,
    pub solver: SolveOptions,
    pub grid: GridOptions,
}

impl SweepTemplate {
    pub fn new(params: SystemParams, spacing: f64) -> Self {
        Self {
            params,
            spacing,
            interactions: true,
            solver: SolveOptions::default(),
            grid: GridOptions::default(),
        }
    }

    /// Parameters and spacing with `axis` set to `value`.
    pub fn at(&self, axis: AxisName, value: f64) -> (SystemParams, f64) {
        let mut p = self.params;
        let mut spacing = self.spacing;
        match axis {
            AxisName::Spacing => spacing = value,
            AxisName::Pump => p.w = value,
            AxisName::NAtoms => p.n_atoms = value as usize,
        }
        (p, spacing)
    }

    pub fn couplings(&self, n_atoms: usize, spacing: f64) -> Result<CouplingMatrices> {
        let c = build_couplings(&equidistant_chain(n_atoms, spacing)?)?;
        Ok(if self.interactions {
            c
        } else {
            disable_interactions(&c)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub axis_value: f64,
    pub params: SystemParams,
    pub spacing: f64,
    pub photon_number: f64,
    pub populations: Vec<f64>,
    /// Pair coherences for μ < ν in lexicographic order.
    pub pair_coherences: Vec<Complex64>,
    /// NaN when no spectrum was computed.
    pub fwhm: f64,
    pub center: f64,
    pub peak: f64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

impl SweepRecord {
    fn failed(axis_value: f64, params: SystemParams, spacing: f64, err: &Error) -> Self {
        let residual = match err {
            Error::NonConvergence { residual, .. } => *residual,
            _ => f64::NAN,
        };
        Self {
            axis_value,
            params,
            spacing,
            photon_number: f64::NAN,
            populations: vec![f64::NAN; params.n_atoms],
            pair_coherences: Vec::new(),
            fwhm: f64::NAN,
            center: f64::NAN,
            peak: f64::NAN,
            converged: false,
            residual,
            iterations: 0,
            error: Some(err.to_string()),
        }
    }
}

/// Steady state, and optionally the spectrum, at one parameter point.
pub fn evaluate_point(
    template: &SweepTemplate,
    axis: AxisName,
    value: f64,
    compute_spectrum: bool,
) -> SweepRecord {
    let (params, spacing) = template.at(axis, value);
    let attempt = || -> Result<SweepRecord> {
        let couplings = template.couplings(params.n_atoms, spacing)?;
        let sol = find_steady_state(&params, &couplings, &template.solver)?;
        let (mut fwhm, mut center, mut peak) = (f64::NAN, f64::NAN, f64::NAN);
        if compute_spectrum {
            let sys = build_regression(&params, &couplings, &sol)?;
            let (_, ls) = auto_spectrum(&sys, &template.grid)?;
            fwhm = ls.fwhm;
            center = ls.center;
            peak = ls.peak;
        }
        Ok(SweepRecord {
            axis_value: value,
            params,
            spacing,
            photon_number: sol.state.photon_number,
            populations: sol.state.populations.clone(),
            pair_coherences: sol.state.atom_atom.clone(),
            fwhm,
            center,
            peak,
            converged: true,
            residual: sol.residual_norm,
            iterations: sol.iterations,
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| {
        warn!("{} = {value}: {e}", axis.as_str());
        SweepRecord::failed(value, params, spacing, &e)
    })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build()
        .map_err(|e| Error::Numerical(format!("worker pool: {e}")))
}

/// One record per axis value, in axis order. Failed points are kept and
/// flagged; the sweep fails only if no point converges.
pub fn run_sweep(
    template: &SweepTemplate,
    axis: &SweepAxis,
    compute_spectrum: bool,
    jobs: Option<usize>,
) -> Result<Vec<SweepRecord>> {
    template.params.validate()?;
    let records: Vec<SweepRecord> = pool(jobs)?.install(|| {
        axis.values
            .par_iter()
            .map(|&v| evaluate_point(template, axis.name, v, compute_spectrum))
            .collect()
    });
    if records.iter().all(|r| !r.converged) {
        return Err(Error::SweepFailed {
            points: records.len(),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaxPhoton,
    MinFwhm,
}

impl Objective {
    fn score(&self, r: &SweepRecord) -> Option<f64> {
        if !r.converged {
            return None;
        }
        let v = match self {
            Objective::MaxPhoton => r.photon_number,
            Objective::MinFwhm => -r.fwhm,
        };
        v.is_finite().then_some(v)
    }

    fn value(&self, score: f64) -> f64 {
        match self {
            Objective::MaxPhoton => score,
            Objective::MinFwhm => -score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub axis_value: f64,
    pub objective: f64,
    /// False when the grid extremum sits on the first or last point.
    pub interior: bool,
    pub refined: bool,
    /// Bracketing grid interval.
    pub bracket: (f64, f64),
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Grid extremum of `objective`, refined by golden-section search inside the
/// neighbouring grid interval when `refine` is set and the extremum is
/// interior. Refinement works in log coordinates for positive axes.
pub fn locate_optimum(
    template: &SweepTemplate,
    axis: AxisName,
    records: &[SweepRecord],
    objective: Objective,
    refine: bool,
) -> Result<Optimum> {
    let scored: Vec<(usize, f64)> = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| objective.score(r).map(|s| (i, s)))
        .collect();
    let &(best_i, best_s) = scored
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::SweepFailed {
            points: records.len(),
        })?;
    let pos = scored.iter().position(|&(i, _)| i == best_i).unwrap();
    let interior = pos > 0 && pos + 1 < scored.len();
    let x = |k: usize| records[scored[k].0].axis_value;
    let bracket = if interior {
        (x(pos - 1), x(pos + 1))
    } else {
        (x(pos), x(pos))
    };
    let grid_opt = Optimum {
        axis_value: records[best_i].axis_value,
        objective: objective.value(best_s),
        interior,
        refined: false,
        bracket,
    };
    if !refine || !interior || axis == AxisName::NAtoms {
        return Ok(grid_opt);
    }

    let log_axis = bracket.0 > 0.0;
    let (to, from): (fn(f64) -> f64, fn(f64) -> f64) = if log_axis {
        (f64::ln, f64::exp)
    } else {
        (|v| v, |v| v)
    };
    let probe = |u: f64| -> Option<f64> {
        let v = from(u).clamp(bracket.0, bracket.1);
        let rec = evaluate_point(template, axis, v, objective == Objective::MinFwhm);
        objective.score(&rec)
    };
    let (mut a, mut b) = (to(bracket.0), to(bracket.1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (Some(mut fc), Some(mut fd)) = (probe(c), probe(d)) else {
        warn!("refinement probe failed; keeping grid optimum");
        return Ok(grid_opt);
    };
    // relative tolerance 1e-3 in the axis value
    let tol = if log_axis {
        1e-3
    } else {
        1e-3 * bracket.0.abs().max(bracket.1.abs())
    };
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            match probe(c) {
                Some(v) => fc = v,
                None => break,
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            match probe(d) {
                Some(v) => fd = v,
                None => break,
            }
        }
    }
    let (u, s) = if fc >= fd { (c, fc) } else { (d, fd) };
    if s < best_s {
        return Ok(grid_opt);
    }
    Ok(Optimum {
        axis_value: from(u).clamp(bracket.0, bracket.1),
        objective: objective.value(s),
        interior: true,
        refined: true,
        bracket,
    })
}

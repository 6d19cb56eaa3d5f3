//! Power-law fits in N, extrapolation, density conversion and the
//! three-atom coherence decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{locate_optimum, run_sweep, AxisName, Objective, Optimum, SweepAxis, SweepTemplate};

/// `value ≈ prefactor · N^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// Fitted value at N = 1.
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln N, ln value)`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::param("points", "a power-law fit needs at least 3 points"));
    }
    if let Some(&(n, v)) = points.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return Err(Error::param("points", format!("non-positive point ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("points", "all N values are equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
    })
}

pub const EXTRAPOLATION_NOTE: &str =
    "power-law extrapolation beyond the fitted range; arithmetic only, no physical claim";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub n_target: f64,
    pub value: f64,
    pub note: String,
}

pub fn extrapolate(fit: &ScalingFit, n_target: f64) -> Extrapolation {
    Extrapolation {
        n_target,
        value: fit.prefactor * n_target.powf(fit.exponent),
        note: EXTRAPOLATION_NOTE.to_string(),
    }
}

/// Simple-cubic density `(spacing · λ)⁻³` in atoms per cm³.
pub fn density_from_spacing(spacing: f64, wavelength_nm: f64) -> Result<f64> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::param("spacing", "must be positive"));
    }
    if !(wavelength_nm > 0.0 && wavelength_nm.is_finite()) {
        return Err(Error::param("wavelength_nm", "must be positive"));
    }
    let cell_cm = spacing * wavelength_nm * 1e-7;
    Ok(cell_cm.powi(-3))
}

/// Optimum for one atom number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_atoms: usize,
    pub optimum: Optimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub objective: Objective,
    pub points: Vec<ScalingPoint>,
    pub fit: ScalingFit,
}

/// Optimum of `objective` over the spacing axis for each atom number, and a
/// power-law fit of the optimal values.
pub fn scaling_study(
    template: &SweepTemplate,
    n_values: &[usize],
    spacings: &SweepAxis,
    objective: Objective,
    refine: bool,
    jobs: Option<usize>,
) -> Result<ScalingStudy> {
    if spacings.name != AxisName::Spacing {
        return Err(Error::param("sweep", "scaling needs a spacing axis"));
    }
    let mut points = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let mut t = template.clone();
        t.params.n_atoms = n;
        let recs = run_sweep(&t, spacings, objective == Objective::MinFwhm, jobs)?;
        let optimum = locate_optimum(&t, AxisName::Spacing, &recs, objective, refine)?;
        points.push(ScalingPoint { n_atoms: n, optimum });
    }
    let fit = power_law_fit(
        &points
            .iter()
            .map(|p| (p.n_atoms as f64, p.optimum.objective))
            .collect::<Vec<_>>(),
    )?;
    Ok(ScalingStudy {
        objective,
        points,
        fit,
    })
}

/// Real parts of the three pair coherences of a 3-atom chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub spacing: f64,
    pub x12: f64,
    pub x23: f64,
    pub x13: f64,
    pub sum: f64,
    pub three_nearest: f64,
    pub converged: bool,
}

impl CoherenceRow {
    /// `|sum − 3·x12| / |3·x12|`.
    pub fn relative_gap(&self) -> f64 {
        ((self.sum - self.three_nearest) / self.three_nearest).abs()
    }
}

pub fn coherence_decomposition(
    template: &SweepTemplate,
    spacings: &SweepAxis,
    jobs: Option<usize>,
) -> Result<Vec<CoherenceRow>> {
    if template.params.n_atoms != 3 {
        return Err(Error::param("n_atoms", "coherence decomposition needs a 3-atom chain"));
    }
    if spacings.name != AxisName::Spacing {
        return Err(Error::param("sweep", "coherence decomposition needs a spacing axis"));
    }
    let recs = run_sweep(template, spacings, false, jobs)?;
    Ok(recs
        .iter()
        .map(|r| {
            let (x12, x13, x23) = if r.converged {
                (r.pair_coherences[0].re, r.pair_coherences[1].re, r.pair_coherences[2].re)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            CoherenceRow {
                spacing: r.spacing,
                x12,
                x23,
                x13,
                sum: x12 + x23 + x13,
                three_nearest: 3.0 * x12,
                converged: r.converged,
            }
        })
        .collect())
}

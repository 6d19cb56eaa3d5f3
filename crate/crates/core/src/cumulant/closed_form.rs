use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CumulantState, SystemParams};
use crate::error::{Error, Result};

/// Resonant single-atom steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub population: f64,
    pub photon_number: f64,
    pub atom_photon: Complex64,
}

impl ClosedForm {
    pub fn to_state(&self) -> CumulantState {
        CumulantState {
            populations: vec![self.population],
            atom_photon: vec![self.atom_photon],
            atom_atom: Vec::new(),
            photon_number: self.photon_number,
        }
    }
}

/// Exact steady state of the single-atom equations at δ = 0 and Γ = 1.
///
/// With `β = g²/(κ(w+κ+Γ))` the photon number is `n = βP/(1 − β(2P−1))` and
/// `P` is the root of `w(1−P) − ΓP − κn(P)`, found by bisection.
pub fn single_atom_closed_form(params: &SystemParams) -> Result<ClosedForm> {
    params.validate()?;
    if params.delta != 0.0 {
        return Err(Error::Unsupported(
            "closed form requires zero cavity detuning".into(),
        ));
    }
    let (g, kappa, w) = (params.g, params.kappa, params.w);
    let gamma = 1.0;
    if kappa == 0.0 {
        return Err(Error::param("kappa", "closed form requires kappa > 0"));
    }
    let total = w + kappa + gamma;
    let beta = g * g / (kappa * total);
    let photons = |p: f64| beta * p / (1.0 - beta * (2.0 * p - 1.0));
    let balance = |p: f64| w * (1.0 - p) - gamma * p - kappa * photons(p);

    if beta == 0.0 {
        return Ok(ClosedForm {
            population: w / (w + gamma),
            photon_number: 0.0,
            atom_photon: Complex64::new(0.0, 0.0),
        });
    }
    // the denominator stays positive below p_max
    let p_max = ((1.0 / beta + 1.0) / 2.0).min(1.0);
    let (mut lo, mut hi) = (0.0_f64, p_max);
    if p_max < 1.0 {
        hi = p_max * (1.0 - 1e-15);
    }
    if balance(lo) <= 0.0 {
        return Ok(ClosedForm {
            population: 0.0,
            photon_number: 0.0,
            atom_photon: Complex64::new(0.0, 0.0),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let p = 0.5 * (lo + hi);
    let n = photons(p);
    Ok(ClosedForm {
        population: p,
        photon_number: n,
        atom_photon: Complex64::new(0.0, g * (n * (2.0 * p - 1.0) + p) / total),
    })
}

//! Linearly implicit Euler relaxation toward a fixed point.
//!
//! Each step solves `(I − hJ) k = h f(y)` and sets `y ← y + k`. The scheme is
//! L-stable, so the κ-scale modes are damped at any step size and the step can
//! grow geometrically once the slow atomic modes are resolved.

use nalgebra::{DMatrix, DVector};

use super::steady::{scaled_residual, solve_equilibrated};
use super::{analytic_jacobian, rhs_packed, CumulantState, SystemParams};
use crate::kernels::CouplingMatrices;

const INITIAL_STEP: f64 = 1e-3;
const MAX_STEP: f64 = 1e14;
const MIN_STEP: f64 = 1e-12;

pub(crate) struct Relaxation {
    pub y: DVector<f64>,
    pub residual: f64,
    pub steps: usize,
    pub reached: bool,
}

fn admissible(n: usize, y: &DVector<f64>) -> bool {
    if y.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let pops_ok = y.iter().take(n).all(|&p| (-1e-3..=1.0 + 1e-3).contains(&p));
    pops_ok && y[y.len() - 1] >= -1e-3
}

pub(crate) fn relax(
    y0: DVector<f64>,
    params: &SystemParams,
    couplings: &CouplingMatrices,
    target: f64,
    max_steps: usize,
) -> Relaxation {
    let n = params.n_atoms;
    let dim = y0.len();
    let mut y = y0;
    let mut h = INITIAL_STEP;
    let mut steps = 0;
    let mut f = match rhs_packed(y.as_slice(), params, couplings) {
        Ok(f) => f,
        Err(_) => {
            return Relaxation {
                y,
                residual: f64::INFINITY,
                steps,
                reached: false,
            }
        }
    };
    let mut residual = scaled_residual(&y, &f);

    while steps < max_steps && residual > target && h >= MIN_STEP {
        steps += 1;
        let state = match CumulantState::unpack(n, y.as_slice()) {
            Ok(s) => s,
            Err(_) => break,
        };
        let jac = match analytic_jacobian(&state, params, couplings) {
            Ok(j) => j,
            Err(_) => break,
        };
        let lhs = DMatrix::<f64>::identity(dim, dim) - &jac * h;
        let trial = solve_equilibrated(lhs, &f * h).map(|k| &y + k);
        match trial {
            Some(y_new) if admissible(n, &y_new) => {
                let Ok(f_new) = rhs_packed(y_new.as_slice(), params, couplings) else {
                    h /= 4.0;
                    continue;
                };
                if f_new.iter().any(|v| !v.is_finite()) {
                    h /= 4.0;
                    continue;
                }
                y = y_new;
                f = f_new;
                residual = scaled_residual(&y, &f);
                h = (h * 2.0).min(MAX_STEP);
            }
            _ => h /= 4.0,
        }
    }
    Relaxation {
        y,
        residual,
        steps,
        reached: residual <= target,
    }
}

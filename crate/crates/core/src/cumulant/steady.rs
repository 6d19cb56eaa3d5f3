use log::debug;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::integrate::relax;
use super::{analytic_jacobian, rhs_packed, single_atom_closed_form, CumulantState, SystemParams};
use crate::error::{Error, Result};
use crate::kernels::CouplingMatrices;

/// Which path produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Newton,
    IntegrateThenNewton,
    IntegrateOnly,
}

/// Which path to attempt first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStrategy {
    /// Newton, falling back to relaxation on stagnation.
    #[default]
    Auto,
    IntegrateThenNewton,
    IntegrateOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Bound on `max |f_i| / (1 + |y_i|)`.
    pub tolerance: f64,
    pub max_newton_iterations: usize,
    /// Residual at which relaxation hands over to Newton.
    pub handoff_residual: f64,
    pub max_integration_steps: usize,
    pub strategy: SolveStrategy,
    /// Replaces the default guess when set.
    pub initial_guess: Option<CumulantState>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_newton_iterations: 50,
            handoff_residual: 1e-6,
            max_integration_steps: 5000,
            strategy: SolveStrategy::Auto,
            initial_guess: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateSolution {
    pub state: CumulantState,
    pub residual_norm: f64,
    pub method: SolveMethod,
    /// Newton iterations plus relaxation steps.
    pub iterations: usize,
}

pub(crate) fn scaled_residual(y: &DVector<f64>, f: &DVector<f64>) -> f64 {
    y.iter()
        .zip(f.iter())
        .map(|(yi, fi)| fi.abs() / (1.0 + yi.abs()))
        .fold(0.0, f64::max)
}

fn row_scales(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        a.nrows(),
        a.row_iter().map(|r| {
            let m = r.amax();
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        }),
    )
}

/// Solves `a x = b` after scaling every row to unit max-norm.
pub(crate) fn solve_equilibrated(mut a: DMatrix<f64>, mut b: DVector<f64>) -> Option<DVector<f64>> {
    let s = row_scales(&a);
    for (i, si) in s.iter().enumerate() {
        a.row_mut(i).scale_mut(*si);
        b[i] *= si;
    }
    let x = a.lu().solve(&b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Default guess: pump-ratio populations, no coherences, N single-atom photon numbers.
pub fn default_initial_guess(params: &SystemParams) -> CumulantState {
    let n = params.n_atoms;
    let mut s = CumulantState::zeros(n);
    let p = params.w / (params.w + 1.0);
    s.populations = vec![p; n];
    let single = SystemParams {
        n_atoms: 1,
        delta: 0.0,
        ..*params
    };
    if let Ok(cf) = single_atom_closed_form(&single) {
        s.photon_number = n as f64 * cf.photon_number;
    }
    s
}

struct NewtonOutcome {
    y: DVector<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn newton(
    y0: DVector<f64>,
    params: &SystemParams,
    couplings: &CouplingMatrices,
    opts: &SolveOptions,
) -> Result<NewtonOutcome> {
    let n = params.n_atoms;
    let mut y = y0;
    let mut f = rhs_packed(y.as_slice(), params, couplings)?;
    let mut residual = scaled_residual(&y, &f);
    let mut it = 0;
    while residual > opts.tolerance && it < opts.max_newton_iterations {
        if !residual.is_finite() {
            break;
        }
        it += 1;
        let state = CumulantState::unpack(n, y.as_slice())?;
        let jac = analytic_jacobian(&state, params, couplings)?;
        let w = row_scales(&jac);
        let Some(step) = solve_equilibrated(jac, -&f) else {
            debug!("newton: singular jacobian at iteration {it}");
            break;
        };
        let merit = |f: &DVector<f64>| f.component_mul(&w).norm_squared();
        let m0 = merit(&f);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= 1e-10 {
            let y_try = &y + &step * alpha;
            if let Ok(f_try) = rhs_packed(y_try.as_slice(), params, couplings) {
                let m = merit(&f_try);
                if m.is_finite() && m <= (1.0 - 2e-4 * alpha) * m0 {
                    accepted = Some((y_try, f_try));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((y_new, f_new)) = accepted else {
            debug!("newton: line search stalled at residual {residual:e}");
            break;
        };
        y = y_new;
        f = f_new;
        residual = scaled_residual(&y, &f);
    }
    Ok(NewtonOutcome {
        converged: residual <= opts.tolerance,
        y,
        residual,
        iterations: it,
    })
}

fn finish(
    y: DVector<f64>,
    method: SolveMethod,
    iterations: usize,
    params: &SystemParams,
    couplings: &CouplingMatrices,
    opts: &SolveOptions,
) -> Result<SteadyStateSolution> {
    let state = CumulantState::unpack(params.n_atoms, y.as_slice())?;
    // independent re-evaluation of the defect
    let f = super::rhs(&state, params, couplings)?.pack();
    let residual = scaled_residual(&state.pack(), &f);
    if !(residual <= opts.tolerance) {
        return Err(Error::NonConvergence {
            residual,
            iterations,
        });
    }
    state.check_invariants(1e-9)?;
    Ok(SteadyStateSolution {
        state,
        residual_norm: residual,
        method,
        iterations,
    })
}

fn physical(n: usize, y: &DVector<f64>) -> bool {
    CumulantState::unpack(n, y.as_slice())
        .map(|s| s.check_invariants(1e-9).is_ok())
        .unwrap_or(false)
}

/// Steady state of the cumulant equations.
///
/// Newton with a backtracking line search runs from the default guess (or
/// `options.initial_guess`). If it stalls or lands on an unphysical point,
/// the state is relaxed by implicit time stepping until the residual drops
/// below `options.handoff_residual`, and Newton is re-entered.
pub fn find_steady_state(
    params: &SystemParams,
    couplings: &CouplingMatrices,
    options: &SolveOptions,
) -> Result<SteadyStateSolution> {
    params.validate()?;
    if couplings.n_atoms() != params.n_atoms {
        return Err(Error::Dimension {
            expected: params.n_atoms,
            found: couplings.n_atoms(),
        });
    }
    if !params.is_bad_cavity() {
        log::warn!(
            "kappa = {} is not much larger than g = {}; outside the bad-cavity regime",
            params.kappa,
            params.g
        );
    }
    let n = params.n_atoms;
    let guess = match &options.initial_guess {
        Some(s) => {
            if s.n_atoms() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: s.n_atoms(),
                });
            }
            s.clone()
        }
        None => default_initial_guess(params),
    };
    let y0 = guess.pack();
    let mut iterations = 0;
    let mut best = f64::INFINITY;

    if options.strategy == SolveStrategy::Auto {
        let out = newton(y0.clone(), params, couplings, options)?;
        iterations += out.iterations;
        if out.converged && physical(n, &out.y) {
            return finish(out.y, SolveMethod::Newton, iterations, params, couplings, options);
        }
        debug!("newton stalled at residual {:e}; relaxing", out.residual);
        if out.residual.is_finite() {
            best = out.residual;
        }
    }

    let only = options.strategy == SolveStrategy::IntegrateOnly;
    let target = if only {
        options.tolerance
    } else {
        options.handoff_residual
    };
    let relaxed = relax(y0, params, couplings, target, options.max_integration_steps);
    iterations += relaxed.steps;
    best = best.min(relaxed.residual);
    if only {
        if relaxed.reached {
            return finish(relaxed.y, SolveMethod::IntegrateOnly, iterations, params, couplings, options);
        }
    } else if relaxed.reached {
        let out = newton(relaxed.y, params, couplings, options)?;
        iterations += out.iterations;
        if out.converged && physical(n, &out.y) {
            return finish(
                out.y,
                SolveMethod::IntegrateThenNewton,
                iterations,
                params,
                couplings,
                options,
            );
        }
        best = best.min(out.residual);
    }
    Err(Error::NonConvergence {
        residual: best,
        iterations,
    })
}

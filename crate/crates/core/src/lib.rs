//! Steady-state superradiant laser with long-ranged dipole-dipole interaction.
//!
//! N two-level atoms in a lossy single-mode cavity, incoherently repumped,
//! coupled to each other through the photon-mediated collective decay `F`
//! and frequency shift `G`. The crate covers:
//!
//! * [`kernels`]: pairwise `F`/`G` kernels and coupling matrices for a geometry.
//! * [`cumulant`]: second-order cumulant equations of motion and their steady state.
//! * [`spectrum`]: first-order correlation by quantum regression, power spectrum, FWHM.
//! * [`sweep`] and [`scaling`]: parameter sweeps, optima, power-law fits, densities.
//! * [`oracle`]: exact Lindblad master equation for small N, used for validation.
//! * [`config`], [`output`], [`run`]: configuration, serialization and mode dispatch.
//!
//! All rates are in units of the single-atom decay rate Γ (Γ = 1).

pub mod config;
pub mod cumulant;
pub mod error;
pub mod kernels;
pub mod oracle;
pub mod output;
pub mod run;
pub mod scaling;
pub mod spectrum;
pub mod sweep;

pub use cumulant::{
    analytic_jacobian, default_initial_guess, find_steady_state, rhs, single_atom_closed_form, ClosedForm,
    CumulantState, SolveMethod, SolveOptions, SolveStrategy, SteadyStateSolution, SystemParams,
};
pub use error::{Error, Result};
pub use kernels::{
    build_couplings, decay_kernel, disable_interactions, equidistant_chain, shift_kernel,
    AtomGeometry, CouplingMatrices, SpacingUnit,
};
pub use spectrum::{
    auto_spectrum, build_regression, correlation_time_series, lineshape, spectrum_resolvent,
    time_domain_spectrum, GridOptions, LineshapeSummary, RegressionSystem, Spectrum, TimeSeries,
};
pub use config::{parse_config, Mode, RunConfig};
pub use run::{read_config, run, RunOptions, RunOutcome};
pub use scaling::{density_from_spacing, extrapolate, power_law_fit, ScalingFit};
pub use sweep::{locate_optimum, run_sweep, AxisName, Objective, Optimum, SweepAxis, SweepRecord, SweepTemplate};

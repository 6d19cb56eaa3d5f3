//! Cavity emission spectrum from the regression equations.
//!
//! With populations frozen at their steady values the pair
//! `A(t) = ⟨â†(t)â(0)⟩`, `B_μ(t) = ⟨σ̂_μ⁺(t)â(0)⟩` obeys a linear system
//! `ẋ = Mx`, and the spectral density is
//! `S(ν) = π⁻¹ Re ∫₀^∞ A(t) e^{iνt} dt = −π⁻¹ Re[(M + iν)⁻¹ x₀]₀`.

mod lineshape;
mod quadrature;

pub use lineshape::{lineshape, LineshapeSummary};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cumulant::{SteadyStateSolution, SystemParams};
use crate::error::{Error, Result};
use crate::kernels::CouplingMatrices;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Linear generator `M` over `(A, B_1..B_N)` and its initial vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSystem {
    generator: DMatrix<Complex64>,
    initial: DVector<Complex64>,
    eigenvalues: Vec<Complex64>,
}

impl RegressionSystem {
    /// Validates shape and strict stability of `generator`.
    pub fn new(generator: DMatrix<Complex64>, initial: DVector<Complex64>) -> Result<Self> {
        if !generator.is_square() || generator.nrows() != initial.len() || initial.is_empty() {
            return Err(Error::Dimension {
                expected: generator.nrows(),
                found: initial.len(),
            });
        }
        if generator.iter().chain(initial.iter()).any(|z| !z.is_finite()) {
            return Err(Error::Numerical("non-finite regression system".into()));
        }
        let eigenvalues: Vec<Complex64> = generator
            .eigenvalues()
            .ok_or_else(|| Error::Numerical("eigenvalue iteration failed".into()))?
            .iter()
            .copied()
            .collect();
        if let Some((index, &eigenvalue)) = eigenvalues.iter().enumerate().find(|(_, l)| !(l.re < 0.0)) {
            return Err(Error::UnstableMode { index, eigenvalue });
        }
        Ok(Self {
            generator,
            initial,
            eigenvalues,
        })
    }

    pub fn generator(&self) -> &DMatrix<Complex64> {
        &self.generator
    }

    pub fn initial(&self) -> &DVector<Complex64> {
        &self.initial
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// `S(ν)` from one linear solve.
    pub fn density(&self, nu: f64) -> Result<f64> {
        let mut a = self.generator.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += I * nu;
        }
        let y = a
            .lu()
            .solve(&self.initial)
            .filter(|y| y.iter().all(|z| z.is_finite()))
            .ok_or(Error::SingularResolvent { nu })?;
        Ok(-y[0].re / std::f64::consts::PI)
    }

    /// Frequency and width of the mode carrying the most spectral weight.
    pub fn dominant_mode(&self) -> Result<(f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for l in &self.eigenvalues {
            let nu = -l.im;
            let s = self.density(nu)?;
            if best.is_none_or(|(_, _, sb)| s > sb) {
                best = Some((nu, -2.0 * l.re, s));
            }
        }
        let (nu, width, _) = best.expect("at least one mode");
        Ok((nu, width))
    }

    /// Slowest decay rate among the modes.
    pub fn slowest_rate(&self) -> f64 {
        self.eigenvalues.iter().map(|l| -l.re).fold(f64::INFINITY, f64::min)
    }
}

/// Regression system with populations frozen at the steady state.
pub fn build_regression(
    params: &SystemParams,
    couplings: &CouplingMatrices,
    steady: &SteadyStateSolution,
) -> Result<RegressionSystem> {
    let n = params.n_atoms;
    if couplings.n_atoms() != n || steady.state.n_atoms() != n {
        return Err(Error::Dimension {
            expected: n,
            found: steady.state.n_atoms(),
        });
    }
    let (g, kappa, w, delta) = (params.g, params.kappa, params.w, params.delta);
    let p = &steady.state.populations;
    let mut m = DMatrix::from_element(n + 1, n + 1, Complex64::new(0.0, 0.0));
    m[(0, 0)] = I * delta - kappa / 2.0;
    for mu in 0..n {
        m[(0, mu + 1)] = I * g / 2.0;
        m[(mu + 1, 0)] = -I * g / 2.0 * (2.0 * p[mu] - 1.0);
        m[(mu + 1, mu + 1)] = Complex64::new(-(w + couplings.decay[(mu, mu)]) / 2.0, 0.0);
        for nu in (0..n).filter(|&nu| nu != mu) {
            let hbar = Complex64::new(couplings.decay[(mu, nu)], -2.0 * couplings.shift[(mu, nu)]) / 2.0;
            m[(mu + 1, nu + 1)] = -hbar * (1.0 - 2.0 * p[mu]);
        }
    }
    let mut x0 = DVector::from_element(n + 1, Complex64::new(steady.state.photon_number, 0.0));
    for mu in 0..n {
        x0[mu + 1] = steady.state.atom_photon[mu].conj();
    }
    RegressionSystem::new(m, x0)
}

/// How a frequency grid was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub center: f64,
    pub half_span: f64,
    pub points: usize,
    /// Width estimate the span was built from.
    pub width_estimate: f64,
    /// Whether the grid was rebuilt around a measured line.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub nu: Vec<f64>,
    pub s: Vec<f64>,
    pub meta: GridMeta,
}

impl Spectrum {
    pub fn min_density(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Uniform grid of `points` samples over `center ± half_span`.
pub fn uniform_grid(center: f64, half_span: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![center];
    }
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|i| center - half_span + step * i as f64).collect()
}

/// Samples `S(ν)` on an explicit grid.
pub fn spectrum_resolvent(sys: &RegressionSystem, nu_grid: &[f64]) -> Result<Spectrum> {
    let s = nu_grid
        .iter()
        .map(|&nu| sys.density(nu))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = match (nu_grid.first(), nu_grid.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => (0.0, 0.0),
    };
    Ok(Spectrum {
        nu: nu_grid.to_vec(),
        s,
        meta: GridMeta {
            center: 0.5 * (lo + hi),
            half_span: 0.5 * (hi - lo),
            points: nu_grid.len(),
            width_estimate: 0.0,
            refined: false,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub points: usize,
    /// Half-span in units of the width estimate.
    pub half_span_widths: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            points: 4001,
            half_span_widths: 20.0,
        }
    }
}

/// Spectrum on an automatically placed grid, plus its lineshape.
///
/// The first grid is centered on the dominant mode. It is widened until both
/// half-maximum crossings are inside, then rebuilt around the measured line.
pub fn auto_spectrum(sys: &RegressionSystem, opts: &GridOptions) -> Result<(Spectrum, LineshapeSummary)> {
    if opts.points < 5 || !(opts.half_span_widths > 0.0) {
        return Err(Error::param("grid", "needs at least 5 points and a positive span"));
    }
    let (center, width) = sys.dominant_mode()?;
    let mut half_span = opts.half_span_widths * width.max(f64::MIN_POSITIVE.sqrt());
    let density = |nu: f64| sys.density(nu);
    let mut attempt = 0;
    let summary = loop {
        let grid = uniform_grid(center, half_span, opts.points);
        let spec = spectrum_resolvent(sys, &grid)?;
        match lineshape(&spec, density) {
            Ok(s) => break s,
            Err(Error::NotBracketed { .. }) if attempt < 8 => {
                attempt += 1;
                half_span *= 4.0;
            }
            Err(e) => return Err(e),
        }
    };
    let half_span = opts.half_span_widths * summary.fwhm;
    let grid = uniform_grid(summary.center, half_span, opts.points);
    let mut spec = spectrum_resolvent(sys, &grid)?;
    spec.meta = GridMeta {
        center: summary.center,
        half_span,
        points: opts.points,
        width_estimate: width,
        refined: true,
    };
    let summary = lineshape(&spec, density)?;
    Ok((spec, summary))
}

/// Uniformly sampled `A(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub t: Vec<f64>,
    pub a: Vec<Complex64>,
}

const SERIES_DECAY: f64 = 1e-8;
const MAX_SERIES_LEN: usize = 50_000_000;

/// `A(t) = [e^{Mt} x₀]₀` on `0, dt, 2dt, ..`; `t_max` is extended until
/// `|A| < 1e-8 |A(0)|`.
pub fn correlation_time_series(sys: &RegressionSystem, t_max: f64, dt: f64) -> Result<TimeSeries> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive"));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::param("t_max", "must be non-negative"));
    }
    let prop = (sys.generator() * Complex64::new(dt, 0.0)).exp();
    let a0 = sys.initial()[0].norm();
    let mut x = sys.initial().clone();
    let mut t = vec![0.0];
    let mut a = vec![x[0]];
    let mut k = 0usize;
    let mut tail = 0usize;
    // the decay condition must hold over a full slow period to ignore zero crossings
    let hold = ((1.0 / sys.slowest_rate()) / dt).ceil().clamp(1.0, 1e6) as usize;
    loop {
        let reached_end = (k as f64) * dt >= t_max;
        if reached_end && tail >= hold {
            break;
        }
        if a.len() >= MAX_SERIES_LEN {
            return Err(Error::Numerical(format!(
                "correlation did not decay within {MAX_SERIES_LEN} samples"
            )));
        }
        x = &prop * x;
        k += 1;
        t.push(k as f64 * dt);
        a.push(x[0]);
        let below = x.norm() <= SERIES_DECAY * a0.max(f64::MIN_POSITIVE);
        tail = if below { tail + 1 } else { 0 };
    }
    Ok(TimeSeries { dt, t, a })
}

/// `π⁻¹ Re ∫ A(t) e^{iνt} dt` by the trapezoid rule with end corrections.
pub fn series_density(sys: &RegressionSystem, series: &TimeSeries, nu: f64) -> f64 {
    let dt = series.dt;
    let mut acc = Complex64::new(0.0, 0.0);
    let last = series.a.len() - 1;
    for (k, (t, a)) in series.t.iter().zip(&series.a).enumerate() {
        let wgt = if k == 0 || k == last { 0.5 } else { 1.0 };
        acc += a * Complex64::from_polar(1.0, nu * t) * wgt;
    }
    acc *= dt;
    // f'(0) from the generator; f'(T) is negligible after the decay
    let da0 = (sys.generator() * sys.initial())[0] + I * nu * sys.initial()[0];
    acc += dt * dt / 12.0 * da0;
    acc.re / std::f64::consts::PI
}

/// `S(ν)` by composite Gauss–Legendre quadrature of the propagated
/// correlation, independent of the resolvent.
pub fn time_domain_spectrum(sys: &RegressionSystem, nu: &[f64]) -> Result<Vec<f64>> {
    quadrature::spectrum(sys, nu)
}

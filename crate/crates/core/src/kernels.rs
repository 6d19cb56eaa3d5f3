//! Long-ranged dipole-dipole kernels and coupling matrices.
//!
//! For two atoms at separation `r` with dipole orientation `d̂`, the collective
//! decay and shift in units of Γ are
//!
//! ```text
//! F(ξ) = 3/2 { (1 - c²) sin ξ / ξ + (1 - 3c²) (cos ξ / ξ² - sin ξ / ξ³) }
//! G(ξ) = 3/4 { -(1 - c²) cos ξ / ξ + (1 - 3c²) (sin ξ / ξ² + cos ξ / ξ³) }
//! ```
//!
//! with `ξ = k r` and `c = d̂·r̂`. Positions are stored in units of the transition
//! wavelength λ, so the kernel phase is `2π · r/λ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this phase the decay kernel is evaluated from its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-2;

/// Unit in which a chain spacing is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpacingUnit {
    /// Multiples of the transition wavelength λ.
    #[default]
    Wavelength,
    /// Dimensionless phase ξ = k·r (radians).
    Phase,
}

impl SpacingUnit {
    pub fn to_wavelengths(self, value: f64) -> f64 {
        match self {
            SpacingUnit::Wavelength => value,
            SpacingUnit::Phase => value / (2.0 * PI),
        }
    }

    pub fn from_wavelengths(self, value: f64) -> f64 {
        match self {
            SpacingUnit::Wavelength => value,
            SpacingUnit::Phase => value * 2.0 * PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpacingUnit::Wavelength => "wavelength",
            SpacingUnit::Phase => "phase",
        }
    }
}

/// Atom positions (units of λ) and a common dipole orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomGeometry {
    positions: Vec<Vector3<f64>>,
    dipole: Vector3<f64>,
}

impl AtomGeometry {
    pub fn new(positions: Vec<Vector3<f64>>, dipole: Vector3<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Geometry("at least one atom is required".into()));
        }
        if (dipole.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Geometry(format!(
                "dipole orientation must be a unit vector (norm {})",
                dipole.norm()
            )));
        }
        if positions.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::Geometry("positions must be finite".into()));
        }
        for (i, a) in positions.iter().enumerate() {
            for (j, b) in positions.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= 0.0 {
                    return Err(Error::Geometry(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        Ok(Self { positions, dipole })
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn dipole(&self) -> Vector3<f64> {
        self.dipole
    }

    /// Distance between atoms `i` and `j` in units of λ.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.positions[i] - self.positions[j]).norm()
    }

    /// `(d̂·r̂_ij)²` for the pair `(i, j)`.
    pub fn orientation_cos2(&self, i: usize, j: usize) -> f64 {
        let r = self.positions[i] - self.positions[j];
        let c = self.dipole.dot(&r) / r.norm();
        (c * c).min(1.0)
    }
}

/// Symmetric collective decay (`decay`, F) and shift (`shift`, G) matrices in units of Γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrices {
    pub decay: DMatrix<f64>,
    pub shift: DMatrix<f64>,
    pub gamma: f64,
}

impl CouplingMatrices {
    /// Couplings of `n` independent atoms: `F = Γ·I`, `G = 0`.
    pub fn independent(n: usize) -> Self {
        Self {
            decay: DMatrix::identity(n, n),
            shift: DMatrix::zeros(n, n),
            gamma: 1.0,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.decay.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n_atoms();
        (0..n).all(|i| {
            (0..n).all(|j| {
                (self.decay[(i, j)] - self.decay[(j, i)]).abs() <= tol
                    && (self.shift[(i, j)] - self.shift[(j, i)]).abs() <= tol
            })
        })
    }
}

/// Collective decay kernel F(ξ) in units of Γ. `cos2` is `(d̂·r̂)²`.
///
/// Returns exactly Γ at `xi_rad = 0`.
pub fn decay_kernel(xi_rad: f64, cos2: f64) -> f64 {
    debug_assert!(xi_rad >= 0.0, "negative kernel phase");
    if xi_rad < SERIES_SWITCH {
        decay_kernel_series(xi_rad, cos2)
    } else {
        decay_kernel_direct(xi_rad, cos2)
    }
}

pub(crate) fn decay_kernel_direct(xi: f64, cos2: f64) -> f64 {
    let (s, c) = xi.sin_cos();
    let x2 = xi * xi;
    1.5 * ((1.0 - cos2) * s / xi + (1.0 - 3.0 * cos2) * (c / x2 - s / (x2 * xi)))
}

// sin ξ/ξ           = Σ_k (-1)^k ξ^{2k} / (2k+1)!
// cos ξ/ξ² - sin ξ/ξ³ = Σ_{k≥1} (-1)^k 2k ξ^{2k-2} / (2k+1)!
pub(crate) fn decay_kernel_series(xi: f64, cos2: f64) -> f64 {
    let x2 = xi * xi;
    // s_k = (-1)^k ξ^{2k} / (2k+1)!,  t_k = s_k / ξ² for k ≥ 1
    let mut s = 1.0;
    let mut t = -1.0 / 6.0;
    let mut sinc = 1.0;
    let mut bracket = 0.0;
    for k in 1..16 {
        let kf = k as f64;
        s *= -x2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        sinc += s;
        bracket += 2.0 * kf * t;
        t *= -x2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        if t.abs() < 1e-20 {
            break;
        }
    }
    1.5 * ((1.0 - cos2) * sinc + (1.0 - 3.0 * cos2) * bracket)
}

/// Collective frequency shift kernel G(ξ) in units of Γ.
///
/// Diverges as ξ⁻³; a non-positive phase means coincident atoms.
pub fn shift_kernel(xi_rad: f64, cos2: f64) -> Result<f64> {
    if !(xi_rad > 0.0) {
        return Err(Error::Domain(format!(
            "shift kernel needs a positive phase (got {xi_rad}); atoms coincide"
        )));
    }
    let (s, c) = xi_rad.sin_cos();
    let x2 = xi_rad * xi_rad;
    Ok(0.75 * (-(1.0 - cos2) * c / xi_rad + (1.0 - 3.0 * cos2) * (s / x2 + c / (x2 * xi_rad))))
}

/// Pairwise F and G for every atom pair of `geometry`.
pub fn build_couplings(geometry: &AtomGeometry) -> Result<CouplingMatrices> {
    let n = geometry.n_atoms();
    let mut out = CouplingMatrices::independent(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let xi = 2.0 * PI * geometry.distance(i, j);
            let cos2 = geometry.orientation_cos2(i, j);
            let f = decay_kernel(xi, cos2);
            let g = shift_kernel(xi, cos2)?;
            out.decay[(i, j)] = f;
            out.decay[(j, i)] = f;
            out.shift[(i, j)] = g;
            out.shift[(j, i)] = g;
        }
    }
    Ok(out)
}

/// `n` atoms on the z axis with adjacent spacing `spacing` (λ), dipoles along x.
pub fn equidistant_chain(n: usize, spacing: f64) -> Result<AtomGeometry> {
    if n == 0 {
        return Err(Error::Geometry("a chain needs at least one atom".into()));
    }
    if n > 1 && !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Geometry(format!(
            "chain spacing must be positive and finite (got {spacing})"
        )));
    }
    let positions = (0..n)
        .map(|i| Vector3::new(0.0, 0.0, i as f64 * spacing))
        .collect();
    AtomGeometry::new(positions, Vector3::x())
}

/// Drops all pair couplings, keeping the diagonal decay.
pub fn disable_interactions(c: &CouplingMatrices) -> CouplingMatrices {
    let n = c.n_atoms();
    let mut out = c.clone();
    out.shift.fill(0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.decay[(i, j)] = 0.0;
            }
        }
    }
    out
}

//! Second-order cumulant equations of motion.
//!
//! The closed set of variables (with `⟨â⟩ = ⟨σ̂±⟩ = 0`) is
//!
//! * `P_μ = ⟨σ̂_μ^ee⟩`, N real populations,
//! * `C_μ = ⟨â†σ̂_μ⁻⟩`, N complex atom-photon coherences,
//! * `X_μν = ⟨σ̂_μ⁺σ̂_ν⁻⟩` for μ < ν, N(N-1)/2 complex atom-atom coherences,
//! * `n = ⟨â†â⟩`, the photon number.
//!
//! `X_νμ = conj(X_μν)` is never stored, and `X_μμ` stands for `P_μ` (the
//! self-pair terms in the atom-atom equation reduce to population products).
//!
//! Packed real layout, used by the Jacobian and serialization:
//! `[P_0..P_{N-1}, Re C_0, Im C_0, .., Re X_01, Im X_01, .., n]` with pairs in
//! lexicographic `(μ, ν)` order.

mod closed_form;
mod integrate;
mod steady;

pub use closed_form::{single_atom_closed_form, ClosedForm};
pub use steady::{default_initial_guess, find_steady_state, SolveMethod, SolveOptions, SolveStrategy, SteadyStateSolution};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::CouplingMatrices;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Cavity and pump parameters, all rates in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_atoms: usize,
    /// Atom-cavity coupling g.
    pub g: f64,
    /// Cavity loss κ.
    pub kappa: f64,
    /// Incoherent repump rate w.
    pub w: f64,
    /// Cavity-atom detuning δ = ω_c − ω_a.
    pub delta: f64,
}

impl SystemParams {
    /// Bad-cavity operating point: g = 40Γ, κ = 10⁶Γ, δ = 0.
    pub fn bad_cavity(n_atoms: usize, w: f64) -> Self {
        Self {
            n_atoms,
            g: 40.0,
            kappa: 1e6,
            w,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::param("n_atoms", "at least one atom is required"));
        }
        for (name, v) in [("g", self.g), ("kappa", self.kappa), ("w", self.w)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and >= 0 (got {v})")));
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        Ok(())
    }

    /// κ ≫ g, taken as κ ≥ 10 g.
    pub fn is_bad_cavity(&self) -> bool {
        self.kappa >= 10.0 * self.g
    }
}

/// Number of atom pairs `N(N-1)/2`.
pub fn n_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of the pair `(a, b)`, `a < b`, in lexicographic order.
pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(a, b)` with `a < b`, in storage order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |a| ((a + 1)..n).map(move |b| (a, b)))
}

/// Real dimension of the packed state: `N + 2N + N(N-1) + 1`.
pub fn real_dim(n: usize) -> usize {
    3 * n + 2 * n_pairs(n) + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantState {
    pub populations: Vec<f64>,
    pub atom_photon: Vec<Complex64>,
    pub atom_atom: Vec<Complex64>,
    pub photon_number: f64,
}

impl CumulantState {
    pub fn zeros(n: usize) -> Self {
        Self {
            populations: vec![0.0; n],
            atom_photon: vec![Complex64::new(0.0, 0.0); n],
            atom_atom: vec![Complex64::new(0.0, 0.0); n_pairs(n)],
            photon_number: 0.0,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.populations.len()
    }

    /// `⟨σ̂_a⁺σ̂_b⁻⟩` for any ordered pair; the diagonal is the population.
    pub fn coherence(&self, a: usize, b: usize) -> Complex64 {
        let n = self.n_atoms();
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => Complex64::new(self.populations[a], 0.0),
            std::cmp::Ordering::Less => self.atom_atom[pair_index(n, a, b)],
            std::cmp::Ordering::Greater => self.atom_atom[pair_index(n, b, a)].conj(),
        }
    }

    pub fn pack(&self) -> DVector<f64> {
        let n = self.n_atoms();
        let mut y = DVector::zeros(real_dim(n));
        for (i, p) in self.populations.iter().enumerate() {
            y[i] = *p;
        }
        for (i, c) in self.atom_photon.iter().enumerate() {
            y[n + 2 * i] = c.re;
            y[n + 2 * i + 1] = c.im;
        }
        for (i, x) in self.atom_atom.iter().enumerate() {
            y[3 * n + 2 * i] = x.re;
            y[3 * n + 2 * i + 1] = x.im;
        }
        y[real_dim(n) - 1] = self.photon_number;
        y
    }

    pub fn unpack(n: usize, y: &[f64]) -> Result<Self> {
        if y.len() != real_dim(n) {
            return Err(Error::Dimension {
                expected: real_dim(n),
                found: y.len(),
            });
        }
        Ok(Self {
            populations: y[..n].to_vec(),
            atom_photon: (0..n)
                .map(|i| Complex64::new(y[n + 2 * i], y[n + 2 * i + 1]))
                .collect(),
            atom_atom: (0..n_pairs(n))
                .map(|i| Complex64::new(y[3 * n + 2 * i], y[3 * n + 2 * i + 1]))
                .collect(),
            photon_number: y[real_dim(n) - 1],
        })
    }

    fn check_dims(&self, n: usize) -> Result<()> {
        let ok = self.populations.len() == n
            && self.atom_photon.len() == n
            && self.atom_atom.len() == n_pairs(n);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: n,
                found: self.populations.len(),
            })
        }
    }

    /// Checks the physical bounds within `slack`.
    pub fn check_invariants(&self, slack: f64) -> Result<()> {
        for (i, p) in self.populations.iter().enumerate() {
            if !(*p >= -slack && *p <= 1.0 + slack) {
                return Err(Error::Numerical(format!("population {i} = {p} outside [0, 1]")));
            }
        }
        if !(self.photon_number >= -slack) {
            return Err(Error::Numerical(format!(
                "negative photon number {}",
                self.photon_number
            )));
        }
        for (i, x) in self.atom_atom.iter().enumerate() {
            if !(x.norm() <= 1.0 + slack) {
                return Err(Error::Numerical(format!("pair coherence {i} has modulus {}", x.norm())));
            }
        }
        Ok(())
    }
}

fn check_inputs(params: &SystemParams, couplings: &CouplingMatrices) -> Result<usize> {
    let n = params.n_atoms;
    if couplings.n_atoms() != n {
        return Err(Error::Dimension {
            expected: n,
            found: couplings.n_atoms(),
        });
    }
    Ok(n)
}

/// `(F + 2iG)/2` for the pair `(a, b)`.
#[inline]
fn h(c: &CouplingMatrices, a: usize, b: usize) -> Complex64 {
    Complex64::new(c.decay[(a, b)], 2.0 * c.shift[(a, b)]) * 0.5
}

/// Time derivative of every cumulant variable.
pub fn rhs(
    state: &CumulantState,
    params: &SystemParams,
    couplings: &CouplingMatrices,
) -> Result<CumulantState> {
    let n = check_inputs(params, couplings)?;
    state.check_dims(n)?;
    let (g, kappa, w, delta) = (params.g, params.kappa, params.w, params.delta);
    let p = &state.populations;
    let c = &state.atom_photon;
    let nph = state.photon_number;
    let mut out = CumulantState::zeros(n);

    for mu in 0..n {
        let gam = couplings.decay[(mu, mu)];
        let mut dp = Complex64::new(w * (1.0 - p[mu]) - gam * p[mu], 0.0)
            + I * g / 2.0 * (c[mu] - c[mu].conj());
        let mut drive = Complex64::new(nph * (2.0 * p[mu] - 1.0) + p[mu], 0.0);
        let mut lrdd = Complex64::new(0.0, 0.0);
        for nu in (0..n).filter(|&nu| nu != mu) {
            let hmn = h(couplings, mu, nu);
            dp -= hmn * state.coherence(mu, nu) + hmn.conj() * state.coherence(nu, mu);
            drive += state.coherence(nu, mu);
            lrdd += hmn * c[nu];
        }
        out.populations[mu] = dp.re;
        out.atom_photon[mu] = (I * delta - (w + kappa + gam) / 2.0) * c[mu] + I * g / 2.0 * drive
            - (1.0 - 2.0 * p[mu]) * lrdd;
    }

    for (k, (mu, nu)) in pairs(n).enumerate() {
        let gam = 0.5 * (couplings.decay[(mu, mu)] + couplings.decay[(nu, nu)]);
        let mut dx = -(w + gam) * state.atom_atom[k]
            - I * g / 2.0 * (c[nu] * (2.0 * p[mu] - 1.0) - c[mu].conj() * (2.0 * p[nu] - 1.0));
        let mut s1 = Complex64::new(0.0, 0.0);
        for m in (0..n).filter(|&m| m != nu) {
            s1 += h(couplings, m, nu) * state.coherence(mu, m);
        }
        let mut s2 = Complex64::new(0.0, 0.0);
        for m in (0..n).filter(|&m| m != mu) {
            s2 += h(couplings, mu, m).conj() * state.coherence(m, nu);
        }
        dx -= (1.0 - 2.0 * p[nu]) * s1 + (1.0 - 2.0 * p[mu]) * s2;
        out.atom_atom[k] = dx;
    }

    let mut dn = Complex64::new(-kappa * nph, 0.0);
    for cm in c {
        dn += -I * g / 2.0 * (cm - cm.conj());
    }
    out.photon_number = dn.re;
    Ok(out)
}

/// Packed-coordinate wrapper around [`rhs`].
pub fn rhs_packed(
    y: &[f64],
    params: &SystemParams,
    couplings: &CouplingMatrices,
) -> Result<DVector<f64>> {
    let state = CumulantState::unpack(params.n_atoms, y)?;
    Ok(rhs(&state, params, couplings)?.pack())
}

/// Complex gradient of one equation with respect to the packed real coordinates.
struct Row<'a> {
    n: usize,
    d: Vec<Complex64>,
    state: &'a CumulantState,
}

impl<'a> Row<'a> {
    fn new(state: &'a CumulantState) -> Self {
        let n = state.n_atoms();
        Self {
            n,
            d: vec![Complex64::new(0.0, 0.0); real_dim(n)],
            state,
        }
    }

    fn p(&mut self, mu: usize, k: Complex64) {
        self.d[mu] += k;
    }

    fn nph(&mut self, k: Complex64) {
        let last = self.d.len() - 1;
        self.d[last] += k;
    }

    /// Term `k · C_mu`.
    fn c(&mut self, mu: usize, k: Complex64) {
        self.d[self.n + 2 * mu] += k;
        self.d[self.n + 2 * mu + 1] += k * I;
    }

    /// Term `k · conj(C_mu)`.
    fn c_conj(&mut self, mu: usize, k: Complex64) {
        self.d[self.n + 2 * mu] += k;
        self.d[self.n + 2 * mu + 1] -= k * I;
    }

    /// Term `k · X(a, b)`.
    fn x(&mut self, a: usize, b: usize, k: Complex64) {
        let n = self.n;
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => self.p(a, k),
            std::cmp::Ordering::Less => {
                let j = 3 * n + 2 * pair_index(n, a, b);
                self.d[j] += k;
                self.d[j + 1] += k * I;
            }
            std::cmp::Ordering::Greater => {
                let j = 3 * n + 2 * pair_index(n, b, a);
                self.d[j] += k;
                self.d[j + 1] -= k * I;
            }
        }
    }

    fn coh(&self, a: usize, b: usize) -> Complex64 {
        self.state.coherence(a, b)
    }
}

/// ∂(rhs)/∂(state) in packed real coordinates.
pub fn analytic_jacobian(
    state: &CumulantState,
    params: &SystemParams,
    couplings: &CouplingMatrices,
) -> Result<DMatrix<f64>> {
    let n = check_inputs(params, couplings)?;
    state.check_dims(n)?;
    let dim = real_dim(n);
    let (g, kappa, w, delta) = (params.g, params.kappa, params.w, params.delta);
    let p = &state.populations;
    let c = &state.atom_photon;
    let nph = state.photon_number;
    let one = Complex64::new(1.0, 0.0);
    let mut jac = DMatrix::zeros(dim, dim);

    let put_real = |jac: &mut DMatrix<f64>, i: usize, row: &Row| {
        for (j, v) in row.d.iter().enumerate() {
            jac[(i, j)] = v.re;
        }
    };
    let put_complex = |jac: &mut DMatrix<f64>, i: usize, row: &Row| {
        for (j, v) in row.d.iter().enumerate() {
            jac[(i, j)] = v.re;
            jac[(i + 1, j)] = v.im;
        }
    };

    for mu in 0..n {
        let gam = couplings.decay[(mu, mu)];

        // populations
        let mut row = Row::new(state);
        row.p(mu, -(w + gam) * one);
        row.c(mu, I * g / 2.0);
        row.c_conj(mu, -I * g / 2.0);
        for nu in (0..n).filter(|&nu| nu != mu) {
            let hmn = h(couplings, mu, nu);
            row.x(mu, nu, -hmn);
            row.x(nu, mu, -hmn.conj());
        }
        put_real(&mut jac, mu, &row);

        // atom-photon
        let mut row = Row::new(state);
        row.c(mu, I * delta - (w + kappa + gam) / 2.0);
        row.nph(I * g / 2.0 * (2.0 * p[mu] - 1.0));
        row.p(mu, I * g / 2.0 * (2.0 * nph + 1.0));
        for nu in (0..n).filter(|&nu| nu != mu) {
            let hmn = h(couplings, mu, nu);
            row.x(nu, mu, I * g / 2.0);
            row.c(nu, -(1.0 - 2.0 * p[mu]) * hmn);
            row.p(mu, 2.0 * hmn * c[nu]);
        }
        put_complex(&mut jac, n + 2 * mu, &row);
    }

    for (k, (mu, nu)) in pairs(n).enumerate() {
        let gam = 0.5 * (couplings.decay[(mu, mu)] + couplings.decay[(nu, nu)]);
        let mut row = Row::new(state);
        row.x(mu, nu, -(w + gam) * one);
        // -(ig/2) [C_ν (2P_μ - 1) - conj(C_μ) (2P_ν - 1)]
        row.c(nu, -I * g / 2.0 * (2.0 * p[mu] - 1.0));
        row.p(mu, -I * g * c[nu]);
        row.c_conj(mu, I * g / 2.0 * (2.0 * p[nu] - 1.0));
        row.p(nu, I * g * c[mu].conj());
        // -(1 - 2P_ν) Σ_{m≠ν} h_{mν} X(μ, m)
        for m in (0..n).filter(|&m| m != nu) {
            let hm = h(couplings, m, nu);
            row.x(mu, m, -(1.0 - 2.0 * p[nu]) * hm);
            let xm = row.coh(mu, m);
            row.p(nu, 2.0 * hm * xm);
        }
        // -(1 - 2P_μ) Σ_{m≠μ} conj(h_{μm}) X(m, ν)
        for m in (0..n).filter(|&m| m != mu) {
            let hm = h(couplings, mu, m).conj();
            row.x(m, nu, -(1.0 - 2.0 * p[mu]) * hm);
            let xm = row.coh(m, nu);
            row.p(mu, 2.0 * hm * xm);
        }
        put_complex(&mut jac, 3 * n + 2 * k, &row);
    }

    let mut row = Row::new(state);
    row.nph(-kappa * one);
    for mu in 0..n {
        row.c(mu, -I * g / 2.0);
        row.c_conj(mu, I * g / 2.0);
    }
    put_real(&mut jac, dim - 1, &row);
    Ok(jac)
}

//! Exact Lindblad master equation on a truncated atoms ⊗ Fock space.
//!
//! Superoperators act on column-stacked density matrices, so
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. Single-atom basis is `|g⟩ = 0`, `|e⟩ = 1`
//! and tensor factors are ordered atoms first, photon last.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cumulant::{n_pairs, pair_index, pairs, CumulantState, SystemParams};
use crate::error::{Error, Result};
use crate::kernels::CouplingMatrices;

/// Largest superoperator side length accepted.
pub const SUPEROPERATOR_LIMIT: usize = 10_000;
const MAX_ATOMS: usize = 3;
/// Magnitude below which an exact observable is treated as zero.
const NOISE_FLOOR: f64 = 1e-15;

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedHilbert {
    pub n_atoms: usize,
    /// Highest Fock occupation kept.
    pub photon_cutoff: usize,
}

impl TruncatedHilbert {
    pub fn new(n_atoms: usize, photon_cutoff: usize) -> Result<Self> {
        if n_atoms == 0 || n_atoms > MAX_ATOMS {
            return Err(Error::param("n_atoms", format!("oracle supports 1..={MAX_ATOMS} atoms")));
        }
        if photon_cutoff < 2 {
            return Err(Error::param("photon_cutoff", "must be at least 2"));
        }
        Ok(Self {
            n_atoms,
            photon_cutoff,
        })
    }

    /// Hilbert-space dimension `2^N (n_max + 1)`.
    pub fn dim(&self) -> usize {
        (1 << self.n_atoms) * (self.photon_cutoff + 1)
    }

    pub fn superoperator_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    fn embed(&self, factors: &[CMat]) -> CMat {
        factors
            .iter()
            .skip(1)
            .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
    }

    /// `op` on atom `mu`, identity elsewhere.
    fn atom_op(&self, mu: usize, op: &CMat) -> CMat {
        let mut f: Vec<CMat> = (0..self.n_atoms)
            .map(|k| if k == mu { op.clone() } else { CMat::identity(2, 2) })
            .collect();
        f.push(CMat::identity(self.photon_cutoff + 1, self.photon_cutoff + 1));
        self.embed(&f)
    }

    fn lowering(&self, mu: usize) -> CMat {
        let mut s = CMat::zeros(2, 2);
        s[(0, 1)] = c(1.0);
        self.atom_op(mu, &s)
    }

    fn annihilation(&self) -> CMat {
        let m = self.photon_cutoff + 1;
        let mut a = CMat::zeros(m, m);
        for k in 1..m {
            a[(k - 1, k)] = c((k as f64).sqrt());
        }
        let mut f: Vec<CMat> = (0..self.n_atoms).map(|_| CMat::identity(2, 2)).collect();
        f.push(a);
        self.embed(&f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub space: TruncatedHilbert,
    pub matrix: CMat,
}

fn conj_t(a: &CMat) -> CMat {
    a.adjoint()
}

/// `rate/2 (2 L ρ M† − M†L ρ − ρ M†L)` as a superoperator.
fn dissipator(rate: f64, l: &CMat, m: &CMat) -> CMat {
    let d = l.nrows();
    let id = CMat::identity(d, d);
    let md = conj_t(m);
    let mdl = &md * l;
    let jump = m.map(|z| z.conj()).kronecker(l) * c(2.0);
    (jump - id.kronecker(&mdl) - mdl.transpose().kronecker(&id)) * c(0.5 * rate)
}

/// Generator of `dρ/dt` with Hamiltonian
/// `δ a†a + (g/2) Σ (a†σ_μ⁻ + σ_μ⁺a) + Σ_{μ≠ν} G_μν σ_μ⁺σ_ν⁻`, repumping at
/// rate w, cavity loss κ and collective emission with the full decay matrix.
pub fn build_liouvillian(
    params: &SystemParams,
    couplings: &CouplingMatrices,
    space: TruncatedHilbert,
) -> Result<Liouvillian> {
    params.validate()?;
    if params.n_atoms != space.n_atoms || couplings.n_atoms() != space.n_atoms {
        return Err(Error::Dimension {
            expected: space.n_atoms,
            found: couplings.n_atoms(),
        });
    }
    if space.superoperator_dim() > SUPEROPERATOR_LIMIT {
        return Err(Error::DimensionGuard {
            dim: space.superoperator_dim(),
            limit: SUPEROPERATOR_LIMIT,
        });
    }
    let n = space.n_atoms;
    let d = space.dim();
    let id = CMat::identity(d, d);
    let a = space.annihilation();
    let ad = conj_t(&a);
    let lower: Vec<CMat> = (0..n).map(|mu| space.lowering(mu)).collect();
    let raise: Vec<CMat> = lower.iter().map(conj_t).collect();

    let mut h = &ad * &a * c(params.delta);
    for mu in 0..n {
        h += (&ad * &lower[mu] + &raise[mu] * &a) * c(params.g / 2.0);
        for nu in (0..n).filter(|&nu| nu != mu) {
            h += &raise[mu] * &lower[nu] * c(couplings.shift[(mu, nu)]);
        }
    }
    let i = Complex64::new(0.0, 1.0);
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-i);
    l += dissipator(params.kappa, &a, &a);
    for mu in 0..n {
        l += dissipator(params.w, &raise[mu], &raise[mu]);
        for nu in 0..n {
            let f = couplings.decay[(mu, nu)];
            if f != 0.0 {
                l += dissipator(f, &lower[nu], &lower[mu]);
            }
        }
    }
    Ok(Liouvillian { space, matrix: l })
}

impl Liouvillian {
    /// `vec(L[ρ])`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let d = self.space.dim();
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        CMat::from_column_slice(d, d, out.as_slice())
    }
}

/// Validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: TruncatedHilbert,
    rho: CMat,
}

impl DensityMatrix {
    pub fn new(space: TruncatedHilbert, rho: CMat) -> Result<Self> {
        let d = space.dim();
        if rho.shape() != (d, d) {
            return Err(Error::Dimension {
                expected: d,
                found: rho.nrows(),
            });
        }
        let herm = (&rho - rho.adjoint()).camax();
        if herm > 1e-10 {
            return Err(Error::DensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > 1e-10 {
            return Err(Error::DensityMatrix(format!("trace {tr} differs from 1")));
        }
        let sym = (&rho + rho.adjoint()) * c(0.5);
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-8 {
            return Err(Error::DensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { space, rho })
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn space(&self) -> TruncatedHilbert {
        self.space
    }

    fn expect(&self, op: &CMat) -> Complex64 {
        (&self.rho * op).trace()
    }
}

/// Null vector of the Liouvillian with unit trace.
///
/// The equation for `ρ_00` is replaced by the trace condition and the system
/// is solved by fully pivoted LU with two rounds of iterative refinement. A
/// rank deficiency in the bordered system signals a degenerate null space.
pub fn steady_density_matrix(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.space.dim();
    let dd = d * d;
    let mut a = l.matrix.clone();
    for j in 0..dd {
        a[(0, j)] = c(0.0);
    }
    for k in 0..d {
        a[(0, k + k * d)] = c(1.0);
    }
    // row equilibration keeps κ-scale rows from dominating the pivots
    let scales: Vec<f64> = a.row_iter().map(|r| r.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    for (i, s) in scales.iter().enumerate() {
        if *s > 0.0 {
            a.row_mut(i).scale_mut(1.0 / s);
        }
    }
    let mut b = DVector::from_element(dd, c(0.0));
    b[0] = c(1.0 / scales[0]);

    let lu = a.clone().full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..dd).map(|k| u[(k, k)].norm()).collect();
    let umax = diag.iter().copied().fold(0.0, f64::max);
    let deficient = diag.iter().filter(|&&v| v <= 1e-12 * umax).count();
    if deficient > 0 {
        return Err(Error::DegenerateNullSpace {
            dim: deficient + 1,
        });
    }
    let mut x = lu
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular bordered Liouvillian".into()))?;
    for _ in 0..2 {
        let r = &b - &a * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }
    let rho = CMat::from_column_slice(d, d, x.as_slice());
    let rho = (&rho + rho.adjoint()) * c(0.5);
    let rho = &rho / rho.trace();
    let residual = l.apply(&rho).camax() / l.matrix.camax().max(f64::MIN_POSITIVE);
    if residual > 1e-10 {
        return Err(Error::NonConvergence {
            residual,
            iterations: 2,
        });
    }
    DensityMatrix::new(l.space, rho)
}

/// Expectation values matching the cumulant variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub populations: Vec<f64>,
    pub atom_photon: Vec<Complex64>,
    /// `⟨σ_μ⁺σ_ν⁻⟩` for μ < ν.
    pub pair_coherences: Vec<Complex64>,
    pub photon_number: f64,
}

impl Observables {
    pub fn to_state(&self) -> CumulantState {
        CumulantState {
            populations: self.populations.clone(),
            atom_photon: self.atom_photon.clone(),
            atom_atom: self.pair_coherences.clone(),
            photon_number: self.photon_number,
        }
    }
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    let space = rho.space;
    let n = space.n_atoms;
    let a = space.annihilation();
    let ad = a.adjoint();
    let lower: Vec<CMat> = (0..n).map(|mu| space.lowering(mu)).collect();
    let raise: Vec<CMat> = lower.iter().map(|s| s.adjoint()).collect();
    let mut pair_coherences = vec![c(0.0); n_pairs(n)];
    for (mu, nu) in pairs(n) {
        pair_coherences[pair_index(n, mu, nu)] = rho.expect(&(&raise[mu] * &lower[nu]));
    }
    Observables {
        populations: (0..n).map(|mu| rho.expect(&(&raise[mu] * &lower[mu])).re).collect(),
        atom_photon: (0..n).map(|mu| rho.expect(&(&ad * &lower[mu]))).collect(),
        pair_coherences,
        photon_number: rho.expect(&(&ad * &a)).re,
    }
}

/// Exact steady observables at one cutoff.
pub fn exact_steady_observables(
    params: &SystemParams,
    couplings: &CouplingMatrices,
    photon_cutoff: usize,
) -> Result<Observables> {
    let space = TruncatedHilbert::new(params.n_atoms, photon_cutoff)?;
    let l = build_liouvillian(params, couplings, space)?;
    Ok(observables(&steady_density_matrix(&l)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub observable: String,
    pub cumulant: f64,
    pub exact: f64,
    pub absolute_deviation: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub photon_cutoff: usize,
    pub rows: Vec<ComparisonRow>,
    /// Largest relative change between `n_max` and `n_max + 1` over
    /// observables above the noise floor.
    pub cutoff_change: f64,
}

impl ComparisonReport {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.observable == name)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

fn flatten(o: &Observables) -> Vec<(String, f64)> {
    let mut v = Vec::new();
    for (i, p) in o.populations.iter().enumerate() {
        v.push((format!("population_{i}"), *p));
    }
    for (k, x) in o.pair_coherences.iter().enumerate() {
        v.push((format!("pair_coherence_{k}_re"), x.re));
        v.push((format!("pair_coherence_{k}_im"), x.im));
    }
    for (i, x) in o.atom_photon.iter().enumerate() {
        v.push((format!("atom_photon_{i}_im"), x.im));
    }
    v.push(("photon_number".into(), o.photon_number));
    v
}

/// Cumulant vs exact, observable by observable, with a cutoff check.
pub fn compare(
    params: &SystemParams,
    couplings: &CouplingMatrices,
    cumulant: &CumulantState,
    photon_cutoff: usize,
) -> Result<ComparisonReport> {
    let exact = exact_steady_observables(params, couplings, photon_cutoff)?;
    let finer = exact_steady_observables(params, couplings, photon_cutoff + 1)?;
    let cum = Observables {
        populations: cumulant.populations.clone(),
        atom_photon: cumulant.atom_photon.clone(),
        pair_coherences: cumulant.atom_atom.clone(),
        photon_number: cumulant.photon_number,
    };
    let ex = flatten(&exact);
    let cutoff_change = ex
        .iter()
        .zip(flatten(&finer))
        .filter(|((_, a), _)| a.abs() > NOISE_FLOOR)
        .map(|((_, a), (_, b))| rel(b, *a))
        .fold(0.0, f64::max);
    let rows = flatten(&cum)
        .into_iter()
        .zip(ex)
        .map(|((name, cv), (_, xv))| ComparisonRow {
            observable: name,
            cumulant: cv,
            exact: xv,
            absolute_deviation: (cv - xv).abs(),
            relative_deviation: rel(cv, xv),
        })
        .collect();
    Ok(ComparisonReport {
        photon_cutoff,
        rows,
        cutoff_change,
    })
}

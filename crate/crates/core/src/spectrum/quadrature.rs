//! Time-domain route to `S(ν)`.
//!
//! `A(t)` is propagated with matrix exponentials and integrated panel by
//! panel with Gauss–Legendre rules. Panel lengths are capped by the fastest
//! mode still alive, so the κ-scale transient is resolved near `t = 0` and
//! the long tail uses panels set by the slow modes.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};
use num_complex::Complex64;

use super::RegressionSystem;
use crate::error::{Error, Result};

const ORDER: usize = 20;
/// `e^{-42} ≈ 6e-19`.
const DEAD: f64 = 42.0;
const PHASE_PER_PANEL: f64 = 2.0;
const MAX_PANELS: usize = 2_000_000;

/// Nodes and weights on `[-1, 1]` from the Golub–Welsch eigenproblem.
pub(crate) fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

struct PanelRule {
    /// First rows of `exp(M τ_j)` for the node offsets τ_j.
    rows: Vec<RowDVector<Complex64>>,
    offsets: Vec<f64>,
    weights: Vec<f64>,
    step: DMatrix<Complex64>,
}

fn panel_rule(m: &DMatrix<Complex64>, h: f64, nodes: &[f64], weights: &[f64]) -> PanelRule {
    let offsets: Vec<f64> = nodes.iter().map(|x| 0.5 * h * (1.0 + x)).collect();
    let rows = offsets
        .iter()
        .map(|&tau| (m * Complex64::new(tau, 0.0)).exp().row(0).into_owned())
        .collect();
    PanelRule {
        rows,
        offsets,
        weights: weights.iter().map(|w| 0.5 * h * w).collect(),
        step: (m * Complex64::new(h, 0.0)).exp(),
    }
}

pub(crate) fn spectrum(sys: &RegressionSystem, nus: &[f64]) -> Result<Vec<f64>> {
    let m = sys.generator();
    let nu_max = nus.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let modes: Vec<(f64, f64)> = sys.eigenvalues().iter().map(|l| (-l.re, l.norm())).collect();
    let slow = sys.slowest_rate();
    let t_end = DEAD / slow;
    let cap = |t: f64| {
        let fastest = modes
            .iter()
            .filter(|(rate, _)| rate * t < DEAD)
            .map(|(_, size)| *size)
            .fold(0.0_f64, f64::max);
        PHASE_PER_PANEL / (fastest + nu_max + slow)
    };

    let (nodes, weights) = gauss_legendre(ORDER);
    let mut rules: HashMap<u64, PanelRule> = HashMap::new();
    let mut acc = vec![Complex64::new(0.0, 0.0); nus.len()];
    let mut x: DVector<Complex64> = sys.initial().clone();
    let mut t = 0.0;
    let mut h = cap(0.0);
    let mut panels = 0;
    while t < t_end {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Numerical("time-domain quadrature needs too many panels".into()));
        }
        // equal panel lengths share one rule
        let h_key = h.to_bits();
        let rule = rules
            .entry(h_key)
            .or_insert_with(|| panel_rule(m, h, &nodes, &weights));
        for j in 0..ORDER {
            let a = (&rule.rows[j] * &x)[(0, 0)];
            let tj = t + rule.offsets[j];
            for (k, nu) in nus.iter().enumerate() {
                acc[k] += a * Complex64::from_polar(rule.weights[j], nu * tj);
            }
        }
        x = &rule.step * x;
        t += h;
        let next = cap(t);
        h = if next > h { (2.0 * h).min(next) } else { next };
    }
    Ok(acc.iter().map(|z| z.re / std::f64::consts::PI).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for p in 0..(2 * ORDER) {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
            assert!((q - exact).abs() < 1e-13, "degree {p}");
        }
    }
}

use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};

/// Width, position and height of the emission line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeSummary {
    pub fwhm: f64,
    pub center: f64,
    pub peak: f64,
    /// Lower half-maximum crossing.
    pub left: f64,
    /// Upper half-maximum crossing.
    pub right: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let tol = 1e-13 * (b - a).abs().max(f64::MIN_POSITIVE);
    let mut it = 0;
    while (b - a).abs() > tol && it < 200 {
        it += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Root of `f − level` in `[below, above]`, where `f(below) < level ≤ f(above)`.
fn crossing<F: Fn(f64) -> Result<f64>>(f: &F, level: f64, mut below: f64, mut above: f64) -> Result<f64> {
    for _ in 0..300 {
        let mid = 0.5 * (below + above);
        if mid == below || mid == above {
            break;
        }
        if f(mid)? < level {
            below = mid;
        } else {
            above = mid;
        }
    }
    Ok(0.5 * (below + above))
}

/// FWHM, center and peak of the sampled line.
///
/// The peak is taken from the grid argmax, refined by a parabola through its
/// neighbours and then maximized on `density` itself. Half-maximum crossings
/// are bracketed on the grid and bisected on `density`.
pub fn lineshape<F>(spec: &Spectrum, density: F) -> Result<LineshapeSummary>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = spec.nu.len();
    if n < 3 || spec.s.len() != n {
        return Err(Error::Dimension {
            expected: n.max(3),
            found: spec.s.len(),
        });
    }
    let (i, _) = spec
        .s
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
    if i == 0 {
        return Err(Error::NotBracketed { side: "left" });
    }
    if i == n - 1 {
        return Err(Error::NotBracketed { side: "right" });
    }
    let (x0, x1, x2) = (spec.nu[i - 1], spec.nu[i], spec.nu[i + 1]);
    let (y0, y1, y2) = (spec.s[i - 1], spec.s[i], spec.s[i + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    let vertex = if den != 0.0 { (x1 - 0.5 * num / den).clamp(x0, x2) } else { x1 };

    let mut best = (x1, density(x1)?);
    let fv = density(vertex)?;
    if fv > best.1 {
        best = (vertex, fv);
    }
    let polished = golden_max(&density, x0, x2)?;
    if polished.1 > best.1 {
        best = polished;
    }
    let (center, peak) = best;
    if !(peak > 0.0) {
        return Err(Error::Numerical(format!("non-positive spectral peak {peak}")));
    }
    let half = 0.5 * peak;

    let j = (0..i).rev().find(|&k| spec.s[k] < half).ok_or(Error::NotBracketed { side: "left" })?;
    let above = if j + 1 == i { center } else { spec.nu[j + 1] };
    let left = crossing(&density, half, spec.nu[j], above)?;
    let k = (i + 1..n).find(|&k| spec.s[k] < half).ok_or(Error::NotBracketed { side: "right" })?;
    let above = if k - 1 == i { center } else { spec.nu[k - 1] };
    let right = crossing(&density, half, spec.nu[k], above)?;

    Ok(LineshapeSummary {
        fwhm: right - left,
        center,
        peak,
        left,
        right,
    })
}

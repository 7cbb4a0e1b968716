//! Ternary Shannon entropy `h3(u) = -Σ u_k log₂ u_k` and related utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{spectrum, EnsembleParams, Spectrum};

const NEGATIVE_TOL: f64 = 1e-10;
const SUM_TOL: f64 = 1e-10;
const MAJORIZATION_SLACK: f64 = 1e-12;

/// A three-outcome probability distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTriple([f64; 3]);

impl ProbabilityTriple {
    /// Components in `(-1e-10, 0)` are treated as zero.
    pub fn new(u: [f64; 3]) -> Result<Self> {
        if u.iter().any(|v| !v.is_finite() || *v < -NEGATIVE_TOL) {
            return Err(Error::Domain(format!("invalid probability triple {u:?}")));
        }
        let u = u.map(|v| v.max(0.0));
        let total: f64 = u.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Domain(format!("probability triple sums to {total}")));
        }
        Ok(Self(u))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// Components sorted in non-increasing order.
    pub fn sorted_desc(&self) -> [f64; 3] {
        let mut u = self.0;
        u.sort_by(|a, b| b.total_cmp(a));
        u
    }
}

impl From<Spectrum> for ProbabilityTriple {
    fn from(s: Spectrum) -> Self {
        Self(s.as_array())
    }
}

#[inline]
fn plogp(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        u * u.log2()
    }
}

/// Entropy of a triple already known to be a distribution.
#[inline]
pub(crate) fn h3_raw(u: [f64; 3]) -> f64 {
    let h = -(plogp(u[0]) + plogp(u[1]) + plogp(u[2]));
    h.max(0.0)
}

/// Ternary Shannon entropy in bits.
pub fn h3(u: &ProbabilityTriple) -> f64 {
    h3_raw(u.0)
}

/// Von Neumann entropy of the ensemble, i.e. `h3` of its spectrum.
pub fn ensemble_entropy(e: &EnsembleParams) -> Result<f64> {
    Ok(h3_raw(spectrum(e)?.as_array()))
}

fn check_interior(x0: f64, x2: f64) -> Result<f64> {
    let x1 = 1.0 - x0 - x2;
    let inside = |v: f64| v > 0.0 && v < 1.0;
    if !(inside(x0) && inside(x1) && inside(x2)) {
        return Err(Error::Domain(format!(
            "gradient needs an interior point, got ({x0}, {x1}, {x2})"
        )));
    }
    Ok(x1)
}

/// Partial derivatives of `h3(x0, 1 - x0 - x2, x2)` with respect to `x0` and `x2`.
pub fn grad_h3(x0: f64, x2: f64) -> Result<(f64, f64)> {
    let x1 = check_interior(x0, x2)?;
    Ok(((x1 / x0).log2(), (x1 / x2).log2()))
}

/// Hessian of the same two-variable parameterization, in bits.
pub fn hessian_h3(x0: f64, x2: f64) -> Result<[[f64; 2]; 2]> {
    let x1 = check_interior(x0, x2)?;
    let k = std::f64::consts::LOG2_E;
    let off = -k / x1;
    Ok([[off - k / x0, off], [off, off - k / x2]])
}

/// `true` iff `v ≺ u`: the sorted prefix sums of `u` dominate those of `v`
/// and the totals agree.
pub fn majorizes(u: &ProbabilityTriple, v: &ProbabilityTriple) -> bool {
    let (a, b) = (u.sorted_desc(), v.sorted_desc());
    let mut su = 0.0;
    let mut sv = 0.0;
    for k in 0..2 {
        su += a[k];
        sv += b[k];
        if su < sv - MAJORIZATION_SLACK {
            return false;
        }
    }
    let total_u: f64 = a.iter().sum();
    let total_v: f64 = b.iter().sum();
    (total_u - total_v).abs() <= SUM_TOL
}

//! Gauss–Legendre tensor-product integration over the truncated disc
//! `[0, R] × [0, 2π)` in polar coordinates.
//!
//! Integrands are densities against `|y| d|y| dφ`; the Jacobian is folded
//! into the node weights.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::error::{Error, Result};

const MAX_DOUBLINGS: usize = 4;

/// Node counts, truncation radius multiplier and convergence target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_radial: usize,
    pub n_angular: usize,
    pub truncation_sigmas: f64,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_radial: 128,
            n_angular: 128,
            truncation_sigmas: 8.0,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn new(n_radial: usize, n_angular: usize, truncation_sigmas: f64, tolerance: f64) -> Result<Self> {
        let spec = Self {
            n_radial,
            n_angular,
            truncation_sigmas,
            tolerance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 8 || self.n_angular < 8 {
            return Err(Error::Domain(format!(
                "node counts must be >= 8, got {}x{}",
                self.n_radial, self.n_angular
            )));
        }
        if !(self.truncation_sigmas >= 4.0) {
            return Err(Error::Domain(format!(
                "truncation multiplier must be >= 4, got {}",
                self.truncation_sigmas
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        Ok(())
    }

    /// The same spec with both node counts doubled.
    pub fn doubled(&self) -> Self {
        Self {
            n_radial: 2 * self.n_radial,
            n_angular: 2 * self.n_angular,
            ..*self
        }
    }

    /// `R = √η r + truncation_sigmas √(1 + δ)`.
    pub fn truncation_radius(&self, ch: &ChannelModel) -> f64 {
        ch.eta().sqrt() * ch.amplitude() + self.truncation_sigmas * ch.outcome_variance().sqrt()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// A polar node with its full weight (radial × angular × Jacobian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarNode {
    pub radius: f64,
    pub angle: f64,
    pub weight: f64,
}

/// Tensor-product node set over `[0, R] × [0, 2π)` in a fixed order.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    nodes: Vec<PolarNode>,
    radius: f64,
}

impl PolarGrid {
    pub fn new(spec: &QuadratureSpec, radius: f64) -> Result<Self> {
        spec.validate()?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("truncation radius must be > 0, got {radius}")));
        }
        let (rs, rw) = gauss_legendre_interval(spec.n_radial, 0.0, radius);
        let (phis, pw) = gauss_legendre_interval(spec.n_angular, 0.0, TAU);
        let mut nodes = Vec::with_capacity(rs.len() * phis.len());
        for (r, wr) in rs.iter().zip(&rw) {
            for (phi, wp) in phis.iter().zip(&pw) {
                nodes.push(PolarNode {
                    radius: *r,
                    angle: *phi,
                    weight: wr * wp * r,
                });
            }
        }
        Ok(Self { nodes, radius })
    }

    pub fn for_channel(spec: &QuadratureSpec, ch: &ChannelModel) -> Result<Self> {
        Self::new(spec, spec.truncation_radius(ch))
    }

    pub fn nodes(&self) -> &[PolarNode] {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `Σ w f(|y|, φ)` in node order.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for node in &self.nodes {
            let v = f(node.radius, node.angle);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    radius: node.radius,
                    angle: node.angle,
                });
            }
            total += node.weight * v;
        }
        Ok(total)
    }
}

/// `∫₀^R d|y| |y| ∫₀^{2π} dφ f(|y|, φ)` with `R` fixed by the channel.
pub fn integrate_polar(f: impl Fn(f64, f64) -> f64, ch: &ChannelModel, spec: &QuadratureSpec) -> Result<f64> {
    PolarGrid::for_channel(spec, ch)?.integrate(f)
}

/// Doubles the node counts until two successive estimates agree within the
/// spec's tolerance. Returns `(value, |last difference|)`.
pub fn converged_integrate(
    f: impl Fn(f64, f64) -> f64,
    ch: &ChannelModel,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let mut current = *spec;
    let mut previous = integrate_polar(&f, ch, &current)?;
    for doubling in 1..=MAX_DOUBLINGS {
        current = current.doubled();
        let last = integrate_polar(&f, ch, &current)?;
        let diff = (last - previous).abs();
        if diff < spec.tolerance {
            return Ok((last, diff));
        }
        if doubling == MAX_DOUBLINGS {
            return Err(Error::NotConverged { previous, last });
        }
        previous = last;
    }
    unreachable!("loop returns on its last iteration")
}

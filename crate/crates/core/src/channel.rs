//! Lossy bosonic channel seen through the three-state constellation.
//!
//! Signals are coherent states `α_x = r e^{iσ_x}` with `σ = (0, 2π/3, 4π/3)`.
//! Bob's outcome `y ∈ ℂ` is distributed as a circular Gaussian centred at
//! `√η α_x` with variance `(1 + δ)/2` per real coordinate; densities are
//! expressed against the polar measure `|y| d|y| dφ`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `3√3/2`, the phase accumulated per unit `r²` by the equilateral constellation.
pub const TRIANGLE_PHASE_FACTOR: f64 = 2.598_076_211_353_316;

/// One of the three transmitted symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    One,
    Two,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Two];

    pub fn index(self) -> usize {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Two => 2,
        }
    }

    /// Constellation phase `σ_x`.
    pub fn phase(self) -> f64 {
        self.index() as f64 * TAU / 3.0
    }
}

impl TryFrom<usize> for Symbol {
    type Error = Error;

    fn try_from(x: usize) -> Result<Self> {
        Symbol::ALL
            .get(x)
            .copied()
            .ok_or_else(|| Error::Domain(format!("symbol must be 0, 1 or 2, got {x}")))
    }
}

/// A measurement outcome `y = |y| e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    magnitude: f64,
    angle: f64,
}

impl PhasePoint {
    /// The angle is reduced to `[0, 2π)`.
    pub fn new(magnitude: f64, angle: f64) -> Result<Self> {
        if !magnitude.is_finite() || magnitude < 0.0 || !angle.is_finite() {
            return Err(Error::Domain(format!(
                "invalid outcome |y| = {magnitude}, phi = {angle}"
            )));
        }
        let mut angle = angle.rem_euclid(TAU);
        if angle >= TAU {
            angle = 0.0;
        }
        Ok(Self { magnitude, angle })
    }

    pub fn from_complex(y: Complex64) -> Self {
        let (magnitude, angle) = y.to_polar();
        Self::new(magnitude, angle).expect("finite complex number")
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.angle)
    }
}

/// Transmittance, excess noise, signal amplitude and mixedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    eta: f64,
    excess_noise: f64,
    amplitude: f64,
    mixedness: f64,
}

impl ChannelModel {
    pub fn new(eta: f64, excess_noise: f64, amplitude: f64, mixedness: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmittance must lie in [0, 1], got {eta}")));
        }
        if !(excess_noise.is_finite() && excess_noise >= 0.0) {
            return Err(Error::Domain(format!("excess noise must be >= 0, got {excess_noise}")));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::Domain(format!("amplitude must be >= 0, got {amplitude}")));
        }
        if !(mixedness.is_finite() && mixedness >= 0.0) {
            return Err(Error::Domain(format!("mixedness must be >= 0, got {mixedness}")));
        }
        if excess_noise == 0.0 && mixedness != 0.0 {
            return Err(Error::Domain(
                "a pure-loss channel (excess noise 0) has mixedness 0".into(),
            ));
        }
        Ok(Self {
            eta,
            excess_noise,
            amplitude,
            mixedness,
        })
    }

    /// Pure-loss channel.
    pub fn pure_loss(eta: f64, amplitude: f64) -> Result<Self> {
        Self::new(eta, 0.0, amplitude, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn loss(&self) -> f64 {
        1.0 - self.eta
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn mixedness(&self) -> f64 {
        self.mixedness
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.eta, self.excess_noise, amplitude, self.mixedness)
    }

    /// Transmitted signal `α_x`.
    pub fn signal(&self, x: Symbol) -> Complex64 {
        Complex64::from_polar(self.amplitude, x.phase())
    }

    /// `|γ| = e^{-(3/2)(1-η)r²}`, the overlap modulus of the states leaking
    /// to the environment.
    pub fn eve_overlap_modulus(&self) -> f64 {
        (-1.5 * (1.0 - self.eta) * self.amplitude * self.amplitude).exp()
    }

    /// `κ = e^{-(3/2)ηr²}`, the overlap modulus of Bob's fiducial states.
    pub fn bob_overlap_modulus(&self) -> f64 {
        (-1.5 * self.eta * self.amplitude * self.amplitude).exp()
    }

    /// `ϑ_E = r²(3√3/2)(1-η)`.
    pub fn eve_phase(&self) -> f64 {
        TRIANGLE_PHASE_FACTOR * (1.0 - self.eta) * self.amplitude * self.amplitude
    }

    /// `ϑ_B = r²(3√3/2)η`.
    pub fn bob_phase(&self) -> f64 {
        TRIANGLE_PHASE_FACTOR * self.eta * self.amplitude * self.amplitude
    }

    /// `V_x = δ/2`.
    pub fn v_x(&self) -> f64 {
        self.excess_noise / 2.0
    }

    /// Noise variance `1 + δ` of the outcome density.
    pub fn outcome_variance(&self) -> f64 {
        1.0 + self.excess_noise
    }

    /// Exponents `-|y - √η α_x|² / (1 + δ)` for the three symbols.
    #[inline]
    pub(crate) fn exponents(&self, radius: f64, angle: f64) -> [f64; 3] {
        let var = self.outcome_variance();
        let shift = self.eta.sqrt() * self.amplitude;
        let base = radius * radius + shift * shift;
        let cross = 2.0 * radius * shift;
        [0.0, TAU / 3.0, 2.0 * TAU / 3.0].map(|sigma| -(base - cross * (angle - sigma).cos()) / var)
    }

    pub fn p_y_given_x(&self, y: &PhasePoint, x: Symbol) -> f64 {
        let a = self.exponents(y.magnitude, y.angle)[x.index()];
        a.exp() / (PI * self.outcome_variance())
    }

    pub fn p_y(&self, y: &PhasePoint) -> f64 {
        let a = self.exponents(y.magnitude, y.angle);
        a.iter().map(|v| v.exp()).sum::<f64>() / (3.0 * PI * self.outcome_variance())
    }

    /// `p(x|y)` for all three symbols, computed as a softmax of the exponents.
    pub fn posterior(&self, y: &PhasePoint) -> [f64; 3] {
        posterior_from_exponents(self.exponents(y.magnitude, y.angle))
    }

    pub fn p_x_given_y(&self, x: Symbol, y: &PhasePoint) -> f64 {
        self.posterior(y)[x.index()]
    }
}

#[inline]
pub(crate) fn posterior_from_exponents(a: [f64; 3]) -> [f64; 3] {
    let top = a[0].max(a[1]).max(a[2]);
    let w = a.map(|v| (v - top).exp());
    let total = w[0] + w[1] + w[2];
    w.map(|v| v / total)
}

/// Overlap of two coherent states as `(modulus, phase)`.
///
/// The modulus is `e^{-c²/2}` with `c` the phase-space distance; the phase is
/// `-2A` with `A = (1/2) r_i r_j sin(σ_j - σ_i)` the oriented area of the
/// triangle spanned by the origin and the two amplitudes.
pub fn coherent_overlap(r_i: f64, sigma_i: f64, r_j: f64, sigma_j: f64) -> Result<(f64, f64)> {
    if !(r_i >= 0.0 && r_j >= 0.0) {
        return Err(Error::Domain(format!("radii must be >= 0, got {r_i}, {r_j}")));
    }
    let (s, c) = (sigma_j - sigma_i).sin_cos();
    let side_sq = r_i * r_i + r_j * r_j - 2.0 * r_i * r_j * c;
    let area = 0.5 * r_i * r_j * s;
    Ok(((-0.5 * side_sq.max(0.0)).exp(), -2.0 * area))
}

/// Total phase `ϑ = 2A` of three coherent states whose phase-space triangle
/// has sides `c01, c12, c20`, with `A` from Heron's formula.
pub fn triangle_phase(c01: f64, c12: f64, c20: f64) -> Result<f64> {
    let sides = [c01, c12, c20];
    let scale = c01.max(c12).max(c20).max(1.0);
    let tol = 1e-12 * scale;
    if sides.iter().any(|s| !s.is_finite() || *s < 0.0)
        || c01 > c12 + c20 + tol
        || c12 > c01 + c20 + tol
        || c20 > c01 + c12 + tol
    {
        return Err(Error::Geometry(c01, c12, c20));
    }
    let (a, b, c) = (c01 * c01, c12 * c12, c20 * c20);
    let radicand = 4.0 * a * b - (a + b - c).powi(2);
    Ok(2.0 * 0.25 * radicand.max(0.0).sqrt())
}

/// Standalone wrappers mirroring the channel methods.
pub fn eve_overlap_modulus(ch: &ChannelModel) -> f64 {
    ch.eve_overlap_modulus()
}

pub fn eve_phase(ch: &ChannelModel) -> f64 {
    ch.eve_phase()
}

pub fn bob_phase(ch: &ChannelModel) -> f64 {
    ch.bob_phase()
}

pub fn v_x(ch: &ChannelModel) -> f64 {
    ch.v_x()
}

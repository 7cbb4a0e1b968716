//! Eigenvalues of the rank-three pure-state ensemble
//! `ϖ = p0|ψ0⟩⟨ψ0| + p1|ψ1⟩⟨ψ1| + p2|ψ2⟩⟨ψ2|`.
//!
//! With equal overlap moduli `|⟨ψi|ψj⟩| = z` and total overlap phase `ϑ`, the
//! characteristic polynomial reduces to the depressed cubic `t³ + p t + q`
//! with `p = α + βz²`, `q = γ + δz² + εz³`, and the eigenvalues are
//! `x_k = t_k + 1/3` with `t_k` given by the trigonometric (Viète) solution.
//!
//! [`gram_spectrum_oracle`] computes the same eigenvalues from the explicit
//! 3×3 Gram matrix for arbitrary complex overlaps, through numeric traces and
//! bracketed root finding. It shares no code with the trigonometric route.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `p0 + p1 + p2 = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Slack on the validity condition `q ≤ 1/27 + p/3`.
pub const VALIDITY_SLACK: f64 = 1e-12;
/// Largest tolerated positive cubic discriminant `q²/4 + p³/27`.
pub const DISCRIMINANT_TOL: f64 = 1e-12;
/// Eigenvalues in `(-EIGEN_CLAMP, 0)` are rounding and get clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;
/// Relative size below which a discriminant is treated as zero.
const DEGENERACY_RTOL: f64 = 16.0 * f64::EPSILON;

pub(crate) fn check_simplex(probs: &[f64; 3]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Domain(format!(
            "probabilities must be nonnegative, got {probs:?}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Domain(format!(
            "probabilities must sum to 1, got {total}"
        )));
    }
    Ok(())
}

/// Probabilities, common overlap modulus and total overlap phase of a
/// rank-three pure-state ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    probs: [f64; 3],
    z: f64,
    theta: f64,
}

impl EnsembleParams {
    pub fn new(probs: [f64; 3], z: f64, theta: f64) -> Result<Self> {
        check_simplex(&probs)?;
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!("overlap modulus must lie in [0, 1], got {z}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("overlap phase must lie in [0, pi], got {theta}")));
        }
        Ok(Self { probs, z, theta })
    }

    /// Equiprobable ensemble, `p_k = 1/3`.
    pub fn uniform(z: f64, theta: f64) -> Result<Self> {
        Self::new([1.0 / 3.0; 3], z, theta)
    }

    pub fn probs(&self) -> [f64; 3] {
        self.probs
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_z(&self, z: f64) -> Result<Self> {
        Self::new(self.probs, z, self.theta)
    }
}

/// Coefficients of `p(z) = α + βz²` and `q(z) = γ + δz² + εz³`, evaluated at
/// the ensemble's overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepressedCubic {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub p: f64,
    pub q: f64,
}

impl DepressedCubic {
    pub fn from_ensemble(e: &EnsembleParams) -> Self {
        let [p0, p1, p2] = e.probs;
        let e2 = p0 * p1 + p0 * p2 + p1 * p2;
        let e3 = p0 * p1 * p2;
        // (1 - 3Σp²)/6 rewritten as a sum of squares; exact sign on the simplex.
        let alpha = -((p0 - p1).powi(2) + (p1 - p2).powi(2) + (p0 - p2).powi(2)) / 6.0;
        let beta = -e2;
        let gamma = (3.0 * p1 - 1.0) * (3.0 * p2 - 1.0) * (3.0 * p1 + 3.0 * p2 - 2.0) / 27.0;
        let s21 = p0 * p0 * (p1 + p2) + p1 * p1 * (p0 + p2) + p2 * p2 * (p0 + p1);
        let delta = (18.0 * e2 - 27.0 * s21) / 27.0;
        let epsilon = -2.0 * e3 * e.theta.cos();
        Self::with_coefficients(alpha, beta, gamma, delta, epsilon, e.z)
    }

    pub fn with_coefficients(alpha: f64, beta: f64, gamma: f64, delta: f64, epsilon: f64, z: f64) -> Self {
        let z2 = z * z;
        Self {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            p: alpha + beta * z2,
            q: gamma + delta * z2 + epsilon * z2 * z,
        }
    }

    /// Re-evaluates `p` and `q` at a different overlap.
    pub fn at(&self, z: f64) -> Self {
        Self::with_coefficients(self.alpha, self.beta, self.gamma, self.delta, self.epsilon, z)
    }

    /// `q²/4 + p³/27`; nonpositive iff the cubic has three real roots.
    pub fn discriminant(&self) -> f64 {
        self.q * self.q / 4.0 + self.p.powi(3) / 27.0
    }

    /// The argument of the arccos in the trigonometric solution,
    /// `g = (3/2)(q/p)√(-3/p)`, without clamping. `None` when `p = 0`.
    pub fn g(&self) -> Option<f64> {
        if self.p < 0.0 {
            Some(1.5 * self.q / self.p * (-3.0 / self.p).sqrt())
        } else {
            None
        }
    }
}

/// Coefficients `(α, β, γ, δ, ε, p, q)` for an ensemble.
pub fn depressed_coeffs(e: &EnsembleParams) -> DepressedCubic {
    DepressedCubic::from_ensemble(e)
}

/// Real roots of `t³ + p t + q`, ordered `t0 ≥ t1 ≥ t2`.
pub fn trig_roots(p: f64, q: f64) -> Result<[f64; 3]> {
    Ok(trig_roots_flagged(p, q)?.0)
}

/// Roots plus whether the discriminant was within rounding of zero, in which
/// case the repeated root is returned as an exact tie.
fn trig_roots_flagged(p: f64, q: f64) -> Result<([f64; 3], bool)> {
    let discriminant = q * q / 4.0 + p * p * p / 27.0;
    if !p.is_finite() || !q.is_finite() || p > 0.0 || discriminant > DISCRIMINANT_TOL {
        return Err(Error::CubicDomain { p, q, discriminant });
    }
    if p == 0.0 {
        return Ok(([0.0; 3], true));
    }
    let mut g = (1.5 * q / p * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let degenerate = discriminant.abs() <= DEGENERACY_RTOL * (q * q / 4.0 + (p * p * p).abs() / 27.0);
    if degenerate {
        g = if g >= 0.0 { 1.0 } else { -1.0 };
    }
    let angle = g.acos() / 3.0;
    let scale = 2.0 * (-p / 3.0).sqrt();
    let mut t = [0.0; 3];
    for (k, tk) in t.iter_mut().enumerate() {
        *tk = scale * (angle - 2.0 * PI * k as f64 / 3.0).cos();
    }
    if degenerate {
        // cos(±2π/3) differ in the last bit; force the tie.
        let tie = if g > 0.0 { -0.5 * scale } else { 0.5 * scale };
        for tk in t.iter_mut() {
            if (*tk - tie).abs() <= 1e-12 * scale {
                *tk = tie;
            }
        }
    }
    // Analytically ordered already; near-degenerate ties can swap in rounding.
    t.sort_by(|a, b| b.total_cmp(a));
    Ok((t, degenerate))
}

/// Outcome of the validity test `x2 ≥ 0 ⟺ q ≤ 1/27 + p/3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    pub q: f64,
    pub bound: f64,
}

pub fn is_valid(e: &EnsembleParams) -> Validity {
    let cubic = DepressedCubic::from_ensemble(e);
    let bound = 1.0 / 27.0 + cubic.p / 3.0;
    Validity {
        valid: cubic.q <= bound + VALIDITY_SLACK,
        q: cubic.q,
        bound,
    }
}

/// The three eigenvalues of the ensemble density matrix, `x0 ≥ x1 ≥ x2 ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    x: [f64; 3],
}

impl Spectrum {
    /// Sorts, clamps rounding-level negatives to zero and checks the sum.
    pub fn from_unsorted(mut x: [f64; 3]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite eigenvalue in {x:?}")));
        }
        x.sort_by(|a, b| b.total_cmp(a));
        if x[2] < -EIGEN_CLAMP {
            return Err(Error::Domain(format!(
                "smallest eigenvalue {} is negative beyond rounding",
                x[2]
            )));
        }
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = x.iter().sum();
        if (total - 1.0).abs() > EIGEN_CLAMP {
            return Err(Error::Domain(format!("eigenvalues sum to {total}, expected 1")));
        }
        Ok(Self { x })
    }

    pub fn x0(&self) -> f64 {
        self.x[0]
    }

    pub fn x1(&self) -> f64 {
        self.x[1]
    }

    pub fn x2(&self) -> f64 {
        self.x[2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.x
    }
}

/// Eigenvalues `x_k = t_k + 1/3` of a valid cubic, descending.
///
/// The simple root (`t0` when `g ≥ 0`, else `t2`) comes from the
/// trigonometric formula; the remaining pair is recovered from its sum and
/// product, with `1/27 + p/3 - q = x0 x1 x2` supplying the product. Near a
/// double root this keeps the pair accurate to rounding instead of `√ε`.
pub(crate) fn cubic_eigenvalues(cubic: &DepressedCubic) -> Result<[f64; 3]> {
    let (t, degenerate) = trig_roots_flagged(cubic.p, cubic.q)?;
    let third = 1.0 / 3.0;
    if degenerate {
        return Ok(t.map(|v| v + third));
    }
    let pair = |sum: f64, product: f64| {
        let disc = sum * sum / 4.0 - product;
        if disc <= DEGENERACY_RTOL * sum * sum / 4.0 {
            (sum / 2.0, sum / 2.0)
        } else {
            let hi = sum / 2.0 + disc.sqrt();
            (hi, if hi > 0.0 { product / hi } else { sum - hi })
        }
    };
    if cubic.g().unwrap_or(1.0) >= 0.0 {
        let x0 = t[0] + third;
        let det = (1.0 / 27.0 + cubic.p / 3.0 - cubic.q).max(0.0);
        let (x1, x2) = pair(1.0 - x0, det / x0);
        Ok([x0, x1, x2])
    } else {
        let x2 = t[2] + third;
        let sum = 1.0 - x2;
        let (x0, x1) = pair(sum, third + cubic.p - x2 * sum);
        Ok([x0, x1, x2])
    }
}

/// Eigenvalues through the trigonometric solution of the depressed cubic.
pub fn spectrum(e: &EnsembleParams) -> Result<Spectrum> {
    let validity = is_valid(e);
    if !validity.valid {
        return Err(Error::SpectralValidity {
            z: e.z,
            theta: e.theta,
            q: validity.q,
            bound: validity.bound,
        });
    }
    let x = cubic_eigenvalues(&DepressedCubic::from_ensemble(e))?;
    if x[2] < -EIGEN_CLAMP {
        return Err(Error::SpectralValidity {
            z: e.z,
            theta: e.theta,
            q: validity.q,
            bound: validity.bound,
        });
    }
    Spectrum::from_unsorted(x)
}

/// Closed form for the equiprobable ensemble:
/// `x = (1 + 2Z cos(ϑ/3))/3` and `(1 - Z(cos(ϑ/3) ∓ √3 sin(ϑ/3)))/3`.
pub fn spectrum_uniform(z: f64, theta: f64) -> Result<Spectrum> {
    let e = EnsembleParams::uniform(z, theta)?;
    let (s, c) = (theta / 3.0).sin_cos();
    let root3 = 3f64.sqrt();
    let x = [
        (1.0 + 2.0 * z * c) / 3.0,
        (1.0 - z * (c - root3 * s)) / 3.0,
        (1.0 - z * (c + root3 * s)) / 3.0,
    ];
    if x.iter().any(|v| *v < -EIGEN_CLAMP) {
        let validity = is_valid(&e);
        return Err(Error::SpectralValidity {
            z,
            theta,
            q: validity.q,
            bound: validity.bound,
        });
    }
    Spectrum::from_unsorted(x)
}

/// Three complex overlaps `z01 = ⟨ψ0|ψ1⟩`, `z12 = ⟨ψ1|ψ2⟩`, `z20 = ⟨ψ2|ψ0⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOverlaps {
    pub z01: Complex64,
    pub z12: Complex64,
    pub z20: Complex64,
}

impl GeneralOverlaps {
    pub fn new(z01: Complex64, z12: Complex64, z20: Complex64) -> Result<Self> {
        for (name, z) in [("z01", z01), ("z12", z12), ("z20", z20)] {
            let m = z.norm();
            if !m.is_finite() || m > 1.0 + SIMPLEX_TOL {
                return Err(Error::Domain(format!("|{name}| = {m} exceeds 1")));
            }
        }
        Ok(Self { z01, z12, z20 })
    }

    pub fn from_polar(moduli: [f64; 3], phases: [f64; 3]) -> Result<Self> {
        if moduli.iter().any(|m| *m < 0.0) {
            return Err(Error::Domain(format!("negative overlap modulus in {moduli:?}")));
        }
        Self::new(
            Complex64::from_polar(moduli[0], phases[0]),
            Complex64::from_polar(moduli[1], phases[1]),
            Complex64::from_polar(moduli[2], phases[2]),
        )
    }

    /// Equal moduli with the whole phase carried by `z01`.
    pub fn from_uniform(z: f64, theta: f64) -> Result<Self> {
        Self::from_polar([z; 3], [theta, 0.0, 0.0])
    }

    pub fn moduli(&self) -> [f64; 3] {
        [self.z01.norm(), self.z12.norm(), self.z20.norm()]
    }

    /// Argument of `z01 z12 z20`.
    pub fn total_phase(&self) -> f64 {
        (self.z01 * self.z12 * self.z20).arg()
    }

    /// `M_ij = √(p_i p_j) ⟨ψi|ψj⟩`.
    pub fn gram_matrix(&self, probs: &[f64; 3]) -> [[Complex64; 3]; 3] {
        let one = Complex64::new(1.0, 0.0);
        let overlaps = [
            [one, self.z01, self.z20.conj()],
            [self.z01.conj(), one, self.z12],
            [self.z20, self.z12.conj(), one],
        ];
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = overlaps[i][j] * (probs[i] * probs[j]).sqrt();
            }
        }
        m
    }
}

/// `(c, d)` of `x³ - x² + c x + d` for arbitrary overlaps.
pub fn char_coeffs_general(probs: &[f64; 3], ov: &GeneralOverlaps) -> Result<(f64, f64)> {
    check_simplex(probs)?;
    GeneralOverlaps::new(ov.z01, ov.z12, ov.z20)?;
    let [p0, p1, p2] = *probs;
    let [m01, m12, m20] = ov.moduli();
    let (a01, a12, a02) = (m01 * m01, m12 * m12, m20 * m20);
    let sq = p0 * p0 + p1 * p1 + p2 * p2;
    let cube = p0.powi(3) + p1.powi(3) + p2.powi(3);
    let cross = (ov.z01 * ov.z12 * ov.z20).re;

    let c = 0.5 * (1.0 - sq - 2.0 * p0 * p1 * a01 - 2.0 * p1 * p2 * a12 - 2.0 * p0 * p2 * a02);
    let d = (-1.0 + 3.0 * (sq + 2.0 * p0 * p1 * a01 + 2.0 * p0 * p2 * a02 + 2.0 * p1 * p2 * a12)
        - 2.0
            * (cube
                + 3.0 * (p0 * p0 * p1 + p0 * p1 * p1) * a01
                + 3.0 * (p0 * p0 * p2 + p0 * p2 * p2) * a02
                + 3.0 * (p1 * p1 * p2 + p1 * p2 * p2) * a12
                + 3.0 * p0 * p1 * p2 * 2.0 * cross))
        / 6.0;
    Ok((c, d))
}

fn matmul(a: &[[Complex64; 3]; 3], b: &[[Complex64; 3]; 3]) -> [[Complex64; 3]; 3] {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn trace(a: &[[Complex64; 3]; 3]) -> f64 {
    (a[0][0] + a[1][1] + a[2][2]).re
}

/// Safeguarded Newton–bisection for a root of `f` inside `[lo, hi]`.
fn bracketed_root(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // No sign change: a double root sits at the bracket end closest to zero.
        return if flo.abs() < fhi.abs() { lo } else { hi };
    }
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    // Invariant: f(lo) < 0 < f(hi) (lo may be above hi).
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = dfx != 0.0 && newton.is_finite() && (newton - lo) * (newton - hi) < 0.0;
        let next = if inside { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= f64::EPSILON * x.abs().max(1e-300) || (hi - lo).abs() <= 4.0 * f64::EPSILON {
            return next;
        }
        x = next;
    }
    x
}

/// Raw eigenvalues of the Gram matrix (descending, no clamping).
pub fn gram_eigenvalues(probs: &[f64; 3], ov: &GeneralOverlaps) -> Result<[f64; 3]> {
    check_simplex(probs)?;
    let m = ov.gram_matrix(probs);
    let m2 = matmul(&m, &m);
    let m3 = matmul(&m2, &m);
    let (t1, t2, t3) = (trace(&m), trace(&m2), trace(&m3));
    let e1 = t1;
    let e2 = 0.5 * (t1 * t1 - t2);
    let e3 = (t1 * t1 * t1 - 3.0 * t1 * t2 + 2.0 * t3) / 6.0;
    let poly = |x: f64| {
        let value = ((x - e1) * x + e2) * x - e3;
        let slope = (3.0 * x - 2.0 * e1) * x + e2;
        (value, slope)
    };
    // Critical points of the monic cubic separate its three real roots.
    let spread = (e1 * e1 - 3.0 * e2).max(0.0).sqrt();
    let c_lo = (e1 - spread) / 3.0;
    let c_hi = (e1 + spread) / 3.0;
    let mut roots = [
        bracketed_root(poly, c_hi, 2.0),
        bracketed_root(poly, c_lo, c_hi),
        bracketed_root(poly, -1.0, c_lo),
    ];
    roots.sort_by(|a, b| b.total_cmp(a));
    Ok(roots)
}

/// Independent numeric eigenvalues of `M_ij = √(p_i p_j) z_ij`.
pub fn gram_spectrum_oracle(probs: &[f64; 3], ov: &GeneralOverlaps) -> Result<Spectrum> {
    Spectrum::from_unsorted(gram_eigenvalues(probs, ov)?)
}

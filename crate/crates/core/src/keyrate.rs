//! Secret-key-rate lower bound for the three-state protocol, its optimisation
//! over the signal amplitude and the repeaterless (PLOB) comparison.
//!
//! The rate is
//!
//! ```text
//! K = I(X:Y) - H(E|X) - max_{ε̃ ∈ [0, ε]} B(ε̃)
//! B(ε̃) = h3(x((1-ε̃)|γ|, ϑ))
//!        - ∫∫ p(y) h3(x(|γ|, ϑ, p(·|y)))
//!        + Σ_x √((ε̃/3)(1+|γ|)/(1-|γ|)) √(∫∫ p(y) h3(·)² / p(x|y))
//!        + ε̃/(1-|γ|) h3(x(|γ|, ϑ))
//! ```
//!
//! with `ϑ = ϑ_E` unless [`PosteriorPhase::Bob`] is selected for the
//! posterior-resolved terms.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{posterior_from_exponents, ChannelModel};
use crate::entropy::h3_raw;
use crate::error::{Error, Result};
use crate::optimize::{grid_then_golden, linspace, logspace};
use crate::quadrature::{PolarGrid, QuadratureSpec};
use crate::spectrum::{spectrum, EnsembleParams};

const EPS_TILDE_GRID: usize = 64;
const EPS_TILDE_TOL: f64 = 1e-10;
const R_MIN: f64 = 0.01;
const R_MAX: f64 = 2.0;
const R_GRID: usize = 32;
const R_TOL: f64 = 1e-4;
const BOUNDARY_WINDOW: f64 = 1e-3;
const POSTERIOR_FLOOR: f64 = 1e-300;
const PHASE_SLACK: f64 = 1e-12;

/// Which symbols enter the square-root correction sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionSymbols {
    /// `x ∈ {0, 1}`.
    #[default]
    FirstTwo,
    /// `x ∈ {0, 1, 2}`.
    All,
}

/// Phase used in the ensembles resolved by Bob's posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorPhase {
    #[default]
    Eve,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RateOptions {
    pub correction_symbols: CorrectionSymbols,
    pub posterior_phase: PosteriorPhase,
}

/// Constraint on the amplitude search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseCap {
    /// `max(ϑ_E, ϑ_B) ≤ π/2`.
    #[default]
    Both,
    /// `ϑ_E ≤ π/2` only.
    EveOnly,
}

/// What bounds the amplitude search from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperLimit {
    AmplitudeBox,
    EvePhase,
    BobPhase,
}

/// The four summands of the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BracketTerms {
    pub holevo: f64,
    pub posterior_entropy: f64,
    pub correction: f64,
    pub trailing: f64,
}

impl BracketTerms {
    pub fn total(&self) -> f64 {
        self.holevo - self.posterior_entropy + self.correction + self.trailing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub i_xy: f64,
    pub h_e_given_x: f64,
    pub eve_term: f64,
    pub key_rate: f64,
    pub eps_tilde_arg: f64,
    pub terms: BracketTerms,
    pub eta: f64,
    pub delta: f64,
    pub amplitude: f64,
    pub eve_overlap: f64,
    pub theta_e: f64,
    pub theta_b: f64,
}

/// Posterior-resolved integrals, computed once per channel and reused across
/// the `ε̃` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeIntegrals {
    pub i_xy: f64,
    /// `∫∫ p(y) h3(x(|γ|, ϑ, p(·|y)))`.
    pub posterior_entropy: f64,
    /// `∫∫ p(y) h3(·)² / p(x|y)` for each symbol.
    pub correction_moments: [f64; 3],
    /// `∫∫ p(y)` over the truncated disc.
    pub mass: f64,
}

fn rate_domain(ch: &ChannelModel, eps_tilde: f64, reason: String) -> Error {
    Error::RateDomain {
        eta: ch.eta(),
        delta: ch.excess_noise(),
        r: ch.amplitude(),
        eps_tilde,
        reason,
    }
}

fn posterior_phase(ch: &ChannelModel, options: &RateOptions) -> f64 {
    match options.posterior_phase {
        PosteriorPhase::Eve => ch.eve_phase(),
        PosteriorPhase::Bob => ch.bob_phase(),
    }
}

fn check_eve_phase(ch: &ChannelModel) -> Result<()> {
    let theta = ch.eve_phase();
    if theta > FRAC_PI_2 + PHASE_SLACK {
        return Err(rate_domain(
            ch,
            0.0,
            format!("theta_E = {theta} exceeds pi/2"),
        ));
    }
    Ok(())
}

fn ensemble_h3(ch: &ChannelModel, eps_tilde: f64, probs: [f64; 3], z: f64, theta: f64) -> Result<f64> {
    let e = EnsembleParams::new(probs, z, theta)
        .map_err(|err| rate_domain(ch, eps_tilde, format!("z = {z}, theta = {theta}: {err}")))?;
    let s = spectrum(&e).map_err(|err| rate_domain(ch, eps_tilde, format!("z = {z}, theta = {theta}: {err}")))?;
    Ok(h3_raw(s.as_array()))
}

/// `I(X:Y) = log₂3 + ∫∫ p(y) Σ_x p(x|y) log₂ p(x|y)`.
pub fn mutual_info_xy(ch: &ChannelModel, spec: &QuadratureSpec) -> Result<f64> {
    let grid = PolarGrid::for_channel(spec, ch)?;
    let norm = 1.0 / (3.0 * PI * ch.outcome_variance());
    let mut total = 0.0;
    for node in grid.nodes() {
        let a = ch.exponents(node.radius, node.angle);
        let py = norm * (a[0].exp() + a[1].exp() + a[2].exp());
        total += node.weight * py * information_gain(posterior_from_exponents(a));
    }
    if !total.is_finite() {
        return Err(rate_domain(ch, 0.0, "non-finite mutual information".into()));
    }
    Ok(total)
}

/// `log₂3 - H(X|y) = Σ_x p(x|y) log₂(3 p(x|y))`, exactly zero at a uniform
/// posterior.
#[inline]
fn information_gain(post: [f64; 3]) -> f64 {
    post.iter()
        .filter(|v| **v > 0.0)
        .map(|v| v * (3.0 * v).log2())
        .sum::<f64>()
        .max(0.0)
}

/// `H(E|X) = (1+V)log₂(1+V) - V log₂V` with `V = δ/2`.
pub fn h_e_given_x(ch: &ChannelModel) -> f64 {
    h_e_given_x_from_noise(ch.excess_noise())
}

pub fn h_e_given_x_from_noise(delta: f64) -> f64 {
    let v = delta / 2.0;
    if v <= 0.0 {
        return 0.0;
    }
    (1.0 + v) * (1.0 + v).log2() - v * v.log2()
}

/// One pass over the outcome grid collecting every posterior-resolved integral.
pub fn outcome_integrals(ch: &ChannelModel, spec: &QuadratureSpec, options: &RateOptions) -> Result<OutcomeIntegrals> {
    let grid = PolarGrid::for_channel(spec, ch)?;
    let norm = 1.0 / (3.0 * PI * ch.outcome_variance());
    let gamma = ch.eve_overlap_modulus();
    let theta = posterior_phase(ch, options);
    let mut out = OutcomeIntegrals {
        i_xy: 0.0,
        posterior_entropy: 0.0,
        correction_moments: [0.0; 3],
        mass: 0.0,
    };
    for node in grid.nodes() {
        let a = ch.exponents(node.radius, node.angle);
        let wpy = node.weight * norm * (a[0].exp() + a[1].exp() + a[2].exp());
        let post = posterior_from_exponents(a);
        out.mass += wpy;
        out.i_xy += wpy * information_gain(post);
        if wpy == 0.0 {
            continue;
        }
        let probs = [post[0], post[1], (1.0 - post[0] - post[1]).max(0.0)];
        let h = ensemble_h3(ch, 0.0, probs, gamma, theta)?;
        out.posterior_entropy += wpy * h;
        for (m, p) in out.correction_moments.iter_mut().zip(probs) {
            *m += wpy * h * h / p.max(POSTERIOR_FLOOR);
        }
    }
    let values = [out.i_xy, out.posterior_entropy, out.mass];
    if values.iter().chain(&out.correction_moments).any(|v| !v.is_finite()) {
        return Err(rate_domain(ch, 0.0, "non-finite outcome integral".into()));
    }
    Ok(out)
}

/// Bracket summands at `ε̃`, given precomputed outcome integrals.
pub fn bracket_terms(
    ch: &ChannelModel,
    eps_tilde: f64,
    integrals: &OutcomeIntegrals,
    options: &RateOptions,
) -> Result<BracketTerms> {
    if !(eps_tilde >= 0.0 && eps_tilde <= ch.mixedness()) {
        return Err(rate_domain(
            ch,
            eps_tilde,
            format!("eps_tilde must lie in [0, {}]", ch.mixedness()),
        ));
    }
    let gamma = ch.eve_overlap_modulus();
    let theta = ch.eve_phase();
    let uniform = [1.0 / 3.0; 3];
    let holevo = ensemble_h3(ch, eps_tilde, uniform, (1.0 - eps_tilde) * gamma, theta)?;
    let (mut correction, mut trailing) = (0.0, 0.0);
    if eps_tilde > 0.0 && gamma < 1.0 {
        let prefactor = ((eps_tilde / 3.0) * (1.0 + gamma) / (1.0 - gamma)).sqrt();
        let count = match options.correction_symbols {
            CorrectionSymbols::FirstTwo => 2,
            CorrectionSymbols::All => 3,
        };
        correction = prefactor * integrals.correction_moments[..count].iter().map(|m| m.sqrt()).sum::<f64>();
        trailing = eps_tilde / (1.0 - gamma) * ensemble_h3(ch, eps_tilde, uniform, gamma, theta)?;
    }
    Ok(BracketTerms {
        holevo,
        posterior_entropy: integrals.posterior_entropy,
        correction,
        trailing,
    })
}

/// The bracket at `ε̃` with default options.
pub fn eve_bracket(ch: &ChannelModel, eps_tilde: f64, spec: &QuadratureSpec) -> Result<f64> {
    let options = RateOptions::default();
    check_eve_phase(ch)?;
    let integrals = outcome_integrals(ch, spec, &options)?;
    Ok(bracket_terms(ch, eps_tilde, &integrals, &options)?.total())
}

pub fn key_rate(ch: &ChannelModel, spec: &QuadratureSpec) -> Result<RateBreakdown> {
    key_rate_with(ch, spec, &RateOptions::default())
}

pub fn key_rate_with(ch: &ChannelModel, spec: &QuadratureSpec, options: &RateOptions) -> Result<RateBreakdown> {
    check_eve_phase(ch)?;
    let integrals = outcome_integrals(ch, spec, options)?;
    let eps = ch.mixedness();
    let (eps_tilde_arg, eve_term) = if eps == 0.0 {
        (0.0, bracket_terms(ch, 0.0, &integrals, options)?.total())
    } else {
        let grid = linspace(0.0, eps, EPS_TILDE_GRID);
        grid_then_golden(
            |t| Ok(bracket_terms(ch, t, &integrals, options)?.total()),
            &grid,
            EPS_TILDE_TOL * eps,
        )?
    };
    let terms = bracket_terms(ch, eps_tilde_arg, &integrals, options)?;
    let h_ex = h_e_given_x(ch);
    Ok(RateBreakdown {
        i_xy: integrals.i_xy,
        h_e_given_x: h_ex,
        eve_term,
        key_rate: integrals.i_xy - h_ex - eve_term,
        eps_tilde_arg,
        terms,
        eta: ch.eta(),
        delta: ch.excess_noise(),
        amplitude: ch.amplitude(),
        eve_overlap: ch.eve_overlap_modulus(),
        theta_e: ch.eve_phase(),
        theta_b: ch.bob_phase(),
    })
}

/// Largest admissible amplitude under `cap`, and what sets it.
pub fn amplitude_upper_bound(eta: f64, cap: PhaseCap) -> (f64, UpperLimit) {
    let limit = |weight: f64| {
        if weight <= 0.0 {
            f64::INFINITY
        } else {
            (FRAC_PI_2 / (crate::channel::TRIANGLE_PHASE_FACTOR * weight)).sqrt()
        }
    };
    let mut best = (R_MAX, UpperLimit::AmplitudeBox);
    let eve = limit(1.0 - eta);
    if eve < best.0 {
        best = (eve, UpperLimit::EvePhase);
    }
    if cap == PhaseCap::Both {
        let bob = limit(eta);
        if bob < best.0 {
            best = (bob, UpperLimit::BobPhase);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeOptimum {
    pub r_opt: f64,
    pub breakdown: RateBreakdown,
    pub r_upper: f64,
    pub upper_limit: UpperLimit,
    /// The optimum sits within `1e-3` of `r_upper`.
    pub boundary_active: bool,
    pub rate_positive: bool,
}

pub fn optimize_amplitude(
    eta: f64,
    delta: f64,
    eps: f64,
    spec: &QuadratureSpec,
    cap: PhaseCap,
) -> Result<AmplitudeOptimum> {
    optimize_amplitude_with(eta, delta, eps, spec, cap, &RateOptions::default())
}

pub fn optimize_amplitude_with(
    eta: f64,
    delta: f64,
    eps: f64,
    spec: &QuadratureSpec,
    cap: PhaseCap,
    options: &RateOptions,
) -> Result<AmplitudeOptimum> {
    let base = ChannelModel::new(eta, delta, R_MIN, eps)?;
    let (r_upper, upper_limit) = amplitude_upper_bound(eta, cap);
    if r_upper < R_MIN {
        return Err(rate_domain(&base, 0.0, format!("phase cap admits no amplitude >= {R_MIN}")));
    }
    let rate_at = |r: f64| -> Result<f64> { Ok(key_rate_with(&base.with_amplitude(r)?, spec, options)?.key_rate) };
    let grid = logspace(R_MIN, r_upper, R_GRID);
    let (r_opt, _) = grid_then_golden(rate_at, &grid, R_TOL)?;
    let breakdown = key_rate_with(&base.with_amplitude(r_opt)?, spec, options)?;
    Ok(AmplitudeOptimum {
        r_opt,
        breakdown,
        r_upper,
        upper_limit,
        boundary_active: r_upper - r_opt < BOUNDARY_WINDOW,
        rate_positive: breakdown.key_rate > 0.0,
    })
}

/// `-log₂(1-η)`; infinite at `η = 1`.
pub fn plob_bound(eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    if eta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(1.0 - eta).log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub loss: f64,
    pub eta: f64,
    pub delta: f64,
    pub eps: f64,
    pub plob: f64,
    pub result: Result<AmplitudeOptimum>,
}

/// One optimised row per loss value; failures stay in their row.
pub fn rate_curve(loss_grid: &[f64], delta: f64, eps: f64, spec: &QuadratureSpec) -> Vec<CurveRow> {
    rate_curve_with(loss_grid, delta, eps, spec, PhaseCap::default(), &RateOptions::default())
}

pub fn rate_curve_with(
    loss_grid: &[f64],
    delta: f64,
    eps: f64,
    spec: &QuadratureSpec,
    cap: PhaseCap,
    options: &RateOptions,
) -> Vec<CurveRow> {
    loss_grid
        .iter()
        .map(|&loss| {
            let eta = 1.0 - loss;
            let result = if (0.0..1.0).contains(&loss) {
                optimize_amplitude_with(eta, delta, eps, spec, cap, options)
            } else {
                Err(Error::Domain(format!("loss must lie in [0, 1), got {loss}")))
            };
            CurveRow {
                loss,
                eta,
                delta,
                eps,
                plob: plob_bound(eta).unwrap_or(f64::NAN),
                result,
            }
        })
        .collect()
}

/// Smallest loss on the sweep whose optimised rate is `≤ 0`, or `1.0` when
/// every row is positive. Failed rows count as zero rate.
pub fn zero_rate_threshold(rows: &[CurveRow]) -> f64 {
    rows.iter()
        .find(|row| match &row.result {
            Ok(opt) => opt.breakdown.key_rate <= 0.0,
            Err(_) => true,
        })
        .map_or(1.0, |row| row.loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coarse() -> QuadratureSpec {
        QuadratureSpec::new(64, 64, 8.0, 1e-9).unwrap()
    }

    #[test]
    fn plob_values() {
        assert_abs_diff_eq!(plob_bound(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plob_bound(0.75).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(plob_bound(0.0).unwrap(), 0.0);
        assert!(plob_bound(1.0).unwrap().is_infinite());
        assert!(plob_bound(1.5).is_err());
    }

    #[test]
    fn conditional_entropy_closed_form() {
        assert_eq!(h_e_given_x_from_noise(0.0), 0.0);
        assert_abs_diff_eq!(h_e_given_x_from_noise(2.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_amplitude_has_no_information() {
        let ch = ChannelModel::pure_loss(0.5, 0.0).unwrap();
        assert_abs_diff_eq!(mutual_info_xy(&ch, &coarse()).unwrap(), 0.0, epsilon = 1e-12);
        let rate = key_rate(&ch, &coarse()).unwrap();
        assert!(rate.key_rate <= 0.0);
    }

    #[test]
    fn lossless_bracket_collapses() {
        let ch = ChannelModel::pure_loss(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(eve_bracket(&ch, 0.0, &coarse()).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn eve_phase_above_quarter_turn_is_rejected() {
        let ch = ChannelModel::pure_loss(0.1, 1.5).unwrap();
        assert!(matches!(key_rate(&ch, &coarse()), Err(Error::RateDomain { .. })));
    }

    #[test]
    fn breakdown_is_consistent() {
        let ch = ChannelModel::new(0.5, 0.001, 0.5, 0.001).unwrap();
        let b = key_rate(&ch, &coarse()).unwrap();
        assert_eq!(b.key_rate, b.i_xy - b.h_e_given_x - b.eve_term);
        assert_abs_diff_eq!(b.terms.total(), b.eve_term, epsilon = 1e-15);
        assert!(b.eps_tilde_arg >= 0.0 && b.eps_tilde_arg <= 0.001);
    }

    #[test]
    fn upper_bound_limits() {
        let (r, lim) = amplitude_upper_bound(1.0, PhaseCap::EveOnly);
        assert_eq!((r, lim), (R_MAX, UpperLimit::AmplitudeBox));
        let (r, lim) = amplitude_upper_bound(0.5, PhaseCap::Both);
        assert_eq!(lim, UpperLimit::EvePhase);
        assert_abs_diff_eq!(r, (PI / (3.0 * 3f64.sqrt() * 0.5)).sqrt(), epsilon = 1e-14);
        let (_, lim) = amplitude_upper_bound(0.7, PhaseCap::Both);
        assert_eq!(lim, UpperLimit::BobPhase);
    }

    #[test]
    fn threshold_of_all_positive_sweep_is_one() {
        assert_eq!(zero_rate_threshold(&[]), 1.0);
    }
}

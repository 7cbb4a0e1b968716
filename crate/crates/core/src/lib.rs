//! # tpsk-core
//!
//! Asymptotic secret-key-rate lower bound for continuous-variable QKD with
//! three coherent states at 120° (ternary phase-shift keying), homodyne-style
//! detection, collective attacks and reverse reconciliation, evaluated on a
//! simulated lossy bosonic channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectrum`]: eigenvalues of a rank-three pure-state ensemble, both through
//!   the trigonometric solution of the depressed characteristic cubic and
//!   through an independent Gram-matrix oracle.
//! - [`entropy`]: ternary Shannon entropy, its gradient and Hessian, and
//!   majorization.
//! - [`channel`]: coherent-state overlaps, phase-space triangle phases and
//!   the Gaussian outcome model `p(y|x)`, `p(y)`, `p(x|y)`.
//! - [`quadrature`]: Gauss–Legendre tensor-product integration in polar
//!   coordinates.
//! - [`keyrate`]: assembly of the rate bound, optimisation over the signal
//!   amplitude and the repeaterless (PLOB) comparison.
//! - [`lemma_lab`]: randomized numeric certification of the monotonicity and
//!   concavity properties the security argument relies on.
//!
//! Entropies are in bits throughout.

#![forbid(unsafe_code)]

pub mod channel;
pub mod entropy;
pub mod error;
pub mod keyrate;
pub mod lemma_lab;
mod optimize;
pub mod quadrature;
pub mod spectrum;

pub use channel::{ChannelModel, PhasePoint, Symbol};
pub use entropy::{h3, ProbabilityTriple};
pub use error::{Error, Result};
pub use keyrate::{
    key_rate, optimize_amplitude, plob_bound, rate_curve, AmplitudeOptimum, BracketTerms,
    CorrectionSymbols, CurveRow, PhaseCap, PosteriorPhase, RateBreakdown, RateOptions,
};
pub use lemma_lab::{PropertyId, PropertyReport};
pub use quadrature::QuadratureSpec;
pub use spectrum::{DepressedCubic, EnsembleParams, GeneralOverlaps, Spectrum};

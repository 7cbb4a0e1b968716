use thiserror::Error;

/// Errors produced by the rate engine and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectral validity violated at z = {z}, theta = {theta}: q = {q} exceeds 1/27 + p/3 = {bound}")]
    SpectralValidity { z: f64, theta: f64, q: f64, bound: f64 },

    #[error("depressed cubic t^3 + ({p}) t + ({q}) has no three real roots (discriminant {discriminant})")]
    CubicDomain { p: f64, q: f64, discriminant: f64 },

    #[error("triangle inequality violated by sides ({0}, {1}, {2})")]
    Geometry(f64, f64, f64),

    #[error("non-finite integrand value at |y| = {radius}, phi = {angle}")]
    NonFinite { radius: f64, angle: f64 },

    #[error("quadrature did not converge: last two estimates {previous} and {last}")]
    NotConverged { previous: f64, last: f64 },

    #[error("rate undefined at eta = {eta}, delta = {delta}, r = {r}, eps_tilde = {eps_tilde}: {reason}")]
    RateDomain {
        eta: f64,
        delta: f64,
        r: f64,
        eps_tilde: f64,
        reason: String,
    },

    #[error("unknown property id `{0}`")]
    UnknownProperty(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value:e}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("a perfect conductor has no finite permittivity; use the reflection-coefficient limit (r_s = -1, r_p = +1)")]
    PerfectConductorEpsilon,

    #[error("{model} model has a pole at zero frequency; static permittivity is not finite")]
    StaticPole { model: &'static str },

    #[error("surface-mode pole: epsilon = -1 or a vanishing Fresnel denominator at k_par = {k_par:e}, omega = {omega_re:e}{omega_im:+e}i")]
    SurfaceModePole {
        k_par: f64,
        omega_re: f64,
        omega_im: f64,
    },

    #[error("cavity resonance (1 - r^2 e^(2 i kz d) = 0) at k_par = {k_par:e}, omega = {omega_re:e}{omega_im:+e}i")]
    CavityResonance {
        k_par: f64,
        omega_re: f64,
        omega_im: f64,
    },

    #[error("{function}: argument {value:e} outside the domain ({reason})")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite value encountered evaluating {what}")]
    NonFinite { what: &'static str },

    #[error("residue not stable under contour shrinking at k_par = {k_par:e}: radius {radius:e} gives {first:e}, radius {shrunk_radius:e} gives {second:e}")]
    ResidueNotConverged {
        k_par: f64,
        radius: f64,
        first: f64,
        shrunk_radius: f64,
        second: f64,
    },

    #[error("quadrature did not reach tolerance after {panels} panels (estimated error {abs_error:e}, value {value:e})")]
    QuadratureNotConverged {
        panels: usize,
        value: f64,
        abs_error: f64,
    },

    #[error("finite-difference step {step:e} m reaches the plate; use a smaller step or move away from the wall")]
    StepHitsBoundary { step: f64 },

    #[error("the <p_perp^2> channel diverges logarithmically at small k_par when eta(0) = 1 (zero-cutoff gap mode); set p_perp_sq = 0 for this model")]
    PerpendicularDivergent,

    #[error("{quantity} is undefined at the cavity midpoint (static force vanishes)")]
    MidpointUndefined { quantity: &'static str },

    #[error("electron has zero momentum; mass shift is undefined")]
    ZeroMomentum,

    #[error("ring radius / separation = {ratio:.3} violates R >> d (need at least 20)")]
    RingTooSmall { ratio: f64 },

    #[error("non-finite partial derivative with respect to {parameter}")]
    NonFinitePartial { parameter: &'static str },

    #[error("inconsistent results: {what} ({first:e} vs {second:e})")]
    Inconsistent {
        what: &'static str,
        first: f64,
        second: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}

//! Error taxonomy shared by all modules.
//!
//! Machine-readable codes (`Error::code`) are stable strings used by the CLI
//! for single-line error reporting and exit-code mapping.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid argument (bad truncation order, epsilon <= 0, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Point outside the domain of the model space (e.g. |z| >= 1 on the disc).
    #[error("domain error: {0}")]
    Domain(String),

    /// Magnitude not representable even through the log-domain path.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Evaluation at the base locus: kernel sum vanished.
    #[error("base point error: {0}")]
    BasePoint(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failed: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureFail { achieved: f64, requested: f64 },

    /// Jacobi eigensolver did not converge.
    #[error("eigensolver failed after {sweeps} sweeps: off-diagonal norm {offdiag:.3e}")]
    EigFail { sweeps: usize, offdiag: f64 },

    /// Argument-principle integral did not resolve to an integer.
    #[error("contour unresolved: deviation {deviation:.3} from nearest integer")]
    ContourUnresolved { deviation: f64 },

    /// A zero sits too close to the integration contour.
    #[error("zero within {dist:.3e} of the contour |z| = {radius}")]
    ContourNearZero { dist: f64, radius: f64 },

    /// Aberth iteration did not converge.
    #[error("root finder did not converge after {iterations} iterations")]
    NonConverged { iterations: u32 },

    /// Requested truncation degree above the hard cap.
    #[error("degree {requested} exceeds the cap {cap}")]
    DegreeCap { requested: usize, cap: usize },

    /// Null-cluster separation failed in the kernel split.
    #[error("null split ambiguous: gap ratio {gap_ratio:.2} < 10 at threshold {eps_null:.3e}")]
    SplitAmbiguous { gap_ratio: f64, eps_null: f64 },

    /// Nonpositive value in a finite-difference stencil of a log density.
    #[error("base locus near {0}: nonpositive stencil value")]
    BaseLocusNear(String),

    /// Preconditions of the order-2 analysis not met.
    #[error("not an order-2 vanishing point: {0}")]
    NotOrder2(String),

    /// The hole-probability lower bound degenerated.
    #[error("certificate vacuous: {0}")]
    CertVacuous(String),

    /// Monte Carlo estimate lacks the required resolution.
    #[error("estimate unresolved: {0}")]
    Unresolved(String),

    /// Configuration error (unknown keys, missing fields, bad combinations).
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Domain(_) => "domain",
            Error::Overflow(_) => "overflow",
            Error::BasePoint(_) => "base_point",
            Error::QuadratureFail { .. } => "quadrature_fail",
            Error::EigFail { .. } => "eig_fail",
            Error::ContourUnresolved { .. } => "contour_unresolved",
            Error::ContourNearZero { .. } => "contour_near_zero",
            Error::NonConverged { .. } => "nonconverged",
            Error::DegreeCap { .. } => "degree_cap",
            Error::SplitAmbiguous { .. } => "split_ambiguous",
            Error::BaseLocusNear(_) => "base_locus_near",
            Error::NotOrder2(_) => "not_order2",
            Error::CertVacuous(_) => "cert_vacuous",
            Error::Unresolved(_) => "unresolved",
            Error::Config(_) => "config",
        }
    }
}

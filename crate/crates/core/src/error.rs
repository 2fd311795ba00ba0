use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::EvalError;
use crate::state::StatePoint;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration diverged at t = {t}: {reason}")]
    IntegrationDiverged { t: f64, reason: String },
    #[error("possible Zeno behaviour: {jumps} jumps by t = {time}")]
    ZenoSuspect { time: f64, jumps: usize },
    #[error("tangential graze of the impulse surface near t = {time} (|g| = {g:e})")]
    GrazeDetected { time: f64, g: f64 },
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid system spec at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("impulse image {image} of surface point {point} lies in the surface band (|g| = {g:e})")]
    H2Violation {
        point: StatePoint,
        image: StatePoint,
        g: f64,
    },
    #[error("dwell {dwell:e} after impulse at {point} is below the minimum dwell")]
    DwellViolation { point: StatePoint, dwell: f64 },
    #[error("surface sampler found {found} of {wanted} roots")]
    SurfaceSampling { found: usize, wanted: usize },
    #[error("hypothesis H2 has not been checked for system `{0}`")]
    HypothesesUnchecked(String),
    #[error("only {found} of {wanted} recurrence times to {target} within the horizon")]
    NotRecurrent {
        target: StatePoint,
        found: usize,
        wanted: usize,
    },
    #[error("image sequence at {q} does not converge (defect {defect:e})")]
    ImageDivergent { q: StatePoint, defect: f64 },
    #[error("two recurrence sequences for {q} give images {first} and {second} ({distance:e} apart)")]
    UniquenessViolation {
        q: StatePoint,
        first: StatePoint,
        second: StatePoint,
        distance: f64,
    },
    #[error("h is undefined at {point}: nearest table entry is {distance:e} away")]
    DomainMiss { point: StatePoint, distance: f64 },
    #[error("{} limit points have more than one preimage", witnesses.len())]
    MultiplePreimages { witnesses: Vec<PreimageWitness> },
    #[error("h construction failed at {} grid point(s); first at index {}: {}", failures.len(), failures[0].0, failures[0].1)]
    GridFailures { failures: Vec<(usize, Error)> },
}

/// A limit point of `y` together with the domain samples mapped onto it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PreimageWitness {
    pub target: StatePoint,
    pub preimages: Vec<StatePoint>,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that stem from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. }
                | Error::ZenoSuspect { .. }
                | Error::GrazeDetected { .. }
                | Error::Eval(_)
                | Error::NotRecurrent { .. }
                | Error::ImageDivergent { .. }
                | Error::UniquenessViolation { .. }
                | Error::DomainMiss { .. }
                | Error::SurfaceSampling { .. }
                | Error::GridFailures { .. }
        )
    }
}

//! Error type shared by every stage of the simulation pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at sample {index} of {context}")]
    NonFinite { context: &'static str, index: usize },

    #[error("length mismatch: expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("operands live on different time grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("edge under-resolved: dt = {dt:e} s exceeds tr/10 = {limit:e} s")]
    UnderResolvedEdge { dt: f64, limit: f64 },

    #[error("grid does not cover the pulse: {0}")]
    GridTooShort(String),

    #[error("|tau_d| = {tau_d:e} s is not inside the guard interval {guard:e} s (wraparound)")]
    GuardExceeded { tau_d: f64, guard: f64 },

    #[error("susceptibility denominator vanishes at detuning {delta:e} rad/s")]
    SingularSusceptibility { delta: f64 },

    #[error("group delay undefined for omega_c = 0")]
    UndefinedGroupDelay,

    #[error(
        "grid of {n} samples exceeds the memory cap of {cap} samples; \
         use window_mode = \"edge_window\" or raise PRECURSOR_MAX_SAMPLES"
    )]
    GridTooLarge { n: usize, cap: usize },

    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable class used by the CLI error envelope.
    pub fn class(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "non_finite",
            Error::LengthMismatch { .. } | Error::GridMismatch => "shape_mismatch",
            Error::InvalidParameter { .. }
            | Error::UnderResolvedEdge { .. }
            | Error::GridTooShort(_)
            | Error::GuardExceeded { .. }
            | Error::UndefinedGroupDelay => "invalid_parameter",
            Error::SingularSusceptibility { .. } => "singular_model",
            Error::GridTooLarge { .. } => "resource_limit",
            Error::UnknownPreset { .. } => "unknown_preset",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "serialization",
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "invalid_parameter" | "unknown_preset" | "config" | "shape_mismatch" => 2,
            "resource_limit" => 3,
            "io" | "serialization" => 4,
            _ => 1,
        }
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

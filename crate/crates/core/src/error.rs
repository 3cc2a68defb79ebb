// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff n_max = {0} is below the minimum of 2")]
    CutoffTooSmall(usize),

    #[error("Fock level {level} is outside 0..={n_max}")]
    FockLevelOutOfRange { level: usize, n_max: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown drive kind `{0}`")]
    UnknownDrive(String),

    #[error("unknown integration scheme `{0}`")]
    UnknownScheme(String),

    #[error("drive frequency at t = {t} is {value}; it must be finite and positive")]
    NonFiniteDrive { t: f64, value: f64 },

    #[error("|epsilon - omega2| = {gap} is below 3g = {limit}: too close to resonance")]
    NearResonance { gap: f64, limit: f64 },

    #[error("analysis window holds {found} samples, at least {required} are needed")]
    TooShort { found: usize, required: usize },

    #[error("{per_period:.2} samples per oscillation period, at least 10 are needed")]
    InsufficientSampling { per_period: f64 },

    #[error("trajectory ended with status `{0}`, a completed run is required")]
    IncompleteTrajectory(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}

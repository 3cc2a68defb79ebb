// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Open-system simulation of a two-level atom in a cavity whose frequency
//! is modulated in time.

pub mod analytic;
pub mod config;
pub mod drive;
pub mod error;
pub mod hamiltonian;
pub mod io;
pub mod lindblad;
pub mod observables;
pub mod ode;
pub mod operators;
pub mod run;
pub mod spectrum;
pub mod sweep;

pub use config::{ConfigMap, RunSpec};
pub use error::{Error, Result};

// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lab-frame Hamiltonian of the qubit and the frequency-modulated cavity:
//!
//! ```text
//! H(t) = ω(t) a†a + (ε/2)(1 + σz) + i (∂tω / 4ω)(a² − a†²) + V
//! ```
//!
//! with `V = g(aσ+ + a†σ−) + g(a†σ+ + aσ−)`. Units: ħ = 1, frequencies in
//! units of the mean cavity frequency.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::operators::{CMatrix, OperatorSet, I};

/// Physical constants of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega0: f64,
    pub epsilon: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_phi: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("omega0", self.omega0), ("epsilon", self.epsilon)];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {x}")));
            }
        }
        let non_negative = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
        ];
        for (name, x) in non_negative {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be non-negative, got {x}"),
                ));
            }
        }
        Ok(())
    }

    /// Time-averaged detuning `Δ = ε − ω0`.
    pub fn detuning(&self) -> f64 {
        self.epsilon - self.omega0
    }

    /// `T_R = π / g`; infinite for an uncoupled qubit.
    pub fn rabi_time(&self) -> f64 {
        PI / self.g
    }

    /// Warnings for parameters outside the weak-coupling, weak-modulation
    /// regime (`g, d ≤ 0.2 ω0`). These never stop a run.
    pub fn regime_warnings(&self, excursion: f64) -> Vec<String> {
        let limit = 0.2 * self.omega0;
        let mut out = Vec::new();
        if self.g > limit {
            out.push(format!(
                "g = {} exceeds 0.2·omega0; results leave the weak-coupling regime",
                self.g
            ));
        }
        if excursion > limit {
            out.push(format!(
                "drive excursion {} exceeds 0.2·omega0; results leave the weak-modulation regime",
                excursion
            ));
        }
        out
    }
}

impl Default for SystemParams {
    /// Resonant qubit with the coupling and loss rates of the stabilized
    /// reference scenario.
    fn default() -> Self {
        SystemParams {
            omega0: 1.0,
            epsilon: 1.0,
            g: 0.05,
            kappa: 0.01,
            gamma: 0.05,
            gamma_phi: 0.05,
        }
    }
}

/// Which qubit–cavity coupling terms enter `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interaction {
    /// Rotating and counterrotating terms.
    Full,
    /// `g(aσ+ + a†σ−)` only.
    JaynesCummings,
    /// `g(a†σ+ + aσ−)` only.
    AntiJaynesCummings,
    None,
}

impl Interaction {
    pub fn name(self) -> &'static str {
        match self {
            Interaction::Full => "full",
            Interaction::JaynesCummings => "jc",
            Interaction::AntiJaynesCummings => "ajc",
            Interaction::None => "none",
        }
    }

    fn rotating(self) -> bool {
        matches!(self, Interaction::Full | Interaction::JaynesCummings)
    }

    fn counterrotating(self) -> bool {
        matches!(self, Interaction::Full | Interaction::AntiJaynesCummings)
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Interaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Interaction::Full),
            "jc" => Ok(Interaction::JaynesCummings),
            "ajc" => Ok(Interaction::AntiJaynesCummings),
            "none" => Ok(Interaction::None),
            other => Err(Error::invalid(
                "terms.interaction",
                format!("`{other}` is not one of full, jc, ajc, none"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermSelection {
    pub include_casimir: bool,
    pub interaction: Interaction,
}

impl TermSelection {
    pub const FULL: TermSelection = TermSelection {
        include_casimir: true,
        interaction: Interaction::Full,
    };

    pub fn with_interaction(interaction: Interaction) -> Self {
        TermSelection {
            include_casimir: true,
            interaction,
        }
    }
}

impl Default for TermSelection {
    fn default() -> Self {
        TermSelection::FULL
    }
}

/// Interaction operator without the coupling constant.
pub fn interaction_operator(ops: &OperatorSet, interaction: Interaction) -> CMatrix {
    let mut v = CMatrix::zeros((ops.dim(), ops.dim()));
    if interaction.rotating() {
        v = v + ops.a.dot(&ops.sigma_plus) + ops.a_dag.dot(&ops.sigma_minus);
    }
    if interaction.counterrotating() {
        v = v + ops.a_dag.dot(&ops.sigma_plus) + ops.a.dot(&ops.sigma_minus);
    }
    v
}

/// `i(a² − a†²)`, Hermitian.
pub fn squeezing_operator(ops: &OperatorSet) -> CMatrix {
    (&ops.a_sq - &ops.a_dag_sq).mapv(|z| z * I)
}

/// Coefficient `∂tω / 4ω` of the squeezing operator.
pub fn casimir_coefficient(drive: &dyn Drive, t: f64) -> Result<f64> {
    let omega = drive.value(t);
    let rate = drive.derivative(t);
    if !(omega.is_finite() && omega > 0.0 && rate.is_finite()) {
        return Err(Error::NonFiniteDrive { t, value: omega });
    }
    Ok(rate / (4.0 * omega))
}

/// Time-independent pieces of `H`, scaled by the time-dependent scalars at
/// each evaluation.
#[derive(Debug, Clone)]
pub struct HamiltonianBlocks {
    pub photon_number: CMatrix,
    /// `(1 + σz)/2`.
    pub qubit_excitation: CMatrix,
    pub squeezing: CMatrix,
    pub interaction: CMatrix,
}

impl HamiltonianBlocks {
    pub fn new(ops: &OperatorSet, terms: TermSelection) -> Self {
        let qubit_excitation = (&ops.identity + &ops.sigma_z).mapv(|z| z * 0.5);
        let squeezing = if terms.include_casimir {
            squeezing_operator(ops)
        } else {
            CMatrix::zeros((ops.dim(), ops.dim()))
        };
        HamiltonianBlocks {
            photon_number: ops.n_op.clone(),
            qubit_excitation,
            squeezing,
            interaction: interaction_operator(ops, terms.interaction),
        }
    }

    pub fn at(&self, params: &SystemParams, drive: &dyn Drive, t: f64) -> Result<CMatrix> {
        let omega = drive.value(t);
        let c = casimir_coefficient(drive, t)?;
        let h = self.photon_number.mapv(|z| z * omega)
            + self.qubit_excitation.mapv(|z| z * params.epsilon)
            + self.squeezing.mapv(|z| z * c)
            + self.interaction.mapv(|z| z * params.g);
        Ok(h)
    }
}

pub fn assemble_hamiltonian(
    ops: &OperatorSet,
    params: &SystemParams,
    drive: &dyn Drive,
    terms: TermSelection,
    t: f64,
) -> Result<CMatrix> {
    HamiltonianBlocks::new(ops, terms).at(params, drive, t)
}

/// Static Hamiltonian at a fixed cavity frequency (no squeezing term).
pub fn static_hamiltonian(
    ops: &OperatorSet,
    params: &SystemParams,
    omega: f64,
    interaction: Interaction,
) -> CMatrix {
    let blocks = HamiltonianBlocks::new(
        ops,
        TermSelection {
            include_casimir: false,
            interaction,
        },
    );
    blocks.photon_number.mapv(|z| z * omega)
        + blocks.qubit_excitation.mapv(|z| z * params.epsilon)
        + blocks.interaction.mapv(|z| z * params.g)
}

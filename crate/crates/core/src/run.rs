// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Executing a resolved [`RunSpec`].

use crate::config::{InitialState, RunSpec};
use crate::drive::{Drive, DriveRegistry};
use crate::error::Result;
use crate::lindblad::{integrate_observed, DensityMatrix};
use crate::observables::Trajectory;
use crate::operators::{build_operators, CMatrix, FockCutoff, OperatorSet};
use crate::spectrum::dressed_ground;

impl RunSpec {
    pub fn build_drive(&self) -> Result<Box<dyn Drive>> {
        DriveRegistry::default().build(&self.drive_kind, &self.drive)
    }

    pub fn operators(&self) -> Result<OperatorSet> {
        Ok(build_operators(FockCutoff::new(self.n_max)?))
    }

    pub fn initial_density(&self, ops: &OperatorSet, drive: &dyn Drive) -> Result<DensityMatrix> {
        match self.initial_state {
            InitialState::Ground => Ok(DensityMatrix::ground(ops)),
            InitialState::Dressed => {
                dressed_ground(ops, &self.params, drive.value(0.0), self.terms.interaction)
            }
        }
    }

    /// Parameter-regime warnings; they never stop a run.
    pub fn warnings(&self) -> Vec<String> {
        match self.build_drive() {
            Ok(drive) => self.params.regime_warnings(drive.excursion()),
            Err(_) => Vec::new(),
        }
    }

    pub fn execute(&self) -> Result<Trajectory> {
        self.execute_observed(|_, _| {})
    }

    /// As [`RunSpec::execute`], handing every sampled `ρ` to `observer`.
    pub fn execute_observed<F>(&self, observer: F) -> Result<Trajectory>
    where
        F: FnMut(f64, &CMatrix),
    {
        let ops = self.operators()?;
        let drive = self.build_drive()?;
        let rho0 = self.initial_density(&ops, drive.as_ref())?;
        integrate_observed(
            &ops,
            &self.params,
            drive.as_ref(),
            self.terms,
            &rho0,
            &self.integrator,
            observer,
        )
    }
}

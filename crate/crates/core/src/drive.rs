// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Cavity frequency protocols `ω(t)`.
//!
//! Each protocol implements [`Drive`] and supplies its derivative in closed
//! form. Protocols are looked up by name through a [`DriveRegistry`], which
//! is how the config file's `drive.kind` selects one at runtime.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub trait Drive: Send + Sync + fmt::Debug {
    /// Registry name of the protocol.
    fn kind(&self) -> &'static str;

    fn value(&self, t: f64) -> f64;

    /// Exact time derivative of [`Drive::value`].
    fn derivative(&self, t: f64) -> f64;

    /// Greatest lower bound of `value` over all times.
    fn lower_bound(&self) -> f64;

    /// Size of the frequency excursion, used for weak-modulation warnings.
    fn excursion(&self) -> f64;

    /// Protocol parameters for run records.
    fn describe(&self) -> String;
}

pub fn drive_value(drive: &dyn Drive, t: f64) -> f64 {
    drive.value(t)
}

pub fn drive_derivative(drive: &dyn Drive, t: f64) -> f64 {
    drive.derivative(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub omega: f64,
}

impl Drive for Constant {
    fn kind(&self) -> &'static str {
        "constant"
    }

    fn value(&self, _t: f64) -> f64 {
        self.omega
    }

    fn derivative(&self, _t: f64) -> f64 {
        0.0
    }

    fn lower_bound(&self) -> f64 {
        self.omega
    }

    fn excursion(&self) -> f64 {
        0.0
    }

    fn describe(&self) -> String {
        format!("constant(omega={})", self.omega)
    }
}

/// `ω(t) = ω0 + d cos(Ω t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub omega0: f64,
    pub d: f64,
    pub modulation: f64,
}

impl Drive for Cosine {
    fn kind(&self) -> &'static str {
        "cosine"
    }

    fn value(&self, t: f64) -> f64 {
        self.omega0 + self.d * (self.modulation * t).cos()
    }

    fn derivative(&self, t: f64) -> f64 {
        -self.d * self.modulation * (self.modulation * t).sin()
    }

    fn lower_bound(&self) -> f64 {
        self.omega0 - self.d.abs()
    }

    fn excursion(&self) -> f64 {
        self.d.abs()
    }

    fn describe(&self) -> String {
        format!(
            "cosine(omega0={}, d={}, Omega={})",
            self.omega0, self.d, self.modulation
        )
    }
}

/// Smoothed step `ω1 → ω2`: `ω1 + (ω2 − ω1)(1 + tanh((t − t_switch)/τ))/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRamp {
    pub omega1: f64,
    pub omega2: f64,
    pub t_switch: f64,
    pub tau: f64,
}

impl Drive for SwitchRamp {
    fn kind(&self) -> &'static str {
        "switch"
    }

    fn value(&self, t: f64) -> f64 {
        let x = (t - self.t_switch) / self.tau;
        self.omega1 + (self.omega2 - self.omega1) * 0.5 * (1.0 + x.tanh())
    }

    fn derivative(&self, t: f64) -> f64 {
        let x = (t - self.t_switch) / self.tau;
        let sech = 1.0 / x.cosh();
        (self.omega2 - self.omega1) * 0.5 * sech * sech / self.tau
    }

    fn lower_bound(&self) -> f64 {
        self.omega1.min(self.omega2)
    }

    fn excursion(&self) -> f64 {
        (self.omega2 - self.omega1).abs()
    }

    fn describe(&self) -> String {
        format!(
            "switch(omega1={}, omega2={}, t_switch={}, tau={})",
            self.omega1, self.omega2, self.t_switch, self.tau
        )
    }
}

/// Union of the numeric parameters any registered protocol may read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Static frequency for `constant`, mean frequency for `cosine`.
    pub omega0: f64,
    pub d: f64,
    pub modulation: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub t_switch: f64,
    pub tau: f64,
}

impl DriveParams {
    /// Defaults relative to the cavity frequency: parametric resonance
    /// `Ω = 2ω0`, no modulation, and a ramp of width one hundredth of a
    /// cavity period centred one period after the start.
    pub fn defaults(omega0: f64) -> Self {
        let period = 2.0 * PI / omega0;
        DriveParams {
            omega0,
            d: 0.0,
            modulation: 2.0 * omega0,
            omega1: omega0,
            omega2: omega0,
            t_switch: period,
            tau: 0.01 * period,
        }
    }
}

pub type DriveBuilder = fn(&DriveParams) -> Result<Box<dyn Drive>>;

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and positive, got {x}"),
        ))
    }
}

fn build_constant(p: &DriveParams) -> Result<Box<dyn Drive>> {
    require_positive("omega0", p.omega0)?;
    Ok(Box::new(Constant { omega: p.omega0 }))
}

fn build_cosine(p: &DriveParams) -> Result<Box<dyn Drive>> {
    require_positive("omega0", p.omega0)?;
    require_positive("drive.Omega", p.modulation)?;
    if !p.d.is_finite() || p.d < 0.0 {
        return Err(Error::invalid(
            "drive.d",
            format!("must be non-negative, got {}", p.d),
        ));
    }
    if p.d >= p.omega0 {
        return Err(Error::invalid(
            "drive.d",
            format!(
                "d = {} must stay below omega0 = {} so that ω(t) > 0",
                p.d, p.omega0
            ),
        ));
    }
    Ok(Box::new(Cosine {
        omega0: p.omega0,
        d: p.d,
        modulation: p.modulation,
    }))
}

fn build_switch(p: &DriveParams) -> Result<Box<dyn Drive>> {
    require_positive("drive.omega1", p.omega1)?;
    require_positive("drive.omega2", p.omega2)?;
    require_positive("drive.tau", p.tau)?;
    if !p.t_switch.is_finite() {
        return Err(Error::invalid("drive.t_switch", "must be finite"));
    }
    Ok(Box::new(SwitchRamp {
        omega1: p.omega1,
        omega2: p.omega2,
        t_switch: p.t_switch,
        tau: p.tau,
    }))
}

/// Name → constructor table for drive protocols.
#[derive(Clone)]
pub struct DriveRegistry {
    builders: BTreeMap<&'static str, DriveBuilder>,
}

impl DriveRegistry {
    pub fn empty() -> Self {
        DriveRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, builder: DriveBuilder) -> &mut Self {
        self.builders.insert(name, builder);
        self
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn build(&self, name: &str, params: &DriveParams) -> Result<Box<dyn Drive>> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownDrive(name.to_string()))?;
        builder(params)
    }
}

impl Default for DriveRegistry {
    fn default() -> Self {
        let mut registry = DriveRegistry::empty();
        registry
            .register("constant", build_constant)
            .register("cosine", build_cosine)
            .register("switch", build_switch);
        registry
    }
}

impl fmt::Debug for DriveRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}

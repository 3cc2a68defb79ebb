// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Unknown keys are errors.
//! Time-valued keys accept a `TR` suffix meaning units of `π/g`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::drive::{DriveParams, DriveRegistry};
use crate::error::{Error, Result};
use crate::hamiltonian::{Interaction, SystemParams, TermSelection};
use crate::lindblad::IntegratorConfig;
use crate::observables::DEFAULT_WINDOW_FRACTION;
use crate::ode;
use crate::sweep::SweepAxis;

/// Every accepted key, in the order used when writing a config back out.
pub const KEYS: &[&str] = &[
    "omega0",
    "epsilon",
    "g",
    "kappa",
    "gamma",
    "gamma_phi",
    "drive.kind",
    "drive.d",
    "drive.Omega",
    "drive.omega1",
    "drive.omega2",
    "drive.t_switch",
    "drive.tau",
    "terms.casimir",
    "terms.interaction",
    "fock.n_max",
    "initial.state",
    "integrator.method",
    "integrator.rel_tol",
    "integrator.abs_tol",
    "integrator.dt_initial",
    "integrator.dt_max",
    "integrator.t_end",
    "integrator.positivity_tol",
    "integrator.trace_tol",
    "integrator.top_level_guard",
    "output.path",
    "output.sample_interval",
    "analysis.window_fraction",
    "sweep.axis",
    "sweep.values",
];

pub const SUBCRITICAL_N_MAX: usize = 12;
pub const SUPERCRITICAL_N_MAX: usize = 40;
pub const DEFAULT_T_END_TR: f64 = 40.0;

/// Raw assignments, validated against [`KEYS`] on insertion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn new() -> Self {
        ConfigMap::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if map.values.contains_key(key) {
                return Err(Error::ConfigSyntax {
                    line,
                    message: format!("`{key}` assigned twice"),
                });
            }
            map.set(key, value.trim())?;
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<&mut Self> {
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(self)
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<&mut Self> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::ConfigSyntax {
                line: 0,
                message: format!("override `{assignment}` is not of the form key=value"),
            })?;
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    /// Assignments as config text, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_number(key, v)).transpose()
    }

    /// Time value in `1/ω0` units; `TR` suffixes use `rabi_time`.
    fn time(&self, key: &str, rabi_time: f64) -> Result<Option<f64>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        match raw.strip_suffix("TR") {
            Some(stripped) => {
                if !rabi_time.is_finite() {
                    return Err(config_value(key, "TR units need g > 0"));
                }
                Ok(Some(parse_number(key, stripped.trim())? * rabi_time))
            }
            None => parse_number(key, raw).map(Some),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str, expected: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| config_value(key, format!("expected {expected}, found `{v}`")))
            })
            .transpose()
    }
}

fn config_value(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_number(key: &str, raw: &str) -> Result<f64> {
    let x: f64 = raw
        .parse()
        .map_err(|_| config_value(key, format!("expected a number, found `{raw}`")))?;
    if !x.is_finite() {
        return Err(config_value(key, "must be finite"));
    }
    Ok(x)
}

/// Where a run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Bare `|g,0⟩`.
    Ground,
    /// Ground state of the static Hamiltonian at `ω(0)`.
    Dressed,
}

impl InitialState {
    pub fn name(self) -> &'static str {
        match self {
            InitialState::Ground => "ground",
            InitialState::Dressed => "dressed",
        }
    }
}

impl FromStr for InitialState {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "ground" => Ok(InitialState::Ground),
            "dressed" => Ok(InitialState::Dressed),
            _ => Err(()),
        }
    }
}

/// Fully resolved configuration of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub params: SystemParams,
    pub drive_kind: String,
    pub drive: DriveParams,
    pub terms: TermSelection,
    pub n_max: usize,
    pub initial_state: InitialState,
    pub integrator: IntegratorConfig,
    pub window_fraction: f64,
    pub output_path: Option<String>,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Option<Vec<f64>>,
}

impl RunSpec {
    /// Resolve defaults and validate every value.
    pub fn resolve(map: &ConfigMap) -> Result<Self> {
        let defaults = SystemParams::default();
        let params = SystemParams {
            omega0: map.number("omega0")?.unwrap_or(defaults.omega0),
            epsilon: map.number("epsilon")?.unwrap_or(defaults.epsilon),
            g: map.number("g")?.unwrap_or(defaults.g),
            kappa: map.number("kappa")?.unwrap_or(defaults.kappa),
            gamma: map.number("gamma")?.unwrap_or(defaults.gamma),
            gamma_phi: map.number("gamma_phi")?.unwrap_or(defaults.gamma_phi),
        };
        params.validate()?;
        let rabi = if params.g > 0.0 {
            params.rabi_time()
        } else {
            f64::INFINITY
        };

        let base = DriveParams::defaults(params.omega0);
        let drive = DriveParams {
            omega0: params.omega0,
            d: map.number("drive.d")?.unwrap_or(base.d),
            modulation: map.number("drive.Omega")?.unwrap_or(base.modulation),
            omega1: map.number("drive.omega1")?.unwrap_or(base.omega1),
            omega2: map.number("drive.omega2")?.unwrap_or(base.omega2),
            t_switch: map.time("drive.t_switch", rabi)?.unwrap_or(base.t_switch),
            tau: map.time("drive.tau", rabi)?.unwrap_or(base.tau),
        };
        let drive_kind = map.get("drive.kind").unwrap_or("cosine").to_string();
        let registry = DriveRegistry::default();
        if !registry.contains(&drive_kind) {
            return Err(Error::UnknownDrive(drive_kind));
        }
        // Construct once so protocol-level constraints surface here.
        registry.build(&drive_kind, &drive)?;

        let include_casimir = match map.get("terms.casimir").unwrap_or("on") {
            "on" => true,
            "off" => false,
            other => {
                return Err(config_value(
                    "terms.casimir",
                    format!("expected on|off, found `{other}`"),
                ))
            }
        };
        let interaction = map
            .parsed::<Interaction>("terms.interaction", "full|jc|ajc|none")?
            .unwrap_or(Interaction::Full);
        let terms = TermSelection {
            include_casimir,
            interaction,
        };

        let n_max = match map.parsed::<usize>("fock.n_max", "a non-negative integer")? {
            Some(n) => n,
            None => default_n_max(&params, &drive_kind, &drive)?,
        };
        if n_max < 2 {
            return Err(Error::CutoffTooSmall(n_max));
        }

        let initial_state = map
            .parsed::<InitialState>("initial.state", "ground|dressed")?
            .unwrap_or(InitialState::Ground);

        let t_end = match map.time("integrator.t_end", rabi)? {
            Some(t) => t,
            None if params.g > 0.0 => DEFAULT_T_END_TR * rabi,
            None => {
                return Err(config_value(
                    "integrator.t_end",
                    "required when g = 0 (the default is given in units of π/g)",
                ))
            }
        };
        let mut integrator = IntegratorConfig::new(params.omega0, t_end);
        if let Some(method) = map.get("integrator.method") {
            integrator.scheme = ode::scheme(method)?;
        }
        macro_rules! override_number {
            ($field:ident, $key:literal) => {
                if let Some(x) = map.number($key)? {
                    integrator.$field = x;
                }
            };
        }
        macro_rules! override_time {
            ($field:ident, $key:literal) => {
                if let Some(x) = map.time($key, rabi)? {
                    integrator.$field = x;
                }
            };
        }
        override_number!(rel_tol, "integrator.rel_tol");
        override_number!(abs_tol, "integrator.abs_tol");
        override_number!(positivity_tol, "integrator.positivity_tol");
        override_number!(trace_tol, "integrator.trace_tol");
        override_number!(top_level_guard, "integrator.top_level_guard");
        override_time!(dt_initial, "integrator.dt_initial");
        override_time!(dt_max, "integrator.dt_max");
        override_time!(sample_interval, "output.sample_interval");
        integrator.validate()?;

        let window_fraction = map
            .number("analysis.window_fraction")?
            .unwrap_or(DEFAULT_WINDOW_FRACTION);
        if !(window_fraction > 0.0 && window_fraction <= 1.0) {
            return Err(config_value(
                "analysis.window_fraction",
                "must lie in (0, 1]",
            ));
        }

        let sweep_axis =
            map.parsed::<SweepAxis>("sweep.axis", "Omega|d|gamma|kappa|gamma_phi|epsilon")?;
        let sweep_values = map
            .get("sweep.values")
            .map(|raw| {
                raw.split(',')
                    .map(|v| parse_number("sweep.values", v.trim()))
                    .collect::<Result<Vec<f64>>>()
            })
            .transpose()?;

        Ok(RunSpec {
            params,
            drive_kind,
            drive,
            terms,
            n_max,
            initial_state,
            integrator,
            window_fraction,
            output_path: map.get("output.path").map(str::to_string),
            sweep_axis,
            sweep_values,
        })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        RunSpec::resolve(&ConfigMap::parse(text)?)
    }

    /// Every key with its resolved value; parsing this text yields an
    /// identical spec. Times are written in `1/ω0` units.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let d = &self.drive;
        let i = &self.integrator;
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("omega0", p.omega0.to_string());
        line("epsilon", p.epsilon.to_string());
        line("g", p.g.to_string());
        line("kappa", p.kappa.to_string());
        line("gamma", p.gamma.to_string());
        line("gamma_phi", p.gamma_phi.to_string());
        line("drive.kind", self.drive_kind.clone());
        line("drive.d", d.d.to_string());
        line("drive.Omega", d.modulation.to_string());
        line("drive.omega1", d.omega1.to_string());
        line("drive.omega2", d.omega2.to_string());
        line("drive.t_switch", d.t_switch.to_string());
        line("drive.tau", d.tau.to_string());
        line(
            "terms.casimir",
            if self.terms.include_casimir {
                "on"
            } else {
                "off"
            }
            .to_string(),
        );
        line(
            "terms.interaction",
            self.terms.interaction.name().to_string(),
        );
        line("fock.n_max", self.n_max.to_string());
        line("initial.state", self.initial_state.name().to_string());
        line("integrator.method", i.scheme.name.to_string());
        line("integrator.rel_tol", i.rel_tol.to_string());
        line("integrator.abs_tol", i.abs_tol.to_string());
        line("integrator.dt_initial", i.dt_initial.to_string());
        line("integrator.dt_max", i.dt_max.to_string());
        line("integrator.t_end", i.t_end.to_string());
        line("integrator.positivity_tol", i.positivity_tol.to_string());
        line("integrator.trace_tol", i.trace_tol.to_string());
        line("integrator.top_level_guard", i.top_level_guard.to_string());
        if let Some(path) = &self.output_path {
            line("output.path", path.clone());
        }
        line("output.sample_interval", i.sample_interval.to_string());
        line("analysis.window_fraction", self.window_fraction.to_string());
        if let Some(axis) = self.sweep_axis {
            line("sweep.axis", axis.name().to_string());
        }
        if let Some(values) = &self.sweep_values {
            let joined: Vec<String> = values.iter().map(f64::to_string).collect();
            line("sweep.values", joined.join(","));
        }
        out
    }

    /// The same spec as a [`ConfigMap`], for further overrides.
    pub fn to_config_map(&self) -> ConfigMap {
        ConfigMap::parse(&self.to_config_text())
            .expect("resolved specs always serialize to valid config")
    }
}

/// Cutoff used when `fock.n_max` is absent: the larger one when a cosine
/// drive is at or above the bare-cavity threshold.
fn default_n_max(params: &SystemParams, kind: &str, drive: &DriveParams) -> Result<usize> {
    if kind == "cosine" {
        let threshold = crate::analytic::d_crit_res(params.omega0, drive.modulation, params.kappa)?;
        if drive.d >= threshold {
            return Ok(SUPERCRITICAL_N_MAX);
        }
    }
    Ok(SUBCRITICAL_N_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn defaults_resolve() {
        let spec = RunSpec::resolve(&ConfigMap::new()).unwrap();
        assert_eq!(spec.params, SystemParams::default());
        assert_eq!(spec.drive_kind, "cosine");
        assert_eq!(spec.n_max, SUBCRITICAL_N_MAX);
        assert!((spec.integrator.t_end - 40.0 * PI / 0.05).abs() < 1e-9);
        assert_eq!(spec.terms, TermSelection::FULL);
        assert_eq!(spec.initial_state, InitialState::Ground);
    }

    #[test]
    fn comments_and_whitespace() {
        let map = ConfigMap::parse("# header\n g = 0.02  # coupling\n\ndrive.d=0.01\n").unwrap();
        assert_eq!(map.get("g"), Some("0.02"));
        assert_eq!(map.get("drive.d"), Some("0.01"));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ConfigMap::parse("gama = 0.05\n").unwrap_err();
        assert_eq!(err, Error::UnknownKey("gama".into()));
        assert!(err.to_string().contains("gama"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(
            ConfigMap::parse("g = 0.05\nkappa\n"),
            Err(Error::ConfigSyntax { line: 2, .. })
        ));
        assert!(matches!(
            ConfigMap::parse("g = 0.05\ng = 0.04\n"),
            Err(Error::ConfigSyntax { line: 2, .. })
        ));
    }

    #[test]
    fn rabi_time_suffix() {
        let spec =
            RunSpec::from_text("g = 0.02\nintegrator.t_end = 5TR\ndrive.t_switch = 0.5 TR\n")
                .unwrap();
        assert!((spec.integrator.t_end - 5.0 * PI / 0.02).abs() < 1e-9);
        assert!((spec.drive.t_switch - 0.5 * PI / 0.02).abs() < 1e-9);
    }

    #[test]
    fn zero_coupling_needs_explicit_end_time() {
        assert!(matches!(
            RunSpec::from_text("g = 0\n"),
            Err(Error::ConfigValue { .. })
        ));
        assert!(RunSpec::from_text("g = 0\nintegrator.t_end = 100\n").is_ok());
        assert!(RunSpec::from_text("g = 0\nintegrator.t_end = 2TR\n").is_err());
    }

    #[test]
    fn supercritical_default_cutoff() {
        let spec = RunSpec::from_text("drive.d = 0.1\n").unwrap();
        assert_eq!(spec.n_max, SUPERCRITICAL_N_MAX);
        let spec = RunSpec::from_text("drive.d = 0.1\nfock.n_max = 60\n").unwrap();
        assert_eq!(spec.n_max, 60);
    }

    #[test]
    fn bad_values_are_rejected() {
        for text in [
            "terms.casimir = maybe\n",
            "terms.interaction = rwa\n",
            "drive.kind = square\n",
            "integrator.method = euler\n",
            "fock.n_max = 1\n",
            "drive.d = 1.5\n",
            "kappa = -1\n",
            "g = abc\n",
            "analysis.window_fraction = 0\n",
            "initial.state = excited\n",
        ] {
            assert!(RunSpec::from_text(text).is_err(), "{text}");
        }
    }

    #[test]
    fn text_round_trip() {
        let spec = RunSpec::from_text(
            "g = 0.03\ndrive.d = 0.0123456789\ndrive.Omega = 2.0707106781186546\n\
             terms.interaction = jc\noutput.path = out.csv\nsweep.axis = d\nsweep.values = 0.1,0.2\n",
        )
        .unwrap();
        let again = RunSpec::from_text(&spec.to_config_text()).unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.to_config_text(), again.to_config_text());
    }

    #[test]
    fn map_text_round_trip() {
        let map = ConfigMap::parse("sweep.values = 1,2\ng = 0.1\n").unwrap();
        assert_eq!(map.to_text(), "g = 0.1\nsweep.values = 1,2\n");
        assert_eq!(ConfigMap::parse(&map.to_text()).unwrap(), map);
    }

    #[test]
    fn overrides_replace_values() {
        let mut map = ConfigMap::parse("g = 0.05\n").unwrap();
        map.apply_override("g=0.07").unwrap();
        assert_eq!(map.get("g"), Some("0.07"));
        assert!(map.apply_override("gg=1").is_err());
        assert!(map.apply_override("g").is_err());
    }
}

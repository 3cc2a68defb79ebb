// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps and peak analysis of their envelopes.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::config::{ConfigMap, RunSpec};
use crate::error::{Error, Result};
use crate::observables::{steady_envelope, Envelope};

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Omega,
    D,
    Gamma,
    Kappa,
    GammaPhi,
    Epsilon,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::Omega,
        SweepAxis::D,
        SweepAxis::Gamma,
        SweepAxis::Kappa,
        SweepAxis::GammaPhi,
        SweepAxis::Epsilon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Omega => "Omega",
            SweepAxis::D => "d",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Kappa => "kappa",
            SweepAxis::GammaPhi => "gamma_phi",
            SweepAxis::Epsilon => "epsilon",
        }
    }

    /// Config key the axis value is written to.
    pub fn config_key(self) -> &'static str {
        match self {
            SweepAxis::Omega => "drive.Omega",
            SweepAxis::D => "drive.d",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Kappa => "kappa",
            SweepAxis::GammaPhi => "gamma_phi",
            SweepAxis::Epsilon => "epsilon",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("sweep.axis", format!("unknown axis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Configuration shared by every point; defaults are resolved per point.
    pub base: ConfigMap,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub workers: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid(
                "sweep.values",
                "at least one value is required",
            ));
        }
        if let Some(x) = self.values.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(
                "sweep.values",
                format!("non-finite value {x}"),
            ));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        Ok(())
    }

    /// Resolved configuration of the point with axis value `value`.
    pub fn point(&self, value: f64) -> Result<RunSpec> {
        let mut map = self.base.clone();
        map.remove("sweep.axis");
        map.remove("sweep.values");
        map.set(self.axis.config_key(), value.to_string())?;
        RunSpec::resolve(&map)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Absent when the run did not complete or was too short to analyse.
    pub envelope: Option<Envelope>,
    /// Termination name, or `error` when the point could not be run.
    pub status: String,
    pub error: Option<String>,
    /// End time of the run that produced this row.
    pub t_end: f64,
    pub wall_time: Duration,
}

impl SweepRow {
    pub fn stabilized(&self) -> bool {
        self.envelope.is_some_and(|e| e.stabilized)
    }
}

/// Run one point; unstabilized completions are retried once at twice the
/// end time.
pub fn run_point(spec: &RunSpec, axis_value: f64) -> SweepRow {
    let started = Instant::now();
    let mut row = attempt(spec, axis_value);
    if row.envelope.is_some_and(|e| !e.stabilized) {
        let mut longer = spec.clone();
        longer.integrator.t_end *= 2.0;
        row = attempt(&longer, axis_value);
    }
    row.wall_time = started.elapsed();
    row
}

fn attempt(spec: &RunSpec, axis_value: f64) -> SweepRow {
    let mut row = SweepRow {
        axis_value,
        envelope: None,
        status: "error".into(),
        error: None,
        t_end: spec.integrator.t_end,
        wall_time: Duration::ZERO,
    };
    match spec.execute() {
        Ok(traj) => {
            row.status = traj.status.name().into();
            if traj.status.is_completed() {
                match steady_envelope(&traj, spec.window_fraction) {
                    Ok(e) => row.envelope = Some(e),
                    Err(e) => row.error = Some(e.to_string()),
                }
            } else {
                row.error = Some(traj.status.to_string());
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Integrate every point. Rows come back in the order of `spec.values`
/// and do not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let run = |&value: &f64| match spec.point(value) {
        Ok(point) => run_point(&point, value),
        Err(e) => SweepRow {
            axis_value: value,
            envelope: None,
            status: "error".into(),
            error: Some(e.to_string()),
            t_end: f64::NAN,
            wall_time: Duration::ZERO,
        },
    };
    if spec.workers == 1 {
        return Ok(spec.values.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(|| spec.values.par_iter().map(run).collect()))
}

/// `n` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..n)
            .map(|k| from + (to - from) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// A local maximum of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// Vertex of the parabola through the maximum and its neighbours.
    pub position: f64,
    pub height: f64,
    pub prominence: f64,
    /// Full width at half prominence, from linear interpolation.
    pub width: f64,
}

/// Interior indices strictly above both neighbours.
pub fn local_maxima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1])
        .collect()
}

/// Vertex of the parabola through `(x[i-1..=i+1], y[i-1..=i+1])`.
pub fn quadratic_vertex(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    // Newton form: y = y0 + c1 (x − x0) + c2 (x − x0)(x − x1).
    let c1 = (y1 - y0) / (x1 - x0);
    let c2 = ((y2 - y1) / (x2 - x1) - c1) / (x2 - x0);
    if c2 >= 0.0 {
        return (x1, y1);
    }
    let xv = 0.5 * (x0 + x1) - c1 / (2.0 * c2);
    let yv = y0 + c1 * (xv - x0) + c2 * (xv - x0) * (xv - x1);
    (xv, yv)
}

/// Prominence of the maximum at `i` and the bases on either side.
fn prominence(y: &[f64], i: usize) -> (f64, usize, usize) {
    let mut left = i;
    let mut left_min = y[i];
    let mut j = i;
    while j > 0 {
        j -= 1;
        if y[j] > y[i] {
            break;
        }
        if y[j] < left_min {
            left_min = y[j];
            left = j;
        }
    }
    let mut right = i;
    let mut right_min = y[i];
    let mut j = i;
    while j + 1 < y.len() {
        j += 1;
        if y[j] > y[i] {
            break;
        }
        if y[j] < right_min {
            right_min = y[j];
            right = j;
        }
    }
    (y[i] - left_min.max(right_min), left, right)
}

/// Full width at half prominence of the maximum at `i`.
fn half_prominence_width(
    x: &[f64],
    y: &[f64],
    i: usize,
    prom: f64,
    left: usize,
    right: usize,
) -> f64 {
    let level = y[i] - 0.5 * prom;
    let cross = |a: usize, b: usize| x[a] + (level - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let mut l = i;
    while l > left && y[l] > level {
        l -= 1;
    }
    let x_left = if y[l] < level { cross(l, l + 1) } else { x[l] };
    let mut r = i;
    while r < right && y[r] > level {
        r += 1;
    }
    let x_right = if y[r] < level { cross(r - 1, r) } else { x[r] };
    x_right - x_left
}

pub fn find_peaks(x: &[f64], y: &[f64]) -> Vec<Peak> {
    assert_eq!(x.len(), y.len(), "x and y must have equal length");
    local_maxima(y)
        .into_iter()
        .map(|i| {
            let (position, height) = quadratic_vertex(x, y, i);
            let (prom, left, right) = prominence(y, i);
            Peak {
                index: i,
                position,
                height,
                prominence: prom,
                width: half_prominence_width(x, y, i, prom, left, right),
            }
        })
        .collect()
}

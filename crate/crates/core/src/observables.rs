// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Quantities extracted from density matrices and trajectories.

use std::f64::consts::PI;
use std::time::Duration;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{SystemParams, TermSelection};
use crate::lindblad::{purity, Termination};
use crate::ode::StepStats;
use crate::operators::{CMatrix, OperatorSet};

/// Observables at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `Tr[σ+σ− ρ]`.
    pub w_e: f64,
    /// `Tr[a†a ρ]`.
    pub n_ph: f64,
    pub purity: f64,
    /// `Tr ρ − 1`.
    pub trace_dev: f64,
    pub top_fock_pop: f64,
    pub min_eigenvalue: f64,
}

/// Read the observables off `rho`. The diagonal of `rho` suffices because
/// `σ+σ−` and `a†a` are diagonal in the product basis.
pub fn measure(ops: &OperatorSet, t: f64, rho: &CMatrix, min_eigenvalue: f64) -> Sample {
    let n_max = ops.n_max();
    let levels = n_max + 1;
    let mut w_e = 0.0;
    let mut n_ph = 0.0;
    let mut tr = 0.0;
    for k in 0..ops.dim() {
        let p = rho[[k, k]].re;
        tr += p;
        n_ph += ops.n_op[[k, k]].re * p;
        if k >= levels {
            w_e += p;
        }
    }
    Sample {
        t,
        w_e,
        n_ph,
        purity: purity(rho),
        trace_dev: tr - 1.0,
        top_fock_pop: rho[[n_max, n_max]].re + rho[[levels + n_max, levels + n_max]].re,
        min_eigenvalue,
    }
}

/// Everything needed to identify a run after the fact.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub params: SystemParams,
    pub drive: String,
    pub terms: TermSelection,
    pub n_max: usize,
    pub initial_state: String,
    pub scheme: &'static str,
    pub stats: StepStats,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: Termination,
    pub metadata: RunMetadata,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn w_e(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.w_e).collect()
    }

    pub fn n_ph(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.n_ph).collect()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn max_trace_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.trace_dev.abs())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_purity(&self) -> f64 {
        self.samples.iter().map(|s| s.purity).fold(0.0, f64::max)
    }

    /// Samples in the trailing `fraction` of the time span.
    pub fn trailing_window(&self, fraction: f64) -> Result<&[Sample]> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::invalid(
                "window_fraction",
                format!("must lie in (0, 1], got {fraction}"),
            ));
        }
        let (first, last) = match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => return Ok(&[]),
        };
        let start = last - fraction * (last - first);
        let idx = self.samples.partition_point(|s| s.t < start);
        Ok(&self.samples[idx..])
    }

    fn require_completed(&self) -> Result<()> {
        if self.status.is_completed() {
            Ok(())
        } else {
            Err(Error::IncompleteTrajectory(self.status.name().to_string()))
        }
    }
}

/// Oscillation band of `w_e` and mean photon number over a trailing window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub w_e_min: f64,
    pub w_e_max: f64,
    pub w_e_mean: f64,
    pub n_ph_mean: f64,
    /// Half-window means of `w_e` agree within the drift tolerance.
    pub stabilized: bool,
    /// Same criterion applied to `n_ph`.
    pub n_ph_stabilized: bool,
}

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.25;
pub const DEFAULT_DRIFT_TOLERANCE: f64 = 0.05;
pub const MIN_WINDOW_SAMPLES: usize = 50;

pub fn steady_envelope(traj: &Trajectory, window_fraction: f64) -> Result<Envelope> {
    steady_envelope_with(traj, window_fraction, DEFAULT_DRIFT_TOLERANCE)
}

pub fn steady_envelope_with(
    traj: &Trajectory,
    window_fraction: f64,
    drift_tolerance: f64,
) -> Result<Envelope> {
    traj.require_completed()?;
    window_envelope(traj.trailing_window(window_fraction)?, drift_tolerance)
}

/// Envelope of an arbitrary run of samples.
pub fn window_envelope(window: &[Sample], drift_tolerance: f64) -> Result<Envelope> {
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::TooShort {
            found: window.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let w: Vec<f64> = window.iter().map(|s| s.w_e).collect();
    let n: Vec<f64> = window.iter().map(|s| s.n_ph).collect();
    let (w_e_min, w_e_max) = w
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(Envelope {
        w_e_min,
        w_e_max,
        w_e_mean: mean(&w),
        n_ph_mean: mean(&n),
        stabilized: halves_agree(&w, drift_tolerance),
        n_ph_stabilized: halves_agree(&n, drift_tolerance),
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn halves_agree(x: &[f64], tolerance: f64) -> bool {
    let mid = x.len() / 2;
    let a = mean(&x[..mid]);
    let b = mean(&x[mid..]);
    let scale = a.abs().max(b.abs());
    scale == 0.0 || (a - b).abs() < tolerance * scale
}

/// Mean spacing of sample times.
fn sample_spacing(window: &[Sample]) -> f64 {
    (window[window.len() - 1].t - window[0].t) / (window.len() - 1) as f64
}

fn check_sampling(window: &[Sample], band_center: f64) -> Result<f64> {
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::TooShort {
            found: window.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let dt = sample_spacing(window);
    let per_period = 2.0 * PI / band_center / dt;
    if per_period < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSampling { per_period });
    }
    Ok(dt)
}

/// Half the peak-to-peak of `w_e` after subtracting a centred moving
/// average over `detrend_period`, on the trailing `window_fraction`.
///
/// `band_center` is the expected ripple frequency; it only gates the
/// sampling-rate check here.
pub fn fast_oscillation_amplitude(
    traj: &Trajectory,
    band_center: f64,
    detrend_period: f64,
    window_fraction: f64,
) -> Result<f64> {
    traj.require_completed()?;
    let window = traj.trailing_window(window_fraction)?;
    let dt = check_sampling(window, band_center)?;
    let w: Vec<f64> = window.iter().map(|s| s.w_e).collect();
    let residual = detrend(&w, (detrend_period / dt).round().max(1.0) as usize);
    if residual.is_empty() {
        return Err(Error::TooShort {
            found: w.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let (lo, hi) = residual
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(0.5 * (hi - lo))
}

/// Residual of `x` against its running mean over `span` samples. Only
/// positions whose full averaging window fits inside `x` are returned.
pub fn detrend(x: &[f64], span: usize) -> Vec<f64> {
    if span == 0 || x.len() < span {
        return Vec::new();
    }
    let half = span / 2;
    let mut out = Vec::with_capacity(x.len() - span + 1);
    let mut acc: f64 = x[..span].iter().sum();
    for start in 0..=x.len() - span {
        if start > 0 {
            acc += x[start + span - 1] - x[start - 1];
        }
        out.push(x[start + half] - acc / span as f64);
    }
    out
}

/// Single-bin discrete Fourier amplitude at `band_center` of the
/// detrended `w_e` residual, truncated to a whole number of periods. For a
/// pure sinusoid this equals its amplitude.
pub fn fourier_amplitude(
    traj: &Trajectory,
    band_center: f64,
    detrend_period: f64,
    window_fraction: f64,
) -> Result<f64> {
    traj.require_completed()?;
    let window = traj.trailing_window(window_fraction)?;
    let dt = check_sampling(window, band_center)?;
    let span = (detrend_period / dt).round().max(1.0) as usize;
    let w: Vec<f64> = window.iter().map(|s| s.w_e).collect();
    let residual = detrend(&w, span);
    let period_samples = 2.0 * PI / band_center / dt;
    let whole =
        ((residual.len() as f64 / period_samples).floor() * period_samples).round() as usize;
    if whole == 0 {
        return Err(Error::TooShort {
            found: residual.len(),
            required: period_samples.ceil() as usize,
        });
    }
    let offset = span / 2;
    let first = residual.len() - whole;
    let acc: Complex64 = residual[first..]
        .iter()
        .enumerate()
        .map(|(k, r)| Complex64::from_polar(*r, -band_center * window[first + k + offset].t))
        .sum();
    Ok(2.0 * acc.norm() / whole as f64)
}

// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form estimates and the bare-cavity moment equations.
//!
//! For the bare cavity `H = ω(t) a†a + i f(t) (a² − a†²)` with
//! `f = ω̇ / 4ω` and cavity loss `κ D[a]`, the moments `n = ⟨a†a⟩` and
//! `s = ⟨a²⟩` close exactly:
//!
//! ```text
//! dn/dt = −4 f Re s − κ n
//! ds/dt = −(κ + 2iω) s − f (4n + 2)
//! ```

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::drive::{Cosine, Drive};
use crate::error::{Error, Result};
use crate::ode::{AdaptiveRk, StepControl, DOPRI5};

/// Parameters of an instantaneous frequency switch `ω1 → ω2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchSpec {
    pub omega1: f64,
    pub omega2: f64,
    pub epsilon: f64,
    pub g: f64,
}

impl SwitchSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("epsilon", self.epsilon),
            ("g", self.g),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and positive, got {x}"),
                ));
            }
        }
        Ok(())
    }
}

/// Smallest `|ε − ω2| / g` for which [`w_casimir`] is evaluated.
pub const CASIMIR_MIN_DETUNING: f64 = 3.0;

/// Qubit excitation from absorbing photon pairs created by the switch:
/// `g² / (ε − ω2)² · (ω2 − ω1)² / (4 ω1 ω2)`.
pub fn w_casimir(spec: &SwitchSpec) -> Result<f64> {
    spec.validate()?;
    let gap = (spec.epsilon - spec.omega2).abs();
    let limit = CASIMIR_MIN_DETUNING * spec.g;
    if gap < limit {
        return Err(Error::NearResonance { gap, limit });
    }
    let jump = spec.omega2 - spec.omega1;
    Ok(spec.g.powi(2) / gap.powi(2) * jump.powi(2) / (4.0 * spec.omega1 * spec.omega2))
}

/// Qubit excitation through the counterrotating channel:
/// `g² (ω2 − ω1)² / ((ω2 + ε)² (ω1 + ε)²)`.
pub fn w_lamb(spec: &SwitchSpec) -> Result<f64> {
    spec.validate()?;
    let jump = spec.omega2 - spec.omega1;
    Ok(spec.g.powi(2) * jump.powi(2)
        / ((spec.omega2 + spec.epsilon).powi(2) * (spec.omega1 + spec.epsilon).powi(2)))
}

/// Threshold amplitude of the lossy parametrically driven bare cavity,
/// `(2ω0/Ω) √(κ² + (Ω − 2ω0)²)`.
pub fn d_crit_res(omega0: f64, modulation: f64, kappa: f64) -> Result<f64> {
    positive("omega0", omega0)?;
    positive("Omega", modulation)?;
    non_negative("kappa", kappa)?;
    Ok(2.0 * omega0 / modulation * kappa.hypot(modulation - 2.0 * omega0))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and positive, got {x}"),
        ))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and non-negative, got {x}"),
        ))
    }
}

/// `n = Tr[a†a ρ]`, `s = Tr[a² ρ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub n: f64,
    pub s: Complex64,
}

impl MomentState {
    pub const VACUUM: MomentState = MomentState {
        n: 0.0,
        s: Complex64 { re: 0.0, im: 0.0 },
    };

    fn to_vec(self) -> Vec<f64> {
        vec![self.n, self.s.re, self.s.im]
    }

    fn from_slice(y: &[f64]) -> Self {
        MomentState {
            n: y[0],
            s: Complex64::new(y[1], y[2]),
        }
    }
}

/// Bare cavity driven by `ω(t) = ω0 + d cos(Ω t)` with loss `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentParams {
    pub omega0: f64,
    pub d: f64,
    pub modulation: f64,
    pub kappa: f64,
}

impl MomentParams {
    pub fn validate(&self) -> Result<()> {
        positive("omega0", self.omega0)?;
        positive("Omega", self.modulation)?;
        non_negative("kappa", self.kappa)?;
        non_negative("d", self.d)?;
        if self.d >= self.omega0 {
            return Err(Error::invalid("d", "must stay below omega0"));
        }
        Ok(())
    }

    fn drive(&self) -> Cosine {
        Cosine {
            omega0: self.omega0,
            d: self.d,
            modulation: self.modulation,
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.modulation
    }
}

/// Right-hand side of the moment equations. `source` scales the `−2f`
/// term of `ds/dt`; zero gives the homogeneous part.
fn moment_rhs(drive: &Cosine, kappa: f64, source: f64, t: f64, y: &[f64], dy: &mut [f64]) {
    let w = drive.value(t);
    let f = drive.derivative(t) / (4.0 * w);
    let (n, sr, si) = (y[0], y[1], y[2]);
    dy[0] = -4.0 * f * sr - kappa * n;
    // −(κ + 2iω)(sr + i si)
    dy[1] = -kappa * sr + 2.0 * w * si - f * 4.0 * n - 2.0 * f * source;
    dy[2] = -kappa * si - 2.0 * w * sr;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentStatus {
    Completed,
    /// Photon number left the finite range; integration stopped at `t`.
    Diverging {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<MomentState>,
    pub status: MomentStatus,
}

/// Photon numbers above this are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

fn moment_control(period: f64) -> StepControl {
    StepControl {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        dt_initial: 1e-3 * period,
        dt_max: 0.02 * period,
        dt_min: 1e-14 * period,
    }
}

/// Integrate the moment equations from `state0`, sampling every
/// `sample_interval` up to `t_end`.
pub fn integrate_moments(
    params: &MomentParams,
    state0: MomentState,
    t_end: f64,
    sample_interval: f64,
) -> Result<MomentTrajectory> {
    params.validate()?;
    positive("t_end", t_end)?;
    positive("sample_interval", sample_interval)?;
    if state0.n.is_nan() || state0.n < 0.0 {
        return Err(Error::invalid("state0.n", "must be non-negative"));
    }
    let drive = params.drive();
    let cavity_period = 2.0 * PI / params.omega0;
    let mut solver = AdaptiveRk::new(&DOPRI5, moment_control(cavity_period), 0.0, state0.to_vec());
    let mut rhs = |t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| {
        moment_rhs(&drive, params.kappa, 1.0, t, y, dy);
        Ok(())
    };
    let mut times = vec![0.0];
    let mut states = vec![state0];
    let mut k: u64 = 1;
    loop {
        let target = (k as f64 * sample_interval).min(t_end);
        solver.advance_to(target, &mut rhs)?;
        let y = MomentState::from_slice(solver.state());
        if !(y.n.is_finite() && y.n.abs() < DIVERGENCE_LIMIT) {
            return Ok(MomentTrajectory {
                times,
                states,
                status: MomentStatus::Diverging { t: target },
            });
        }
        times.push(target);
        states.push(y);
        if target >= t_end {
            break;
        }
        k += 1;
    }
    Ok(MomentTrajectory {
        times,
        states,
        status: MomentStatus::Completed,
    })
}

/// Largest Floquet exponent of the homogeneous moment equations, from the
/// one-period monodromy matrix. Positive means unbounded photon growth.
pub fn floquet_growth_rate(params: &MomentParams) -> Result<f64> {
    params.validate()?;
    let drive = params.drive();
    let period = params.period();
    let mut columns = [[0.0; 3]; 3];
    for (j, column) in columns.iter_mut().enumerate() {
        let mut e = vec![0.0; 3];
        e[j] = 1.0;
        let control = moment_control(period.min(2.0 * PI / params.omega0));
        let mut solver = AdaptiveRk::new(&DOPRI5, control, 0.0, e);
        let mut rhs = |t: f64, y: &Vec<f64>, dy: &mut Vec<f64>| {
            moment_rhs(&drive, params.kappa, 0.0, t, y, dy);
            Ok(())
        };
        solver.advance_to(period, &mut rhs)?;
        column.copy_from_slice(solver.state());
    }
    let m = Matrix3::from_fn(|i, j| columns[j][i]);
    let radius = m
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(radius.ln() / period)
}

/// Drive amplitude at which [`floquet_growth_rate`] changes sign, found by
/// bisection on `[0, d_max]` to absolute accuracy `tol`.
pub fn bisect_d_crit(
    omega0: f64,
    modulation: f64,
    kappa: f64,
    d_max: f64,
    tol: f64,
) -> Result<f64> {
    positive("tol", tol)?;
    let rate = |d: f64| {
        floquet_growth_rate(&MomentParams {
            omega0,
            d,
            modulation,
            kappa,
        })
    };
    let (mut lo, mut hi) = (0.0, d_max);
    if rate(lo)? > 0.0 {
        return Err(Error::invalid("kappa", "undriven cavity already grows"));
    }
    if rate(hi)? <= 0.0 {
        return Err(Error::invalid(
            "d_max",
            format!("no growth up to d = {d_max}; threshold not bracketed"),
        ));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Embedded explicit Runge–Kutta integration with adaptive step control.
//!
//! The driver is generic over [`OdeState`] so the same code steps density
//! matrices and the small moment systems in [`crate::analytic`]. Schemes are
//! plain Butcher tableaus looked up by name with [`scheme`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Butcher tableau of an embedded pair. `e` holds the difference between
/// the propagated and embedded weights.
#[derive(Debug)]
pub struct Tableau {
    pub name: &'static str,
    /// Order of the propagated solution.
    pub order: u32,
    pub c: &'static [f64],
    pub a: &'static [&'static [f64]],
    pub b: &'static [f64],
    pub e: &'static [f64],
    /// Last stage is evaluated at the new solution (first-same-as-last).
    pub fsal: bool,
}

impl PartialEq for Tableau {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Tableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

pub static DOPRI5: Tableau = Tableau {
    name: "dopri5",
    order: 5,
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
        ],
        &[
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
        ],
        &[
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ],
    b: &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    e: &[
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ],
    fsal: true,
};

pub static CASH_KARP: Tableau = Tableau {
    name: "cash-karp",
    order: 5,
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
        &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
        &[
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ],
    b: &[
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ],
    e: &[
        37.0 / 378.0 - 2825.0 / 27648.0,
        0.0,
        250.0 / 621.0 - 18575.0 / 48384.0,
        125.0 / 594.0 - 13525.0 / 55296.0,
        -277.0 / 14336.0,
        512.0 / 1771.0 - 1.0 / 4.0,
    ],
    fsal: false,
};

static SCHEMES: &[&Tableau] = &[&DOPRI5, &CASH_KARP];

pub const DEFAULT_SCHEME: &str = "dopri5";

pub fn scheme(name: &str) -> Result<&'static Tableau> {
    SCHEMES
        .iter()
        .copied()
        .find(|t| t.name == name)
        .ok_or_else(|| Error::UnknownScheme(name.to_string()))
}

pub fn scheme_names() -> impl Iterator<Item = &'static str> {
    SCHEMES.iter().map(|t| t.name)
}

/// Vector-space operations the stepper needs.
pub trait OdeState: Clone {
    fn copy_from(&mut self, other: &Self);

    /// `self += alpha * x`.
    fn axpy(&mut self, alpha: f64, x: &Self);

    /// `self = alpha * x`.
    fn assign_scaled(&mut self, alpha: f64, x: &Self);

    /// RMS of `err` weighted by `abs_tol + rel_tol * max(|y0|, |y1|)`.
    fn weighted_rms(err: &Self, y0: &Self, y1: &Self, rel_tol: f64, abs_tol: f64) -> f64;
}

impl OdeState for Array2<Complex64> {
    fn copy_from(&mut self, other: &Self) {
        self.assign(other);
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        self.zip_mut_with(x, |y, xv| *y += xv * alpha);
    }

    fn assign_scaled(&mut self, alpha: f64, x: &Self) {
        self.zip_mut_with(x, |y, xv| *y = xv * alpha);
    }

    fn weighted_rms(err: &Self, y0: &Self, y1: &Self, rel_tol: f64, abs_tol: f64) -> f64 {
        let mut acc = 0.0;
        for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
            let scale = abs_tol + rel_tol * a.norm().max(b.norm());
            let r = e.norm() / scale;
            acc += r * r;
        }
        (acc / err.len() as f64).sqrt()
    }
}

impl OdeState for Vec<f64> {
    fn copy_from(&mut self, other: &Self) {
        self.copy_from_slice(other);
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        for (y, xv) in self.iter_mut().zip(x) {
            *y += alpha * xv;
        }
    }

    fn assign_scaled(&mut self, alpha: f64, x: &Self) {
        for (y, xv) in self.iter_mut().zip(x) {
            *y = alpha * xv;
        }
    }

    fn weighted_rms(err: &Self, y0: &Self, y1: &Self, rel_tol: f64, abs_tol: f64) -> f64 {
        let mut acc = 0.0;
        for ((e, a), b) in err.iter().zip(y0).zip(y1) {
            let r = e.abs() / (abs_tol + rel_tol * a.abs().max(b.abs()));
            acc += r * r;
        }
        (acc / err.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub dt_min: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const SAFETY: f64 = 0.9;
const SHRINK_LIMIT: f64 = 0.2;
const GROW_LIMIT: f64 = 5.0;

/// Adaptive integrator holding the current `(t, y)` and its work buffers.
pub struct AdaptiveRk<S: OdeState> {
    tableau: &'static Tableau,
    control: StepControl,
    t: f64,
    h: f64,
    y: S,
    k: Vec<S>,
    stage: S,
    y_new: S,
    err: S,
    k0_valid: bool,
    stats: StepStats,
}

impl<S: OdeState> AdaptiveRk<S> {
    pub fn new(tableau: &'static Tableau, control: StepControl, t0: f64, y0: S) -> Self {
        let k = vec![y0.clone(); tableau.stages()];
        AdaptiveRk {
            tableau,
            control,
            t: t0,
            h: control.dt_initial.min(control.dt_max),
            stage: y0.clone(),
            y_new: y0.clone(),
            err: y0.clone(),
            y: y0,
            k,
            k0_valid: false,
            stats: StepStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &S {
        &self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Apply a small projection (e.g. symmetrization) to the current state.
    /// The cached derivative at `t` is kept, so the change must be at the
    /// level of rounding error.
    pub fn project(&mut self, f: impl FnOnce(&mut S)) {
        f(&mut self.y);
    }

    /// Take one accepted step, never stepping past `t_stop`. Rejected
    /// attempts are retried internally with a smaller step.
    pub fn step<F>(&mut self, t_stop: f64, rhs: &mut F) -> Result<()>
    where
        F: FnMut(f64, &S, &mut S) -> Result<()>,
    {
        let tab = self.tableau;
        let n = tab.stages();
        if !self.k0_valid {
            rhs(self.t, &self.y, &mut self.k[0])?;
            self.stats.evaluations += 1;
            self.k0_valid = true;
        }
        let exponent = 1.0 / tab.order as f64;
        loop {
            let remaining = t_stop - self.t;
            let mut h = self.h.min(self.control.dt_max);
            let truncated = h >= remaining * (1.0 - 1e-12);
            if truncated {
                h = remaining;
            }
            if h < self.control.dt_min {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }

            for s in 1..n {
                self.stage.copy_from(&self.y);
                for (j, &a) in tab.a[s].iter().enumerate() {
                    if a != 0.0 {
                        self.stage.axpy(h * a, &self.k[j]);
                    }
                }
                let (_, tail) = self.k.split_at_mut(s);
                rhs(self.t + tab.c[s] * h, &self.stage, &mut tail[0])?;
                self.stats.evaluations += 1;
            }

            self.y_new.copy_from(&self.y);
            for (j, &b) in tab.b.iter().enumerate() {
                if b != 0.0 {
                    self.y_new.axpy(h * b, &self.k[j]);
                }
            }
            let mut first = true;
            for (j, &e) in tab.e.iter().enumerate() {
                if e == 0.0 {
                    continue;
                }
                if first {
                    self.err.assign_scaled(h * e, &self.k[j]);
                    first = false;
                } else {
                    self.err.axpy(h * e, &self.k[j]);
                }
            }
            let norm = S::weighted_rms(
                &self.err,
                &self.y,
                &self.y_new,
                self.control.rel_tol,
                self.control.abs_tol,
            );

            if norm.is_finite() && norm <= 1.0 {
                let factor = if norm == 0.0 {
                    GROW_LIMIT
                } else {
                    (SAFETY * norm.powf(-exponent)).clamp(SHRINK_LIMIT, GROW_LIMIT)
                };
                self.t = if truncated { t_stop } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.y_new);
                if tab.fsal {
                    self.k.swap(0, n - 1);
                } else {
                    self.k0_valid = false;
                }
                let proposal = h * factor;
                self.h = if truncated {
                    self.h.max(proposal)
                } else {
                    proposal
                }
                .min(self.control.dt_max);
                self.stats.accepted += 1;
                return Ok(());
            }

            self.stats.rejected += 1;
            let factor = if norm.is_finite() {
                (SAFETY * norm.powf(-exponent)).clamp(SHRINK_LIMIT, 1.0)
            } else {
                SHRINK_LIMIT
            };
            self.h = h * factor;
        }
    }

    /// Step until `t_stop` is reached exactly.
    pub fn advance_to<F>(&mut self, t_stop: f64, rhs: &mut F) -> Result<()>
    where
        F: FnMut(f64, &S, &mut S) -> Result<()>,
    {
        while self.t < t_stop {
            self.step(t_stop, rhs)?;
        }
        Ok(())
    }
}

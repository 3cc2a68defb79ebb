// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Master equation `∂tρ = −i[H(t), ρ] + Γ[ρ]` with cavity loss (κ), qubit
//! relaxation (γ) and pure dephasing (γφ):
//!
//! ```text
//! Γ[ρ] = κ(aρa† − {a†a, ρ}/2) + γ(σ−ρσ+ − {σ+σ−, ρ}/2) + γφ(σzρσz − ρ)
//! ```
//!
//! [`dissipator`] and [`rhs`] are dense reference implementations. The
//! integrator uses [`LindbladGenerator`], which applies the same generator
//! through row-sparse operator copies.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    assemble_hamiltonian, casimir_coefficient, interaction_operator, squeezing_operator,
    SystemParams, TermSelection,
};
use crate::observables::{measure, RunMetadata, Sample, Trajectory};
use crate::ode::{self, AdaptiveRk, StepControl, Tableau};
use crate::operators::{
    anticommutator, commutator, dagger, trace, CMatrix, CVector, OperatorSet, Qubit, SparseRows, I,
};

/// Density matrix on the joint space, tagged with a description of how it
/// was prepared.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    label: String,
}

const INPUT_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity to `1e-8`.
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("rho", "matrix is not square"));
        }
        let tr = trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > INPUT_TOL {
            return Err(Error::invalid("rho", format!("trace is {tr}, expected 1")));
        }
        let asym = (&matrix - &dagger(&matrix))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > INPUT_TOL {
            return Err(Error::invalid(
                "rho",
                format!("not Hermitian (deviation {asym:e})"),
            ));
        }
        let lowest = min_eigenvalue(&matrix);
        if lowest < -INPUT_TOL {
            return Err(Error::invalid(
                "rho",
                format!("not positive semidefinite (eigenvalue {lowest:e})"),
            ));
        }
        Ok(DensityMatrix {
            matrix,
            label: label.into(),
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn from_pure(psi: &CVector, label: impl Into<String>) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::invalid(
                "psi",
                "state vector has zero or non-finite norm",
            ));
        }
        let v = psi.mapv(|z| z / norm);
        let n = v.len();
        let matrix = CMatrix::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj());
        DensityMatrix::new(matrix, label)
    }

    pub fn basis(ops: &OperatorSet, qubit: Qubit, fock_level: usize) -> Result<Self> {
        let q = match qubit {
            Qubit::Ground => 'g',
            Qubit::Excited => 'e',
        };
        DensityMatrix::from_pure(
            &ops.basis_state(qubit, fock_level)?,
            format!("|{q},{fock_level}>"),
        )
    }

    /// Bare ground state `|g,0⟩⟨g,0|`.
    pub fn ground(ops: &OperatorSet) -> Self {
        DensityMatrix::basis(ops, Qubit::Ground, 0).expect("level 0 always exists")
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = CMatrix::eye(dim).mapv(|z| z / dim as f64);
        DensityMatrix {
            matrix,
            label: "maximally mixed".into(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `ρ ← (ρ + ρ†)/2` in place.
pub fn hermitize(rho: &mut CMatrix) {
    let n = rho.nrows();
    for i in 0..n {
        rho[[i, i]].im = 0.0;
        for j in i + 1..n {
            let avg = (rho[[i, j]] + rho[[j, i]].conj()) * 0.5;
            rho[[i, j]] = avg;
            rho[[j, i]] = avg.conj();
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    let n = rho.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| rho[[i, j]]);
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `Tr ρ²` for Hermitian `ρ`.
pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Dense evaluation of `Γ[ρ]`.
pub fn dissipator(ops: &OperatorSet, params: &SystemParams, rho: &CMatrix) -> CMatrix {
    let half = |m: CMatrix| m.mapv(|z| z * 0.5);
    let cavity = ops.a.dot(rho).dot(&ops.a_dag) - half(anticommutator(&ops.n_op, rho));
    let excited = ops.sigma_plus.dot(&ops.sigma_minus);
    let qubit = ops.sigma_minus.dot(rho).dot(&ops.sigma_plus) - half(anticommutator(&excited, rho));
    let dephasing = ops.sigma_z.dot(rho).dot(&ops.sigma_z) - rho;
    cavity.mapv(|z| z * params.kappa)
        + qubit.mapv(|z| z * params.gamma)
        + dephasing.mapv(|z| z * params.gamma_phi)
}

/// Dense evaluation of `−i[H(t), ρ] + Γ[ρ]`.
pub fn rhs(
    ops: &OperatorSet,
    params: &SystemParams,
    drive: &dyn Drive,
    terms: TermSelection,
    t: f64,
    rho: &CMatrix,
) -> Result<CMatrix> {
    let h = assemble_hamiltonian(ops, params, drive, terms, t)?;
    Ok(commutator(&h, rho).mapv(|z| z * -I) + dissipator(ops, params, rho))
}

/// Lindblad generator with cached operator structure. Writes
/// `−i(H_eff ρ − ρ H_eff†) + κ aρa† + γ σ−ρσ+ + γφ σzρσz` where
/// `H_eff = H − (i/2)(κ a†a + γ σ+σ− + γφ)`.
pub struct LindbladGenerator<'a> {
    drive: &'a dyn Drive,
    params: SystemParams,
    dim: usize,
    photons: Vec<f64>,
    excited: Vec<f64>,
    sz: Vec<f64>,
    squeezing: Option<SparseRows>,
    interaction: Option<SparseRows>,
    lowering: SparseRows,
    qubit_lowering: SparseRows,
}

impl<'a> LindbladGenerator<'a> {
    pub fn new(
        ops: &OperatorSet,
        params: &SystemParams,
        drive: &'a dyn Drive,
        terms: TermSelection,
    ) -> Self {
        let squeezing = terms
            .include_casimir
            .then(|| SparseRows::from_dense(&squeezing_operator(ops)));
        let v = interaction_operator(ops, terms.interaction).mapv(|z| z * params.g);
        let interaction = Some(SparseRows::from_dense(&v)).filter(|s| !s.is_empty());
        LindbladGenerator {
            drive,
            params: *params,
            dim: ops.dim(),
            photons: ops.photon_numbers(),
            excited: ops.excitation_flags(),
            sz: ops.sigma_z.diag().iter().map(|z| z.re).collect(),
            squeezing,
            interaction,
            lowering: SparseRows::from_dense(&ops.a),
            qubit_lowering: SparseRows::from_dense(&ops.sigma_minus),
        }
    }

    pub fn apply(&self, t: f64, rho: &CMatrix, out: &mut CMatrix) -> Result<()> {
        let omega = self.drive.value(t);
        let c = casimir_coefficient(self.drive, t)?;
        let p = &self.params;
        let dim = self.dim;
        let rho_s = rho
            .as_slice()
            .expect("density matrices are stored row-major");
        let out_s = out.as_slice_mut().expect("row-major output");

        // K = H_eff ρ
        for i in 0..dim {
            let n = self.photons[i];
            let e = self.excited[i];
            let diag = Complex64::new(
                omega * n + p.epsilon * e,
                -0.5 * (p.kappa * n + p.gamma * e + p.gamma_phi),
            );
            let row = i * dim..(i + 1) * dim;
            for (o, r) in out_s[row.clone()].iter_mut().zip(&rho_s[row]) {
                *o = diag * r;
            }
        }
        if let Some(s) = &self.squeezing {
            if c != 0.0 {
                s.mul_add(Complex64::new(c, 0.0), rho_s, out_s);
            }
        }
        if let Some(v) = &self.interaction {
            v.mul_add(Complex64::new(1.0, 0.0), rho_s, out_s);
        }

        // −iK + (−iK)†
        for i in 0..dim {
            let kii = out_s[i * dim + i];
            out_s[i * dim + i] = Complex64::new(2.0 * kii.im, 0.0);
            for j in i + 1..dim {
                let kij = out_s[i * dim + j];
                let kji = out_s[j * dim + i];
                out_s[i * dim + j] = -I * kij + I * kji.conj();
                out_s[j * dim + i] = -I * kji + I * kij.conj();
            }
        }

        if p.kappa != 0.0 {
            self.lowering.sandwich_add(p.kappa, rho_s, out_s);
        }
        if p.gamma != 0.0 {
            self.qubit_lowering.sandwich_add(p.gamma, rho_s, out_s);
        }
        if p.gamma_phi != 0.0 {
            for i in 0..dim {
                let si = self.sz[i] * p.gamma_phi;
                for j in 0..dim {
                    out_s[i * dim + j] += rho_s[i * dim + j] * (si * self.sz[j]);
                }
            }
        }
        Ok(())
    }
}

/// Step control, sampling cadence and health thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: &'static Tableau,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_initial: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub sample_interval: f64,
    pub positivity_tol: f64,
    pub trace_tol: f64,
    /// Population of the highest Fock level that ends a run.
    pub top_level_guard: f64,
}

impl IntegratorConfig {
    pub const DEFAULT_REL_TOL: f64 = 1e-6;
    pub const DEFAULT_ABS_TOL: f64 = 1e-10;

    /// Defaults for a cavity of frequency `omega0`: `dt_max` is 2% of a
    /// cavity period and samples are taken 20 times per period.
    pub fn new(omega0: f64, t_end: f64) -> Self {
        let period = 2.0 * PI / omega0;
        IntegratorConfig {
            scheme: &ode::DOPRI5,
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
            dt_initial: 1e-3 * period,
            dt_max: 0.02 * period,
            t_end,
            sample_interval: period / 20.0,
            positivity_tol: 1e-7,
            trace_tol: 1e-6,
            top_level_guard: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("integrator.rel_tol", self.rel_tol),
            ("integrator.abs_tol", self.abs_tol),
            ("integrator.dt_initial", self.dt_initial),
            ("integrator.dt_max", self.dt_max),
            ("integrator.t_end", self.t_end),
            ("output.sample_interval", self.sample_interval),
            ("integrator.positivity_tol", self.positivity_tol),
            ("integrator.trace_tol", self.trace_tol),
            ("integrator.top_level_guard", self.top_level_guard),
        ];
        for (name, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and positive, got {x}"),
                ));
            }
        }
        if self.sample_interval > self.t_end {
            return Err(Error::invalid(
                "output.sample_interval",
                "must not exceed integrator.t_end",
            ));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            dt_initial: self.dt_initial,
            dt_max: self.dt_max,
            dt_min: 1e-9 * self.dt_max,
        }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// Top Fock level population exceeded the guard; raise `n_max`.
    TruncationBreach {
        t: f64,
        population: f64,
    },
    /// `|Tr ρ − 1|` exceeded the trace tolerance; tighten step control.
    TraceDrift {
        t: f64,
        deviation: f64,
    },
    /// Smallest eigenvalue fell below `−positivity_tol` at a sample.
    PositivityLoss {
        t: f64,
        min_eigenvalue: f64,
    },
    NonFiniteState {
        t: f64,
    },
    StepSizeUnderflow {
        t: f64,
    },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::TruncationBreach { .. } => "truncation_breach",
            Termination::TraceDrift { .. } => "trace_drift",
            Termination::PositivityLoss { .. } => "positivity_loss",
            Termination::NonFiniteState { .. } => "non_finite_state",
            Termination::StepSizeUnderflow { .. } => "step_size_underflow",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => f.write_str("completed"),
            Termination::TruncationBreach { t, population } => {
                write!(
                    f,
                    "truncation_breach at t={t} (top level population {population:e})"
                )
            }
            Termination::TraceDrift { t, deviation } => {
                write!(f, "trace_drift at t={t} (deviation {deviation:e})")
            }
            Termination::PositivityLoss { t, min_eigenvalue } => {
                write!(
                    f,
                    "positivity_loss at t={t} (eigenvalue {min_eigenvalue:e})"
                )
            }
            Termination::NonFiniteState { t } => write!(f, "non_finite_state at t={t}"),
            Termination::StepSizeUnderflow { t } => write!(f, "step_size_underflow at t={t}"),
        }
    }
}

pub fn integrate(
    ops: &OperatorSet,
    params: &SystemParams,
    drive: &dyn Drive,
    terms: TermSelection,
    rho0: &DensityMatrix,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_observed(ops, params, drive, terms, rho0, config, |_, _| {})
}

/// As [`integrate`], calling `observer(t, ρ)` at every sample time.
pub fn integrate_observed<F>(
    ops: &OperatorSet,
    params: &SystemParams,
    drive: &dyn Drive,
    terms: TermSelection,
    rho0: &DensityMatrix,
    config: &IntegratorConfig,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &CMatrix),
{
    params.validate()?;
    config.validate()?;
    if rho0.dim() != ops.dim() {
        return Err(Error::invalid(
            "rho0",
            format!(
                "dimension {} does not match operator space {}",
                rho0.dim(),
                ops.dim()
            ),
        ));
    }
    if drive.lower_bound().is_nan() || drive.lower_bound() <= 0.0 {
        return Err(Error::invalid(
            "drive",
            format!("{} reaches non-positive frequencies", drive.describe()),
        ));
    }

    let started = Instant::now();
    let generator = LindbladGenerator::new(ops, params, drive, terms);
    let mut rhs_fn = |t: f64, y: &CMatrix, dy: &mut CMatrix| generator.apply(t, y, dy);
    let mut solver = AdaptiveRk::new(
        config.scheme,
        config.step_control(),
        0.0,
        rho0.matrix().clone(),
    );

    let n_max = ops.n_max();
    let levels = n_max + 1;
    let top = |rho: &CMatrix| rho[[n_max, n_max]].re + rho[[levels + n_max, levels + n_max]].re;

    let mut samples: Vec<Sample> = Vec::new();
    let mut status = Termination::Completed;

    let mut take_sample =
        |t: f64, rho: &CMatrix, samples: &mut Vec<Sample>| -> Option<Termination> {
            let lowest = min_eigenvalue(rho);
            samples.push(measure(ops, t, rho, lowest));
            observer(t, rho);
            if !lowest.is_finite() {
                Some(Termination::NonFiniteState { t })
            } else if lowest < -config.positivity_tol {
                Some(Termination::PositivityLoss {
                    t,
                    min_eigenvalue: lowest,
                })
            } else {
                None
            }
        };

    if let Some(s) = take_sample(0.0, solver.state(), &mut samples) {
        status = s;
    }

    let mut k: u64 = 1;
    'run: while status.is_completed() {
        let t_target = (k as f64 * config.sample_interval).min(config.t_end);
        while solver.t() < t_target {
            match solver.step(t_target, &mut rhs_fn) {
                Ok(()) => {}
                Err(Error::StepSizeUnderflow { t, .. }) => {
                    status = Termination::StepSizeUnderflow { t };
                    break 'run;
                }
                Err(e) => return Err(e),
            }
            solver.project(hermitize);
            let t = solver.t();
            let rho = solver.state();
            let tr = trace(rho).re;
            let population = top(rho);
            let failure = if !(tr.is_finite() && population.is_finite()) {
                Some(Termination::NonFiniteState { t })
            } else if (tr - 1.0).abs() > config.trace_tol {
                Some(Termination::TraceDrift {
                    t,
                    deviation: tr - 1.0,
                })
            } else if population > config.top_level_guard {
                Some(Termination::TruncationBreach { t, population })
            } else {
                None
            };
            if let Some(f) = failure {
                status = f;
                if t > samples.last().map_or(f64::NEG_INFINITY, |s| s.t) {
                    take_sample(t, rho, &mut samples);
                }
                break 'run;
            }
        }
        if let Some(s) = take_sample(t_target, solver.state(), &mut samples) {
            status = s;
        }
        if t_target >= config.t_end {
            break;
        }
        k += 1;
    }

    Ok(Trajectory {
        samples,
        status,
        metadata: RunMetadata {
            params: *params,
            drive: drive.describe(),
            terms,
            n_max,
            initial_state: rho0.label().to_string(),
            scheme: config.scheme.name,
            stats: solver.stats(),
            wall_time: started.elapsed(),
        },
    })
}

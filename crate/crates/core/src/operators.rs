// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncated joint Hilbert space `C^2 ⊗ Fock(n_max)` and its operators.
//!
//! Basis layout is qubit-major: index `q * (n_max + 1) + n` with `q = 0` for
//! the ground state and `q = 1` for the excited state. Every state, matrix
//! and file produced by this crate uses this ordering.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;
pub type CVector = Array1<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Qubit basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Ground,
    Excited,
}

impl Qubit {
    fn offset(self) -> usize {
        match self {
            Qubit::Ground => 0,
            Qubit::Excited => 1,
        }
    }
}

/// Highest retained Fock level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub const MIN: usize = 2;

    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < Self::MIN {
            return Err(Error::CutoffTooSmall(n_max));
        }
        Ok(FockCutoff(n_max))
    }

    pub fn n_max(self) -> usize {
        self.0
    }

    /// Dimension of the joint space, `2 (n_max + 1)`.
    pub fn dim(self) -> usize {
        2 * (self.0 + 1)
    }
}

/// Index of `|qubit, fock_level⟩` in the qubit-major basis.
pub fn basis_index(cutoff: FockCutoff, qubit: Qubit, fock_level: usize) -> Result<usize> {
    let n_max = cutoff.n_max();
    if fock_level > n_max {
        return Err(Error::FockLevelOutOfRange {
            level: fock_level,
            n_max,
        });
    }
    Ok(qubit.offset() * (n_max + 1) + fock_level)
}

/// Dense operator matrices on the joint space. Immutable once built.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    cutoff: FockCutoff,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub n_op: CMatrix,
    pub a_sq: CMatrix,
    pub a_dag_sq: CMatrix,
    pub sigma_plus: CMatrix,
    pub sigma_minus: CMatrix,
    pub sigma_z: CMatrix,
    pub identity: CMatrix,
}

pub fn build_operators(cutoff: FockCutoff) -> OperatorSet {
    OperatorSet::new(cutoff)
}

impl OperatorSet {
    pub fn new(cutoff: FockCutoff) -> Self {
        let n_max = cutoff.n_max();
        let levels = n_max + 1;
        let dim = cutoff.dim();

        let mut a = CMatrix::zeros((dim, dim));
        let mut sigma_minus = CMatrix::zeros((dim, dim));
        for q in 0..2 {
            for n in 1..levels {
                a[[q * levels + n - 1, q * levels + n]] = Complex64::new((n as f64).sqrt(), 0.0);
            }
        }
        for n in 0..levels {
            sigma_minus[[n, levels + n]] = ONE;
        }

        let a_dag = dagger(&a);
        let sigma_plus = dagger(&sigma_minus);
        let n_op = CMatrix::from_diag(
            &(0..dim)
                .map(|k| Complex64::new((k % levels) as f64, 0.0))
                .collect::<CVector>(),
        );
        let a_sq = a.dot(&a);
        let a_dag_sq = dagger(&a_sq);
        let identity = CMatrix::eye(dim);
        let sigma_z = sigma_plus.dot(&sigma_minus).mapv(|z| z * 2.0) - &identity;

        OperatorSet {
            cutoff,
            a,
            a_dag,
            n_op,
            a_sq,
            a_dag_sq,
            sigma_plus,
            sigma_minus,
            sigma_z,
            identity,
        }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn n_max(&self) -> usize {
        self.cutoff.n_max()
    }

    pub fn dim(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn index(&self, qubit: Qubit, fock_level: usize) -> Result<usize> {
        basis_index(self.cutoff, qubit, fock_level)
    }

    /// Basis vector `|qubit, n⟩`.
    pub fn basis_state(&self, qubit: Qubit, fock_level: usize) -> Result<CVector> {
        let mut v = CVector::zeros(self.dim());
        v[self.index(qubit, fock_level)?] = ONE;
        Ok(v)
    }

    /// Photon number of each basis state, read off the `a†a` diagonal.
    pub fn photon_numbers(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.n_op[[k, k]].re).collect()
    }

    /// 1 for qubit-excited basis states, 0 otherwise.
    pub fn excitation_flags(&self) -> Vec<f64> {
        let levels = self.n_max() + 1;
        (0..self.dim())
            .map(|k| if k >= levels { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn commutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.dot(y) - y.dot(x)
}

pub fn anticommutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x.dot(y) + y.dot(x)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diag().sum()
}

/// Row-compressed copy of a square matrix, used on hot paths where the
/// operators have only a handful of entries per row.
#[derive(Debug, Clone)]
pub(crate) struct SparseRows {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseRows {
    pub(crate) fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[[i, j]];
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_start.push(cols.len());
        }
        SparseRows {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_start[i]..self.row_start[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// `out += scale * (self · rho)` with all matrices row-major `dim × dim`.
    pub(crate) fn mul_add(&self, scale: Complex64, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        for i in 0..dim {
            let out_row = &mut out[i * dim..(i + 1) * dim];
            for (k, v) in self.row(i) {
                let c = scale * v;
                let src = &rho[k * dim..(k + 1) * dim];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
    }

    /// `out += scale * (self · rho · self†)`.
    pub(crate) fn sandwich_add(&self, scale: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let dim = self.dim;
        for i in 0..dim {
            for (k, vik) in self.row(i) {
                let left = vik * scale;
                let out_row = &mut out[i * dim..(i + 1) * dim];
                let rho_row = &rho[k * dim..(k + 1) * dim];
                for (j, o) in out_row.iter_mut().enumerate() {
                    for (l, vjl) in self.row(j) {
                        *o += left * rho_row[l] * vjl.conj();
                    }
                }
            }
        }
    }
}

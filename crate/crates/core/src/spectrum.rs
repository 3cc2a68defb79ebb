// Copyright 2026 casimir-sim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Eigenstates of the static qubit–cavity Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::hamiltonian::{static_hamiltonian, Interaction, SystemParams};
use crate::lindblad::DensityMatrix;
use crate::operators::{CMatrix, CVector, OperatorSet};

/// Eigenbasis of the static Hamiltonian at cavity frequency `omega`,
/// sorted by energy.
#[derive(Debug, Clone)]
pub struct DressedBasis {
    pub energies: Vec<f64>,
    /// Column `k` is the eigenvector of `energies[k]`.
    pub vectors: CMatrix,
    /// `⟨σ+σ−⟩` of each eigenvector.
    pub qubit_weight: Vec<f64>,
}

impl DressedBasis {
    pub fn new(
        ops: &OperatorSet,
        params: &SystemParams,
        omega: f64,
        interaction: Interaction,
    ) -> Self {
        let h = static_hamiltonian(ops, params, omega, interaction);
        let dim = ops.dim();
        let eig = DMatrix::from_fn(dim, dim, |i, j| h[[i, j]]).symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_shape_fn((dim, dim), |(i, j)| eig.eigenvectors[(i, order[j])]);
        let levels = ops.n_max() + 1;
        let qubit_weight = (0..dim)
            .map(|k| (levels..dim).map(|i| vectors[[i, k]].norm_sqr()).sum())
            .collect();
        DressedBasis {
            energies,
            vectors,
            qubit_weight,
        }
    }

    pub fn state(&self, k: usize) -> CVector {
        self.vectors.column(k).to_owned()
    }

    /// `⟨k|ρ|k⟩`.
    pub fn population(&self, rho: &CMatrix, k: usize) -> f64 {
        let v = self.vectors.column(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..v.len() {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..v.len() {
                row += rho[[i, j]] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    /// Total population of eigenstates whose qubit weight exceeds 1/2.
    pub fn excited_population(&self, rho: &CMatrix) -> f64 {
        self.qubit_weight
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.5)
            .map(|(k, _)| self.population(rho, k))
            .sum()
    }
}

/// Ground state of the static Hamiltonian at cavity frequency `omega`.
pub fn dressed_ground(
    ops: &OperatorSet,
    params: &SystemParams,
    omega: f64,
    interaction: Interaction,
) -> Result<DensityMatrix> {
    let basis = DressedBasis::new(ops, params, omega, interaction);
    DensityMatrix::from_pure(&basis.state(0), "dressed")
}

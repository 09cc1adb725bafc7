//! Categorical model with r free parameters and its Fisher information algebra.
//!
//! The pmf places probability `theta[j]` on category `j` for `j < r` and the
//! residual `theta[r]` on the last category. The Fisher matrix and its inverse
//! have closed forms: `diag(1/theta_j) + (1/theta_res) 11^T` and
//! `diag(theta) - theta theta^T` (first r components), so no numeric inversion
//! is ever performed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-14;

/// A fully specified categorical distribution over r + 1 categories.
#[derive(Debug, Clone, Serialize)]
pub struct Model {
    theta: Vec<f64>,
    theta_min: f64,
}

impl Model {
    /// Validates and builds a model from the full probability vector
    /// (all r + 1 entries, including the residual category).
    pub fn new(theta: &[f64]) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::DomainError(
                "need at least two categories".into(),
            ));
        }
        if theta.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
            return Err(Error::NonPositiveProbability);
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(sum));
        }
        let theta: Vec<f64> = theta.iter().map(|&t| t / sum).collect();
        let theta_min = theta.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Model { theta, theta_min })
    }

    /// Full probability vector (r + 1 entries).
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Number of free parameters.
    pub fn r(&self) -> usize {
        self.theta.len() - 1
    }

    /// Smallest category probability.
    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    /// Fisher information matrix: diag(1/theta_1..1/theta_r) + (1/theta_res) 11^T.
    pub fn fisher(&self) -> SymMatrix {
        let r = self.r();
        let res = self.theta[r];
        let mut m = DMatrix::from_element(r, r, 1.0 / res);
        for j in 0..r {
            m[(j, j)] += 1.0 / self.theta[j];
        }
        SymMatrix::new_unchecked(m)
    }

    /// Closed-form Fisher inverse: diag(theta) - theta theta^T over the first
    /// r components (Sherman-Morrison-Woodbury).
    pub fn fisher_inverse(&self) -> SymMatrix {
        let r = self.r();
        let t = DVector::from_column_slice(&self.theta[..r]);
        let mut m = DMatrix::from_fn(r, r, |i, j| -t[i] * t[j]);
        for j in 0..r {
            m[(j, j)] += t[j];
        }
        SymMatrix::new_unchecked(m)
    }

    /// Symmetric positive-definite square root of the Fisher inverse,
    /// so S * S = fisher_inverse.
    pub fn fisher_inv_sqrt(&self) -> Result<SymMatrix> {
        self.fisher_inverse().sqrt_spd()
    }
}

/// Dense symmetric real matrix.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Builds from a dense matrix, checking symmetry within 1e-12 relative.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSymmetric);
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(SymMatrix { m })
    }

    pub(crate) fn new_unchecked(m: DMatrix<f64>) -> Self {
        SymMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Eigenvalues via the symmetric solver, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Spectral norm max{lambda_max, -lambda_min}.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .fold(0.0, |acc, l| acc.max(l.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Symmetric square root; every eigenvalue must exceed 1e-14.
    pub fn sqrt_spd(&self) -> Result<SymMatrix> {
        let eig = SymmetricEigen::new(self.m.clone());
        if let Some(&lam) = eig
            .eigenvalues
            .iter()
            .find(|&&l| l <= EIGEN_FLOOR)
        {
            return Err(Error::EigenFailure(lam));
        }
        let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let s = &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose();
        // symmetrize to wash out eigensolver round-off
        let s = (&s + s.transpose()) * 0.5;
        Ok(SymMatrix { m: s })
    }
}

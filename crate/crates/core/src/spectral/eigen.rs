//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use super::DenseSymMatrix;
use crate::{Error, Result};

pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Convergence threshold on the largest off-diagonal magnitude, relative to
/// `max(1, ||A||_F)`.
pub const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenpairs with eigenvalues ascending; column `k` of the row-major
/// `eigenvectors` matrix is the unit eigenvector for `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Component `i` of eigenvector `k`.
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.eigenvectors[i * self.order() + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.order()).map(|i| self.component(i, k)).collect()
    }

    /// `max_k ||A v_k - lambda_k v_k||_inf`.
    pub fn max_residual(&self, m: &DenseSymMatrix) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| m.get(i, j) * self.component(j, k)).sum();
                worst = worst.max((av - self.eigenvalues[k] * self.component(i, k)).abs());
            }
        }
        worst
    }
}

fn max_off_diagonal(a: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(a[i * n + j].abs());
        }
    }
    worst
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Each sweep annihilates every off-diagonal pair once in row order; the
/// loop ends when the largest off-diagonal entry drops below
/// [`JACOBI_OFF_DIAGONAL_TOL`] (scaled) or fails after
/// [`JACOBI_MAX_SWEEPS`].
pub fn eig_sym(m: &DenseSymMatrix) -> Result<SpectralDecomposition> {
    let n = m.order();
    let mut a = m.as_slice().to_vec();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frobenius = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = JACOBI_OFF_DIAGONAL_TOL * frobenius.max(1.0);

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&a, n);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                worst_off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- A J on columns p, q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // A <- J^T A on rows p, q.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]).then(x.cmp(&y)));
    let eigenvalues = order.iter().map(|&k| a[k * n + k]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[i * n + new_k] = v[i * n + old_k];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

//! Extreme eigenvalues and singular values of dense operators.
//!
//! Largest eigenpairs come from a Lanczos iteration with full
//! reorthogonalization, started from a fixed-seed Gaussian vector so results
//! depend only on the input. Small dense problems go to `nalgebra`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{dot, norm, RealMatrix};
use crate::rng::RandomStream;

/// Relative tolerance on the Ritz residual.
pub const TOLERANCE: f64 = 1e-9;
/// Iteration cap.
pub const MAX_ITER: usize = 10_000;

const START_SEED: u64 = 0x5eed_1a2c_0de0_f00d;

/// Top eigenpair of a symmetric operator of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Largest algebraic eigenvalue.
    pub value: f64,
    /// Unit eigenvector.
    pub vector: Vec<f64>,
}

/// Largest algebraic eigenpair of `op` (symmetric, dimension `n`).
pub fn lanczos_top(n: usize, mut op: impl FnMut(&[f64]) -> Vec<f64>) -> EigenPair {
    if n == 0 {
        return EigenPair { value: 0.0, vector: Vec::new() };
    }
    let mut rng = RandomStream::new(START_SEED).rng();
    let mut q: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nq = norm(&q);
    q.iter_mut().for_each(|x| *x /= nq);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let cap = n.min(MAX_ITER);
    let mut best = (0.0, Vec::new());
    for j in 0..cap {
        let mut w = op(&q);
        let a = dot(&q, &w);
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let d = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let bnext = norm(&w);
        let m = j + 1;
        let check = m < 16 || m % 4 == 0 || m == cap || bnext <= 1e-14;
        if check {
            let (theta, s) = tridiag_top(&alpha, &beta);
            let resid = bnext * s[m - 1].abs();
            best = (theta, s);
            if resid <= TOLERANCE * theta.abs().max(1e-300) || bnext <= 1e-14 * theta.abs().max(1.0) {
                break;
            }
        }
        if m == cap {
            break;
        }
        beta.push(bnext);
        q = w.into_iter().map(|x| x / bnext).collect();
    }
    let (value, s) = best;
    let mut vector = alloc::vec![0.0; n];
    for (coef, b) in s.iter().zip(&basis) {
        vector.iter_mut().zip(b).for_each(|(x, y)| *x += coef * y);
    }
    let nv = norm(&vector);
    if nv > 0.0 {
        vector.iter_mut().for_each(|x| *x /= nv);
    }
    EigenPair { value, vector }
}

fn tridiag_top(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let e = SymmetricEigen::new(t);
    let (idx, &val) = e
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(core::cmp::Ordering::Equal))
        .expect("nonempty");
    (val, e.eigenvectors.column(idx).iter().copied().collect())
}

/// Largest algebraic eigenpair of a symmetric matrix.
pub fn top_eigen(m: &RealMatrix) -> EigenPair {
    lanczos_top(m.rows(), |x| m.mul_vec(x))
}

/// Top singular triple `(σ₁, u, v)` with `M v = σ₁ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriple {
    /// Largest singular value.
    pub value: f64,
    /// Left singular vector.
    pub left: Vec<f64>,
    /// Right singular vector.
    pub right: Vec<f64>,
}

/// Largest singular triple via the Gram operator `MᵀM`.
pub fn top_singular(m: &RealMatrix) -> SingularTriple {
    let e = lanczos_top(m.cols(), |x| m.tr_mul_vec(&m.mul_vec(x)));
    let sigma = e.value.max(0.0).sqrt();
    let mut left = m.mul_vec(&e.vector);
    let nl = norm(&left);
    if nl > 0.0 {
        left.iter_mut().for_each(|x| *x /= nl);
    }
    SingularTriple { value: sigma, left, right: e.vector }
}

/// Largest singular value.
pub fn sigma_max(m: &RealMatrix) -> f64 {
    top_singular(m).value
}

/// Dense symmetric eigendecomposition, eigenvalues descending.
pub fn sym_eigen_dense(m: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let e = SymmetricEigen::new(m.to_dmatrix());
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].partial_cmp(&e.eigenvalues[a]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `(1/n) X Xᵀ` for a `d × n` data matrix.
pub fn covariance(x: &RealMatrix) -> RealMatrix {
    let mut c = x.matmul(&x.transpose());
    c.scale(1.0 / x.cols() as f64);
    c
}

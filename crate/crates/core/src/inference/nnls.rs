//! Lawson-Hanson active set method for `min ||A x - b||` subject to `x >= 0`.

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct NnlsSolution<S> {
    pub x: Vec<S>,
    pub residual_norm: S,
    /// Largest violation of the optimality conditions at `x`.
    pub kkt_residual: S,
    pub iterations: usize,
}

pub fn nnls<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<NnlsSolution<S>> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} rows but {} targets",
            b.len()
        )));
    }
    let mut x = vec![S::zero(); n];
    let mut passive = vec![false; n];
    let scale = a.max_abs().max(S::one()) * b.iter().fold(S::one(), |acc, v| acc.max(v.abs()));
    let tol = S::KKT_TOL * scale;
    let max_outer = 3 * n + 10;
    let mut iterations = 0;

    loop {
        let w = gradient(a, b, &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| {
                w[i].partial_cmp(&w[j])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(j.cmp(&i))
            });
        let Some(j) = candidate else { break };
        iterations += 1;
        if iterations > max_outer {
            return Err(Error::Numerical("nnls did not converge".into()));
        }
        passive[j] = true;

        for _ in 0..=n {
            let s = solve_passive(a, b, &passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > S::zero()) {
                x = s;
                break;
            }
            // step back toward x until a passive coefficient hits zero
            let mut alpha = S::one();
            for i in (0..n).filter(|&i| passive[i] && s[i] <= S::zero()) {
                let denom = x[i] - s[i];
                if denom > S::zero() {
                    alpha = alpha.min(x[i] / denom);
                }
            }
            for i in 0..n {
                let xi = x[i];
                x[i] = xi + alpha * (s[i] - xi);
            }
            let mut dropped = false;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = S::zero();
                    dropped = true;
                }
            }
            if !dropped {
                // numerical stall: stop shrinking
                x = x.into_iter().map(|v| v.max(S::zero())).collect();
                break;
            }
        }
    }

    let w = gradient(a, b, &x);
    let kkt_residual = (0..n)
        .map(|j| {
            if x[j] > S::zero() {
                w[j].abs()
            } else {
                w[j].max(S::zero())
            }
        })
        .fold(S::zero(), S::max);
    let r = a.mul_vec(&x);
    let residual_norm = r
        .iter()
        .zip(b)
        .map(|(&p, &q)| (p - q) * (p - q))
        .sum::<S>()
        .sqrt();
    Ok(NnlsSolution {
        x,
        residual_norm,
        kkt_residual,
        iterations,
    })
}

/// `A^T (b - A x)`
fn gradient<S: Scalar>(a: &Matrix<S>, b: &[S], x: &[S]) -> Vec<S> {
    let ax = a.mul_vec(x);
    let r: Vec<S> = b.iter().zip(&ax).map(|(&p, &q)| p - q).collect();
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)] * r[i]).sum())
        .collect()
}

fn solve_passive<S: Scalar>(a: &Matrix<S>, b: &[S], passive: &[bool]) -> Vec<S> {
    let idx: Vec<usize> = (0..a.cols()).filter(|&j| passive[j]).collect();
    let sub = Matrix::from_fn(a.rows(), idx.len(), |i, k| a[(i, idx[k])]);
    let sol = least_squares(&sub, b).unwrap_or_default();
    let mut out = vec![S::zero(); a.cols()];
    for (k, &j) in idx.iter().enumerate() {
        out[j] = sol[k];
    }
    out
}

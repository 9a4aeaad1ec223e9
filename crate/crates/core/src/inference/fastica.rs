//! FastICA with the log-cosh contrast on weighted samples.
//!
//! Binary traces repeat a small number of distinct observation vectors, so
//! the expectations are taken over distinct points with their frequencies as
//! weights. This gives the same fixed-point iteration as running on the raw
//! slots.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_decorrelation, symmetric_eigen, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FastIcaMode {
    /// All components updated together, then jointly decorrelated.
    #[default]
    Symmetric,
    /// Components extracted one at a time with Gram-Schmidt deflation.
    Deflation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastIcaConfig {
    /// Number of components; `None` means the data dimension.
    pub num_components: Option<usize>,
    pub max_iter: usize,
    pub tol: f64,
    pub mode: FastIcaMode,
    pub seed: u64,
}

impl Default for FastIcaConfig {
    fn default() -> Self {
        Self {
            num_components: None,
            max_iter: 500,
            tol: 1e-6,
            mode: FastIcaMode::Symmetric,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FastIcaResult<S> {
    /// Estimated mixing matrix, `dimension × components`.
    pub mixing: Matrix<S>,
    /// Rotation applied to the whitened data, `components × components`.
    pub unmixing: Matrix<S>,
    pub mean: Vec<S>,
    pub components: usize,
    pub requested: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl<S> FastIcaResult<S> {
    /// True when the covariance rank forced fewer components than requested.
    pub fn rank_reduced(&self) -> bool {
        self.components < self.requested
    }
}

/// Run FastICA on `points` (one sample per row) with nonnegative `weights`.
pub fn fastica<S: Scalar>(
    points: &Matrix<S>,
    weights: &[S],
    config: &FastIcaConfig,
) -> Result<FastIcaResult<S>> {
    let (n, m) = (points.rows(), points.cols());
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} points but {} weights",
            weights.len()
        )));
    }
    let total: S = weights.iter().copied().sum();
    if n == 0 || m == 0 || total <= S::zero() {
        return Err(Error::InvalidInput("fastica needs weighted data".into()));
    }
    let w: Vec<S> = weights.iter().map(|&v| v / total).collect();
    let requested = config.num_components.unwrap_or(m);
    if requested == 0 || requested > m {
        return Err(Error::InvalidInput(format!(
            "{requested} components requested from {m}-dimensional data"
        )));
    }

    let mean: Vec<S> = (0..m)
        .map(|j| (0..n).map(|i| w[i] * points[(i, j)]).sum())
        .collect();
    let cov = Matrix::from_fn(m, m, |a, b| {
        (0..n)
            .map(|i| w[i] * (points[(i, a)] - mean[a]) * (points[(i, b)] - mean[b]))
            .sum()
    });
    let (vals, vecs): (Vec<S>, Matrix<S>) = symmetric_eigen(&cov);
    let top = vals[0];
    let rel = S::epsilon().sqrt();
    let rank = if top <= S::min_positive_value() {
        0
    } else {
        vals.iter().filter(|&&v| v > top * rel).count()
    };
    if rank == 0 {
        return Err(Error::RankDeficient { rank, requested });
    }
    let d = requested.min(rank);
    if d < requested {
        log::debug!("fastica: covariance rank {rank}, reducing components from {requested} to {d}");
    }

    // whitening K = D^{-1/2} E^T, z = K (x - mean)
    let k = Matrix::from_fn(d, m, |i, j| vecs[(j, i)] / vals[i].sqrt());
    let z = Matrix::from_fn(n, d, |p, i| {
        (0..m).map(|j| k[(i, j)] * (points[(p, j)] - mean[j])).sum()
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Matrix::from_fn(d, d, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        S::of(v)
    });
    let tol = S::of(config.tol);
    let (unmixing, iterations, converged) = match config.mode {
        FastIcaMode::Symmetric => symmetric(&z, &w, init, config.max_iter, tol),
        FastIcaMode::Deflation => deflation(&z, &w, init, config.max_iter, tol),
    };
    if !converged {
        log::debug!("fastica: no convergence after {iterations} iterations");
    }

    // mixing = E_d D_d^{1/2} W^T
    let mixing = Matrix::from_fn(m, d, |a, c| {
        (0..d)
            .map(|i| vecs[(a, i)] * vals[i].sqrt() * unmixing[(c, i)])
            .sum()
    });
    Ok(FastIcaResult {
        mixing,
        unmixing,
        mean,
        components: d,
        requested,
        iterations,
        converged,
    })
}

fn symmetric<S: Scalar>(
    z: &Matrix<S>,
    w: &[S],
    init: Matrix<S>,
    max_iter: usize,
    tol: S,
) -> (Matrix<S>, usize, bool) {
    let (n, d) = (z.rows(), z.cols());
    let mut wm = symmetric_decorrelation(&init);
    for it in 1..=max_iter {
        let mut a = Matrix::zeros(d, d);
        let mut b = vec![S::zero(); d];
        for p in 0..n {
            let zp = z.row(p);
            for c in 0..d {
                let u: S = wm.row(c).iter().zip(zp).map(|(&x, &y)| x * y).sum();
                let g = u.tanh();
                b[c] += w[p] * (S::one() - g * g);
                let wg = w[p] * g;
                for j in 0..d {
                    a[(c, j)] += wg * zp[j];
                }
            }
        }
        for c in 0..d {
            for j in 0..d {
                a[(c, j)] -= b[c] * wm[(c, j)];
            }
        }
        let next = symmetric_decorrelation(&a);
        let lim = (0..d)
            .map(|c| {
                let dot: S = next
                    .row(c)
                    .iter()
                    .zip(wm.row(c))
                    .map(|(&x, &y)| x * y)
                    .sum();
                (dot.abs() - S::one()).abs()
            })
            .fold(S::zero(), S::max);
        wm = next;
        if lim < tol {
            return (wm, it, true);
        }
    }
    (wm, max_iter, false)
}

fn deflation<S: Scalar>(
    z: &Matrix<S>,
    w: &[S],
    init: Matrix<S>,
    max_iter: usize,
    tol: S,
) -> (Matrix<S>, usize, bool) {
    let (n, d) = (z.rows(), z.cols());
    let mut found: Vec<Vec<S>> = Vec::with_capacity(d);
    let mut worst_iter = 0;
    let mut all_converged = true;
    for c in 0..d {
        let mut v = orthonormalize(init.row(c).to_vec(), &found);
        let mut converged = false;
        let mut used = max_iter;
        for it in 1..=max_iter {
            let mut next = vec![S::zero(); d];
            let mut gp = S::zero();
            for p in 0..n {
                let zp = z.row(p);
                let u: S = v.iter().zip(zp).map(|(&x, &y)| x * y).sum();
                let g = u.tanh();
                gp += w[p] * (S::one() - g * g);
                for j in 0..d {
                    next[j] += w[p] * g * zp[j];
                }
            }
            for j in 0..d {
                next[j] -= gp * v[j];
            }
            let next = orthonormalize(next, &found);
            let dot: S = next.iter().zip(&v).map(|(&x, &y)| x * y).sum();
            let lim = (dot.abs() - S::one()).abs();
            v = next;
            if lim < tol {
                converged = true;
                used = it;
                break;
            }
        }
        worst_iter = worst_iter.max(used);
        all_converged &= converged;
        found.push(v);
    }
    (Matrix::from_rows(&found), worst_iter, all_converged)
}

fn orthonormalize<S: Scalar>(mut v: Vec<S>, basis: &[Vec<S>]) -> Vec<S> {
    for b in basis {
        let dot: S = v.iter().zip(b).map(|(&x, &y)| x * y).sum();
        for (x, &y) in v.iter_mut().zip(b) {
            *x -= dot * y;
        }
    }
    let norm: S = v.iter().map(|&x| x * x).sum::<S>().sqrt();
    if norm > S::zero() {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

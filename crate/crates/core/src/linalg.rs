//! Small dense linear algebra over [`Scalar`].
//!
//! Matrices here are at most a few dozen rows wide (sniffer counts), so plain
//! row-major storage with cubic algorithms is sufficient.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as the columns of the second matrix. Eigenvector signs are normalized so
/// that the largest-magnitude entry of each is positive.
pub fn symmetric_eigen<S: Scalar>(a: &Matrix<S>) -> (Vec<S>, Matrix<S>) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "eigen-decomposition needs a square matrix");
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let two = S::of(2.0);
    let scale = a.max_abs().max(S::min_positive_value());
    let eps = S::epsilon();
    for _sweep in 0..100 {
        let off: S = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= eps * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= eps * eps * scale {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for j in 0..n {
        let mut lead = S::zero();
        for i in 0..n {
            if vectors[(i, j)].abs() > lead.abs() {
                lead = vectors[(i, j)];
            }
        }
        if lead < S::zero() {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    (values, vectors)
}

/// `W (W^T W)^{-1/2}` style symmetric orthogonalization of the rows of `w`:
/// returns `(W W^T)^{-1/2} W`.
pub fn symmetric_decorrelation<S: Scalar>(w: &Matrix<S>) -> Matrix<S> {
    let wwt = w.matmul(&w.transpose());
    let (vals, vecs) = symmetric_eigen(&wwt);
    let n = vals.len();
    let floor = S::epsilon();
    let inv_sqrt = Matrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vecs[(i, k)] * vecs[(j, k)] / vals[k].max(floor).sqrt())
            .sum()
    });
    inv_sqrt.matmul(w)
}

/// Least squares `min ||A x - b||` by Householder QR.
///
/// Columns whose diagonal pivot falls below `tol * max|R_ii|` are treated as
/// dependent and their coefficient is set to zero. Returns `None` only for an
/// empty system.
pub fn least_squares<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Option<Vec<S>> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 {
        return None;
    }
    assert_eq!(m, b.len());
    let mut r = a.clone();
    let mut qtb = b.to_vec();
    let steps = n.min(m);
    for k in 0..steps {
        let norm: S = (k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<S>().sqrt();
        if norm == S::zero() {
            continue;
        }
        let alpha = if r[(k, k)] > S::zero() { -norm } else { norm };
        let mut v: Vec<S> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: S = v.iter().map(|&x| x * x).sum();
        if vnorm2 == S::zero() {
            continue;
        }
        let two = S::of(2.0);
        for j in k..n {
            let dot: S = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let f = two * dot / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let dot: S = (k..m).map(|i| v[i - k] * qtb[i]).sum();
        let f = two * dot / vnorm2;
        for i in k..m {
            qtb[i] -= f * v[i - k];
        }
    }
    let rmax = (0..steps).fold(S::zero(), |acc, i| acc.max(r[(i, i)].abs()));
    let tol = rmax * S::of_usize(m.max(n)) * S::epsilon() * S::of(16.0);
    let mut x = vec![S::zero(); n];
    for k in (0..steps).rev() {
        if r[(k, k)].abs() <= tol {
            x[k] = S::zero();
            continue;
        }
        let s: S = ((k + 1)..n).map(|j| r[(k, j)] * x[j]).sum();
        x[k] = (qtb[k] - s) / r[(k, k)];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_known_matrix() {
        let a = Matrix::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 2.0]]);
        let (vals, vecs) = symmetric_eigen(&a);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        assert!((vecs[(0, 0)] - h).abs() < 1e-12 && (vecs[(1, 0)] - h).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_random_symmetric() {
        let n = 6;
        let b = Matrix::from_fn(n, n, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * i as f64
        });
        let a = b.matmul(&b.transpose());
        let (vals, vecs) = symmetric_eigen(&a);
        let recon: Matrix<f64> = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| vecs[(i, k)] * vals[k] * vecs[(j, k)]).sum()
        });
        for i in 0..n {
            for j in 0..n {
                assert!((recon[(i, j)] - a[(i, j)]).abs() < 1e-9);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn decorrelation_makes_rows_orthonormal() {
        let w = Matrix::from_rows(&[
            vec![1.0f64, 0.5, 0.2],
            vec![0.3, 1.0, -0.4],
            vec![0.0, 0.2, 1.0],
        ]);
        let o = symmetric_decorrelation(&w);
        let g = o.matmul(&o.transpose());
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn least_squares_overdetermined() {
        // y = 1 + 2 t fitted exactly
        let a = Matrix::from_rows(&[vec![1.0f64, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]);
        let x = least_squares(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_rank_deficient_zeroes_dependent_column() {
        let a = Matrix::from_rows(&[vec![1.0f64, 1.0], vec![1.0, 1.0]]);
        let x = least_squares(&a, &[2.0, 2.0]).unwrap();
        let fit: Vec<f64> = a.mul_vec(&x);
        assert!((fit[0] - 2.0).abs() < 1e-12);
    }
}

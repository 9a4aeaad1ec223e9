//! Dense primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible for this form, so no phase one is needed.
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots the solver switches to Bland's rule, which cannot cycle.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

#[derive(Clone, Debug)]
pub struct SimplexOutcome<S> {
    pub x: Vec<S>,
    pub objective: S,
    pub iterations: usize,
    pub used_bland: bool,
}

/// Maximize `c·x` subject to `rows[i]·x <= rhs[i]` and `x >= 0`.
pub fn maximize<S: Scalar>(
    c: &[S],
    rows: &[Vec<S>],
    rhs: &[S],
    max_iterations: usize,
) -> Result<SimplexOutcome<S>> {
    let n = c.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("simplex constraint shapes".into()));
    }
    if let Some(i) = rhs.iter().position(|&b| b < S::zero()) {
        return Err(Error::InvalidInput(format!(
            "constraint {i} has a negative right-hand side"
        )));
    }

    // Tableau columns: n structural, m slack, then rhs.
    let width = n + m + 1;
    let mut t = vec![S::zero(); (m + 1) * width];
    for i in 0..m {
        let row = &mut t[i * width..(i + 1) * width];
        row[..n].copy_from_slice(&rows[i]);
        row[n + i] = S::one();
        row[width - 1] = rhs[i];
    }
    // Objective row holds reduced costs as -c; optimal when all >= -tol.
    {
        let obj = &mut t[m * width..];
        for j in 0..n {
            obj[j] = -c[j];
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let tol = S::LP_TOL;
    let mut degenerate = 0usize;
    let mut used_bland = false;

    for iteration in 0..max_iterations {
        let bland = degenerate >= DEGENERATE_RUN;
        used_bland |= bland;
        let obj = &t[m * width..];
        let entering = if bland {
            (0..n + m).find(|&j| obj[j] < -tol)
        } else {
            let mut best: Option<(usize, S)> = None;
            for (j, &r) in obj[..n + m].iter().enumerate() {
                if r < -tol && best.is_none_or(|(_, b)| r < b) {
                    best = Some((j, r));
                }
            }
            best.map(|(j, _)| j)
        };
        let Some(col) = entering else {
            let mut x = vec![S::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i * width + width - 1];
                }
            }
            let objective = t[m * width + width - 1];
            return Ok(SimplexOutcome {
                x,
                objective,
                iterations: iteration,
                used_bland,
            });
        };

        // Ratio test; ties go to the smallest basic variable index.
        let mut leave: Option<(usize, S)> = None;
        for i in 0..m {
            let a = t[i * width + col];
            if a > S::PIVOT_TOL {
                let ratio = t[i * width + width - 1] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - tol || (ratio <= lr + tol && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leave else {
            return Err(Error::Numerical(format!(
                "objective unbounded along column {col} at iteration {iteration}"
            )));
        };
        if ratio <= tol {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(&mut t, width, m + 1, row, col);
        basis[row] = col;
    }
    Err(Error::Numerical(format!(
        "simplex did not converge within {max_iterations} iterations"
    )))
}

fn pivot<S: Scalar>(t: &mut [S], width: usize, height: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for j in 0..width {
        t[row * width + j] /= p;
    }
    let pivot_row: Vec<S> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..height {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f == S::zero() {
            continue;
        }
        let r = &mut t[i * width..(i + 1) * width];
        for j in 0..width {
            r[j] -= f * pivot_row[j];
        }
        r[col] = S::zero();
    }
}

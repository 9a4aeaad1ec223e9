//! Accuracy of an inferred model against ground truth.

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assign[row] = col`. Shortest augmenting paths with potentials,
/// `O(n^3)`.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(
        cost.iter().all(|r| r.len() == n),
        "cost matrix must be square"
    );
    // 1-based internally; index 0 is the virtual start column
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = inf;
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = cost[r0 - 1][col - 1] - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assign[owner[col] - 1] = col - 1;
        }
    }
    assign
}

/// Column pairing between a true structure and an inferred one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureMatching {
    /// `(true column, inferred column)` for pairs of real columns.
    pub pairs: Vec<(usize, usize)>,
    /// Total Hamming distance, counting unmatched columns against zero.
    pub distance: usize,
    pub num_sniffers: usize,
    pub num_true: usize,
    pub num_inferred: usize,
}

/// Minimum total Hamming distance matching of columns.
///
/// The smaller side is padded with all-zero columns so surplus columns are
/// charged their popcount.
pub fn match_structures(g: &BitMatrix, g_hat: &BitMatrix) -> Result<StructureMatching> {
    let m = g.rows();
    if g_hat.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "true structure has {m} sniffers, inferred has {}",
            g_hat.rows()
        )));
    }
    let (n, nh) = (g.cols(), g_hat.cols());
    let size = n.max(nh);
    let a: Vec<Vec<bool>> = (0..size)
        .map(|j| if j < n { g.column(j) } else { vec![false; m] })
        .collect();
    let b: Vec<Vec<bool>> = (0..size)
        .map(|j| {
            if j < nh {
                g_hat.column(j)
            } else {
                vec![false; m]
            }
        })
        .collect();
    let cost: Vec<Vec<i64>> = a
        .iter()
        .map(|x| b.iter().map(|y| hamming(x, y) as i64).collect())
        .collect();
    let assign = hungarian(&cost);
    let distance = assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j] as usize)
        .sum();
    let pairs = assign
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < n && j < nh)
        .map(|(i, &j)| (i, j))
        .collect();
    Ok(StructureMatching {
        pairs,
        distance,
        num_sniffers: m,
        num_true: n,
        num_inferred: nh,
    })
}

fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Matched Hamming distance over `m * max(n, n_hat)`.
pub fn structure_error_ratio(g: &BitMatrix, g_hat: &BitMatrix) -> Result<f64> {
    let mt = match_structures(g, g_hat)?;
    Ok(structure_error_of(&mt))
}

pub fn structure_error_of(matching: &StructureMatching) -> f64 {
    let size = matching.num_sniffers * matching.num_true.max(matching.num_inferred);
    if size == 0 {
        0.0
    } else {
        matching.distance as f64 / size as f64
    }
}

/// `sum_i p_i ln(p'_i / p_hat'_i)` over matched pairs, where the primed
/// vectors are normalized over the pairs that enter the sum.
///
/// Pairs with a zero probability on either side are skipped.
pub fn transmission_probability_error<S: Scalar>(
    p: &[S],
    p_hat: &[S],
    pairs: &[(usize, usize)],
) -> Result<S> {
    let mut used = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        let (Some(&a), Some(&b)) = (p.get(i), p_hat.get(j)) else {
            return Err(Error::DimensionMismatch(format!(
                "pair ({i}, {j}) out of range"
            )));
        };
        if a > S::zero() && b > S::zero() {
            used.push((a, b));
        }
    }
    if used.len() < pairs.len() {
        log::warn!(
            "probability error: {} zero-probability pairs excluded",
            pairs.len() - used.len()
        );
    }
    if used.is_empty() {
        return Err(Error::InvalidInput(
            "no matched pairs with positive probabilities".into(),
        ));
    }
    let sp: S = used.iter().map(|&(a, _)| a).sum();
    let sq: S = used.iter().map(|&(_, b)| b).sum();
    Ok(used
        .iter()
        .map(|&(a, b)| a * ((a / sp) / (b / sq)).ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = hungarian(&cost);
        let total: i64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn permutation_is_recovered() {
        let g = BitMatrix::parse_rows(&["1100", "0110", "0011"]).unwrap();
        let h = g.select_columns(&[2, 0, 3, 1]);
        let mt = match_structures(&g, &h).unwrap();
        assert_eq!(mt.distance, 0);
        let mut pairs = mt.pairs.clone();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 1), (1, 3), (2, 0), (3, 2)]);
    }

    #[test]
    fn one_flipped_bit() {
        let g = BitMatrix::from_fn(5, 10, |i, j| (i + j) % 3 == 0);
        let mut h = g.clone();
        h.set(2, 7, !h.get(2, 7));
        assert_eq!(match_structures(&g, &h).unwrap().distance, 1);
        assert!((structure_error_ratio(&g, &h).unwrap() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn missing_columns_pay_popcount() {
        // columns 110, 011, 111; inferred keeps only 011
        let g = BitMatrix::parse_rows(&["101", "111", "011"]).unwrap();
        let h = BitMatrix::parse_rows(&["0", "1", "1"]).unwrap();
        let mt = match_structures(&g, &h).unwrap();
        // 011 matches exactly, 110 and 111 go to zero: 2 + 3
        assert_eq!(mt.distance, 5);
        assert_eq!(mt.pairs, vec![(1, 0)]);
        assert!((structure_error_ratio(&g, &h).unwrap() - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn probability_error_example() {
        let v =
            transmission_probability_error(&[0.2f64, 0.2], &[0.2, 0.4], &[(0, 0), (1, 1)]).unwrap();
        let want = 0.2 * 1.5f64.ln() + 0.2 * 0.75f64.ln();
        assert!((v - want).abs() < 1e-15);
        let same =
            transmission_probability_error(&[0.2f64, 0.3], &[0.2, 0.3], &[(0, 0), (1, 1)]).unwrap();
        assert_eq!(same, 0.0);
    }

    #[test]
    fn probability_error_needs_pairs() {
        assert!(transmission_probability_error::<f64>(&[0.1], &[0.0], &[(0, 0)]).is_err());
        assert!(transmission_probability_error::<f64>(&[0.1], &[0.1], &[]).is_err());
    }
}

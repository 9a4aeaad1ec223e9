use std::collections::BTreeMap;

use super::ObservationStats;
use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Estimate activity probabilities when the coverage structure `g` is known.
///
/// Users are processed in ascending column weight. For user `j` with column
/// `g_j`, let `D_j` be the already processed users whose columns are strict
/// subsets of `g_j`. Then
///
/// `P(x = g_j) / P(x = 0) = (p_j + (1 - p_j) Q_j) / ((1 - p_j) prod_{D_j}(1 - p))`
///
/// where `Q_j` is the probability that the union of active `D_j` columns is
/// exactly `g_j`. Solving for `p_j` gives `c / (1 + c)` with
/// `c = P(g_j) prod_{D_j}(1 - p) / P(0) - Q_j`. When no subset users can
/// cover `g_j` on their own, `Q_j = 0`.
pub fn infer_p_known_g<S: Scalar>(g: &BitMatrix, stats: &ObservationStats<S>) -> Result<Vec<S>> {
    let m = g.rows();
    let n = g.cols();
    if stats.num_sniffers() != m {
        return Err(Error::DimensionMismatch(format!(
            "graph has {m} sniffers, observations have {}",
            stats.num_sniffers()
        )));
    }
    if m > 64 {
        return Err(Error::InvalidInput(format!("{m} sniffers exceed 64")));
    }
    let cols: Vec<u64> = (0..n).map(|j| g.column_mask(j)).collect();
    if let Some(j) = cols.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!(
            "user {j} has an empty coverage column"
        )));
    }
    let mut seen: BTreeMap<u64, usize> = BTreeMap::new();
    for (j, &c) in cols.iter().enumerate() {
        if let Some(&first) = seen.get(&c) {
            return Err(Error::DuplicateColumns { first, second: j });
        }
        seen.insert(c, j);
    }
    let idle = stats.freq(0);
    if idle <= S::zero() {
        return Err(Error::NoIdlePattern);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (cols[j].count_ones(), j));

    let mut p = vec![S::zero(); n];
    let mut done: Vec<usize> = Vec::with_capacity(n);
    for &j in &order {
        let gj = cols[j];
        let subset: Vec<usize> = done
            .iter()
            .copied()
            .filter(|&u| cols[u] & !gj == 0 && cols[u] != gj)
            .collect();
        let pi: S = subset
            .iter()
            .map(|&u| S::one() - p[u])
            .fold(S::one(), |a, b| a * b);
        let q = union_hits(&subset, &cols, &p, gj);
        let c = stats.freq(gj) * pi / idle - q;
        p[j] = if c <= S::zero() {
            S::zero()
        } else {
            (c / (S::one() + c)).clamp_unit()
        };
        done.push(j);
    }
    Ok(p)
}

/// Probability that the union of columns of the active users equals `target`.
fn union_hits<S: Scalar>(users: &[usize], cols: &[u64], p: &[S], target: u64) -> S {
    if users.is_empty() {
        return S::zero();
    }
    let mut dist: BTreeMap<u64, S> = BTreeMap::new();
    dist.insert(0, S::one());
    for &u in users {
        let mut next: BTreeMap<u64, S> = BTreeMap::new();
        for (&mask, &w) in &dist {
            *next.entry(mask).or_insert_with(S::zero) += w * (S::one() - p[u]);
            *next.entry(mask | cols[u]).or_insert_with(S::zero) += w * p[u];
        }
        dist = next;
    }
    dist.get(&target).copied().unwrap_or_else(S::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TraceKind, TraceMatrix};

    #[test]
    fn toy_trace_recovers_probabilities() {
        let g = BitMatrix::parse_rows(&["10", "11"]).unwrap();
        let x = BitMatrix::parse_rows(&["0010000010", "0110011110"]).unwrap();
        let stats = ObservationStats::<f64>::from_trace(&TraceMatrix::new(
            TraceKind::SnifferObservation,
            1,
            x,
        ))
        .unwrap();
        let p = infer_p_known_g(&g, &stats).unwrap();
        // u2 = 0.4 / (0.4 + 0.4); u1 = (0.2 * 0.5 / 0.4) / (1 + 0.25)
        assert!((p[1] - 0.5).abs() < 1e-12);
        assert!((p[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn duplicate_columns_are_rejected() {
        let g = BitMatrix::parse_rows(&["11", "00"]).unwrap();
        let mut f = BTreeMap::new();
        f.insert(0u64, 1.0f64);
        let stats = ObservationStats::from_frequencies(2, f).unwrap();
        assert!(matches!(
            infer_p_known_g(&g, &stats),
            Err(Error::DuplicateColumns {
                first: 0,
                second: 1
            })
        ));
    }

    #[test]
    fn missing_idle_pattern_is_numerical() {
        let g = BitMatrix::parse_rows(&["1"]).unwrap();
        let mut f = BTreeMap::new();
        f.insert(1u64, 1.0f64);
        let stats = ObservationStats::from_frequencies(1, f).unwrap();
        let err = infer_p_known_g(&g, &stats).unwrap_err();
        assert!(matches!(err, Error::NoIdlePattern));
        assert!(err.is_numerical());
    }

    #[test]
    fn exact_when_subsets_cover_the_superset() {
        // users with columns 01, 10, 11: the first two together mimic the third
        let g = BitMatrix::parse_rows(&["101", "011"]).unwrap();
        let p = [0.3f64, 0.2, 0.1];
        let mut f = BTreeMap::new();
        for y in 0u32..8 {
            let mut mask = 0u64;
            let mut w = 1.0;
            for u in 0..3 {
                if y & (1 << u) != 0 {
                    mask |= g.column_mask(u);
                    w *= p[u];
                } else {
                    w *= 1.0 - p[u];
                }
            }
            *f.entry(mask).or_insert(0.0) += w;
        }
        let stats = ObservationStats::from_frequencies(2, f).unwrap();
        let est = infer_p_known_g(&g, &stats).unwrap();
        for u in 0..3 {
            assert!((est[u] - p[u]).abs() < 1e-12, "{est:?}");
        }
    }
}

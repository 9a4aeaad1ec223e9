//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;

use qom_core::{BitMatrix, CoverageGraph};

/// Exact distribution of sniffer observation patterns under independent
/// users, by enumerating all `2^n` activity vectors.
pub fn exact_pattern_freqs(g: &BitMatrix, p: &[f64]) -> BTreeMap<u64, f64> {
    let (m, n) = (g.rows(), g.cols());
    assert!(n <= 20, "enumeration oracle is for small n");
    let mut out = BTreeMap::new();
    for state in 0u64..(1 << n) {
        let mut prob = 1.0;
        let mut pattern = 0u64;
        for j in 0..n {
            if state >> j & 1 == 1 {
                prob *= p[j];
                for i in 0..m {
                    if g.get(i, j) {
                        pattern |= 1 << i;
                    }
                }
            } else {
                prob *= 1.0 - p[j];
            }
        }
        *out.entry(pattern).or_insert(0.0) += prob;
    }
    out
}

/// QoM straight from the definition.
pub fn qom_direct(graph: &CoverageGraph, channels: &[usize]) -> f64 {
    let mut total = 0.0;
    for u in 0..graph.num_users() {
        let c = graph.channel_of()[u];
        let heard =
            (0..graph.num_sniffers()).any(|s| graph.adjacency().get(s, u) && channels[s] == c);
        if heard {
            total += graph.weights()[u];
        }
    }
    total
}

/// Optimum over all `K^m` assignments, counting in base `K`.
pub fn brute_force_qom(graph: &CoverageGraph) -> f64 {
    let (m, k) = (graph.num_sniffers(), graph.num_channels());
    let total = (k as u64).pow(m as u32);
    let mut best = 0.0f64;
    for code in 0..total {
        let mut c = code;
        let channels: Vec<usize> = (0..m)
            .map(|_| {
                let d = (c % k as u64) as usize + 1;
                c /= k as u64;
                d
            })
            .collect();
        best = best.max(qom_direct(graph, &channels));
    }
    best
}

/// Columns with their probabilities, sorted, for comparison up to permutation.
pub fn sorted_components(g: &BitMatrix, p: &[f64]) -> Vec<(Vec<bool>, f64)> {
    let mut v: Vec<(Vec<bool>, f64)> = (0..g.cols()).map(|j| (g.column(j), p[j])).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

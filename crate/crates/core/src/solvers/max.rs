//! The non-cooperative baseline: every sniffer camps on its busiest channel.

use crate::error::{Error, Result};
use crate::model::{Assignment, CoverageGraph, TraceKind, TraceMatrix};
use crate::scalar::Scalar;

/// `a(s) = argmax_k busy[s][k - 1]`, ties to the lowest channel.
pub fn solve_max<S: Scalar>(busy: &[Vec<S>]) -> Assignment {
    let channels = busy
        .iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best + 1
        })
        .collect();
    Assignment::new(channels)
}

/// Fraction of slots each sniffer saw its channel busy, from full-scan traces.
///
/// Entry `[s][k - 1]` is the mean of row `s` of the sniffer observation trace
/// for channel `k`.
pub fn sniffer_busy_fractions<S: Scalar>(
    graph: &CoverageGraph<S>,
    traces: &[TraceMatrix],
) -> Result<Vec<Vec<S>>> {
    let m = graph.num_sniffers();
    let k = graph.num_channels();
    let mut busy = vec![vec![S::zero(); k]; m];
    for ch in 1..=k {
        let t = traces
            .iter()
            .find(|t| t.channel_id == ch && t.kind == TraceKind::SnifferObservation)
            .ok_or(Error::MissingChannel(ch))?;
        if t.rows() != m {
            return Err(Error::DimensionMismatch(format!(
                "channel {ch} observation trace has {} rows for {m} sniffers",
                t.rows()
            )));
        }
        let slots = t.slots();
        if slots == 0 {
            continue;
        }
        for (s, row) in busy.iter_mut().enumerate() {
            row[ch - 1] = S::of_usize(t.bits.row_weight(s)) / S::of_usize(slots);
        }
    }
    Ok(busy)
}

/// Stationary busy probability of each sniffer on each channel under
/// independent users: `1 - prod(1 - p_u)` over the users it hears there.
pub fn analytic_busy_fractions<S: Scalar>(graph: &CoverageGraph<S>) -> Vec<Vec<S>> {
    let m = graph.num_sniffers();
    let k = graph.num_channels();
    let mut idle = vec![vec![S::one(); k]; m];
    for u in 0..graph.num_users() {
        let c = graph.channel_of()[u] - 1;
        for &s in graph.neighbors(u) {
            idle[s][c] *= S::one() - graph.weights()[u];
        }
    }
    idle.into_iter()
        .map(|row| row.into_iter().map(|q| S::one() - q).collect())
        .collect()
}

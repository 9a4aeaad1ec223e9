//! Quality of Monitoring: analytic and trace-driven evaluation, plus the
//! exhaustive optimum used as an oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Assignment, CoverageGraph, TraceKind, TraceMatrix};
use crate::scalar::Scalar;

/// Default bound on `K^m` for [`brute_force_opt`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct QomReport<S> {
    /// Expected weighted number of monitored users.
    pub expected_qom: S,
    /// Contribution of each channel, index `k - 1` for channel `k`.
    pub per_channel: Vec<S>,
    /// Users heard by at least one sniffer tuned to their channel.
    pub covered_users: Vec<usize>,
}

/// Whether user `u` is heard under the given channel vector.
#[inline]
fn monitored<S: Scalar>(graph: &CoverageGraph<S>, channels: &[usize], u: usize) -> bool {
    let c = graph.channel_of()[u];
    graph.neighbors(u).iter().any(|&s| channels[s] == c)
}

/// QoM of a raw channel vector; no validation.
pub(crate) fn qom_of<S: Scalar>(graph: &CoverageGraph<S>, channels: &[usize]) -> S {
    (0..graph.num_users())
        .filter(|&u| monitored(graph, channels, u))
        .map(|u| graph.weights()[u])
        .sum()
}

pub fn evaluate_qom<S: Scalar>(
    graph: &CoverageGraph<S>,
    assignment: &Assignment,
) -> Result<QomReport<S>> {
    assignment.validate(graph.num_sniffers(), graph.num_channels())?;
    let channels = &assignment.channel_per_sniffer;
    let mut per_channel = vec![S::zero(); graph.num_channels()];
    let mut covered_users = Vec::new();
    for u in 0..graph.num_users() {
        if monitored(graph, channels, u) {
            per_channel[graph.channel_of()[u] - 1] =
                per_channel[graph.channel_of()[u] - 1] + graph.weights()[u];
            covered_users.push(u);
        }
    }
    Ok(QomReport {
        expected_qom: per_channel.iter().copied().sum(),
        per_channel,
        covered_users,
    })
}

/// Average number of distinct active users captured per slot.
///
/// `activity` holds one user-activity trace per channel; the rows of the trace
/// for channel `k` are the users of that channel in ascending index order.
pub fn empirical_qom<S: Scalar>(
    graph: &CoverageGraph<S>,
    activity: &[TraceMatrix],
    assignment: &Assignment,
) -> Result<S> {
    assignment.validate(graph.num_sniffers(), graph.num_channels())?;
    let mut slots: Option<usize> = None;
    let mut captured: u64 = 0;
    for k in 1..=graph.num_channels() {
        let users = graph.users_on_channel(k);
        let trace = match activity.iter().find(|t| t.channel_id == k) {
            Some(t) => t,
            None if users.is_empty() => continue,
            None => return Err(Error::MissingChannel(k)),
        };
        if trace.kind != TraceKind::UserActivity {
            return Err(Error::InvalidInput(format!(
                "trace for channel {k} is not a user activity trace"
            )));
        }
        if trace.rows() != users.len() {
            return Err(Error::DimensionMismatch(format!(
                "channel {k} trace has {} rows for {} users",
                trace.rows(),
                users.len()
            )));
        }
        match slots {
            Some(t) if t != trace.slots() => {
                return Err(Error::DimensionMismatch(format!(
                    "channel {k} trace has {} slots, expected {t}",
                    trace.slots()
                )))
            }
            _ => slots = Some(trace.slots()),
        }
        for (row, &u) in users.iter().enumerate() {
            if monitored(graph, &assignment.channel_per_sniffer, u) {
                captured += trace.bits.row_weight(row) as u64;
            }
        }
    }
    match slots {
        Some(t) if t > 0 => Ok(S::of(captured as f64) / S::of_usize(t)),
        _ => Ok(S::zero()),
    }
}

/// Exhaustive optimum over all `K^m` pure assignments.
///
/// Ties resolve to the lexicographically smallest channel vector.
pub fn brute_force_opt<S: Scalar>(graph: &CoverageGraph<S>, cap: u64) -> Result<(Assignment, S)> {
    let m = graph.num_sniffers();
    let k = graph.num_channels();
    let size = (k as f64).powi(m as i32);
    if size > cap as f64 {
        return Err(Error::CapExceeded { size, cap });
    }
    if m == 0 {
        return Ok((Assignment::new(Vec::new()), qom_of(graph, &[])));
    }
    // One task per channel of the first sniffer; combined in channel order.
    let best = (1..=k)
        .into_par_iter()
        .map(|first| {
            let mut channels = vec![1usize; m];
            channels[0] = first;
            let mut best_value = qom_of(graph, &channels);
            let mut best_channels = channels.clone();
            while advance(&mut channels[1..], k) {
                let v = qom_of(graph, &channels);
                if v > best_value {
                    best_value = v;
                    best_channels.copy_from_slice(&channels);
                }
            }
            (best_value, best_channels)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one channel");
    Ok((Assignment::new(best.1), best.0))
}

/// Odometer increment in lexicographic order; false once exhausted.
fn advance(digits: &mut [usize], k: usize) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < k {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

//! Binary independent component analysis by sparse recursion over sniffers.
//!
//! Component `v` is a bit mask over sniffers (sniffer `i` at bit `i`). The
//! recursion peels off the highest sniffer: components not touching it are
//! estimated from the observations where it is idle, and components that do
//! touch it from the ratio against the marginal of the remaining sniffers.
//! Only components with nonzero probability are stored, so the cost follows
//! the number of observed patterns rather than `2^m`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ObservationStats;
use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::model::{InferenceScheme, InferredModel, TraceMatrix};
use crate::scalar::Scalar;

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_MAX_SNIFFERS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicaConfig {
    /// Components with estimated probability below this are dropped.
    pub epsilon: f64,
    /// Refuse inputs with more sniffers than this.
    pub max_sniffers: usize,
}

impl Default for BicaConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_sniffers: DEFAULT_MAX_SNIFFERS,
        }
    }
}

pub fn bica<S: Scalar>(trace: &TraceMatrix, config: &BicaConfig) -> Result<InferredModel<S>> {
    bica_from_stats(&ObservationStats::from_trace(trace)?, config)
}

pub fn bica_from_stats<S: Scalar>(
    stats: &ObservationStats<S>,
    config: &BicaConfig,
) -> Result<InferredModel<S>> {
    let m = stats.num_sniffers();
    let comps = bica_components(stats, config.max_sniffers)?;
    let eps = S::of(config.epsilon);
    let kept: Vec<(u64, S)> = comps
        .into_iter()
        .filter(|&(v, p)| v != 0 && p > S::zero() && p >= eps)
        .collect();
    let columns: Vec<Vec<bool>> = kept
        .iter()
        .map(|&(v, _)| (0..m).map(|i| v & (1 << i) != 0).collect())
        .collect();
    Ok(InferredModel {
        adjacency_hat: BitMatrix::from_columns(m, &columns)?,
        probs_hat: kept.into_iter().map(|(_, p)| p).collect(),
        scheme: InferenceScheme::Bica,
    })
}

/// Unpruned component probabilities keyed by component mask.
///
/// Entry `0` holds the probability of the empty component; absent keys are
/// zero.
pub fn bica_components<S: Scalar>(
    stats: &ObservationStats<S>,
    max_sniffers: usize,
) -> Result<BTreeMap<u64, S>> {
    let m = stats.num_sniffers();
    if m > max_sniffers {
        return Err(Error::TooManySniffers {
            sniffers: m,
            cap: max_sniffers,
        });
    }
    if m == 0 {
        return Ok(BTreeMap::new());
    }
    let dist: Vec<(u64, S)> = stats
        .pattern_freqs()
        .iter()
        .map(|(&k, &v)| (k, v))
        .collect();
    let mut guards = 0usize;
    let out = find(&dist, m, &mut guards);
    if guards > 0 {
        log::warn!("bica: {guards} division guards triggered");
    }
    Ok(out)
}

fn find<S: Scalar>(dist: &[(u64, S)], h: usize, guards: &mut usize) -> BTreeMap<u64, S> {
    let mut out = BTreeMap::new();
    if dist.iter().all(|&(k, w)| k == 0 || w == S::zero()) {
        out.insert(0, S::one());
        return out;
    }
    if h == 1 {
        let (mut zero, mut one) = (S::zero(), S::zero());
        for &(k, w) in dist {
            if k & 1 == 0 {
                zero += w;
            } else {
                one += w;
            }
        }
        out.insert(0, zero);
        if one > S::zero() {
            out.insert(1, one);
        }
        return out;
    }
    let top = 1u64 << (h - 1);
    let rest = top - 1;
    let f_top_idle: S = dist
        .iter()
        .filter(|&&(k, _)| k & top == 0)
        .map(|&(_, w)| w)
        .sum();
    let marginal = collapse(dist.iter().map(|&(k, w)| (k & rest, w)));

    if f_top_idle <= S::zero() {
        // the top sniffer is always busy: its own component is certain
        out = find(&marginal, h - 1, guards);
        out.insert(top, S::one());
        return out;
    }

    let cond = collapse(
        dist.iter()
            .filter(|&&(k, _)| k & top == 0)
            .map(|&(k, w)| (k, w / f_top_idle)),
    );
    let lower = find(&cond, h - 1, guards);
    let lower_marg = find(&marginal, h - 1, guards);
    out = lower.clone();
    for (&l, &pm) in &lower_marg {
        if l == 0 {
            continue;
        }
        let pl = lower.get(&l).copied().unwrap_or_else(S::zero);
        let v = if pl >= S::one() - S::GUARD {
            *guards += 1;
            S::zero()
        } else {
            (S::one() - (S::one() - pm) / (S::one() - pl)).clamp_unit()
        };
        if v > S::zero() {
            out.insert(l | top, v);
        }
    }
    let solo: S = dist
        .iter()
        .filter(|&&(k, _)| k == top)
        .map(|&(_, w)| w)
        .sum();
    let denom: S = out
        .iter()
        .filter(|(&l, _)| l != 0 && l != top)
        .map(|(_, &p)| S::one() - p)
        .fold(S::one(), |a, b| a * b);
    let p_top = if denom <= S::GUARD {
        *guards += 1;
        S::zero()
    } else {
        (solo / denom).clamp_unit()
    };
    if p_top > S::zero() {
        out.insert(top, p_top);
    }
    out
}

fn collapse<S: Scalar>(items: impl Iterator<Item = (u64, S)>) -> Vec<(u64, S)> {
    let mut acc: BTreeMap<u64, S> = BTreeMap::new();
    for (k, w) in items {
        *acc.entry(k).or_insert_with(S::zero) += w;
    }
    acc.into_iter().collect()
}

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::TraceMatrix;
use crate::scalar::Scalar;

/// Largest sniffer count whose observation patterns fit a `u64` key.
pub const MAX_PATTERN_BITS: usize = 64;

/// Empirical (or exact) distribution of sniffer observation vectors on one
/// channel.
///
/// Patterns are keyed as bit masks with sniffer `i` at bit `i`. Frequencies
/// sum to one; `slots` records how many samples produced them (zero for an
/// exact distribution).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationStats<S> {
    num_sniffers: usize,
    slots: usize,
    pattern_freqs: BTreeMap<u64, S>,
    marginals_zero: Vec<S>,
}

impl<S: Scalar> ObservationStats<S> {
    pub fn from_trace(trace: &TraceMatrix) -> Result<Self> {
        let m = trace.rows();
        if m > MAX_PATTERN_BITS {
            return Err(Error::InvalidInput(format!(
                "{m} sniffers exceed the {MAX_PATTERN_BITS}-bit pattern limit"
            )));
        }
        let t = trace.slots();
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for slot in 0..t {
            let mut key = 0u64;
            for i in 0..m {
                if trace.bits.get(i, slot) {
                    key |= 1 << i;
                }
            }
            *counts.entry(key).or_default() += 1;
        }
        Ok(Self::from_counts(m, &counts))
    }

    pub fn from_counts(num_sniffers: usize, counts: &BTreeMap<u64, usize>) -> Self {
        let total: usize = counts.values().sum();
        let denom = S::of_usize(total.max(1));
        let freqs = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, S::of_usize(c) / denom))
            .collect();
        let mut stats = Self::build(num_sniffers, freqs);
        stats.slots = total;
        stats
    }

    /// Exact pattern probabilities; they are renormalized to sum to one.
    pub fn from_frequencies(num_sniffers: usize, freqs: BTreeMap<u64, S>) -> Result<Self> {
        if num_sniffers > MAX_PATTERN_BITS {
            return Err(Error::InvalidInput(format!(
                "{num_sniffers} sniffers exceed the {MAX_PATTERN_BITS}-bit pattern limit"
            )));
        }
        let limit = if num_sniffers == 64 {
            u64::MAX
        } else {
            (1u64 << num_sniffers) - 1
        };
        if let Some(k) = freqs.keys().find(|&&k| k & !limit != 0) {
            return Err(Error::InvalidInput(format!(
                "pattern {k:#b} has bits beyond {num_sniffers} sniffers"
            )));
        }
        if freqs.values().any(|&v| v < S::zero() || v.is_nan()) {
            return Err(Error::InvalidInput("negative pattern frequency".into()));
        }
        let total: S = freqs.values().copied().sum();
        if total <= S::zero() {
            return Err(Error::InvalidInput(
                "pattern frequencies sum to zero".into(),
            ));
        }
        let freqs = freqs
            .into_iter()
            .filter(|(_, v)| *v > S::zero())
            .map(|(k, v)| (k, v / total))
            .collect();
        Ok(Self::build(num_sniffers, freqs))
    }

    fn build(num_sniffers: usize, pattern_freqs: BTreeMap<u64, S>) -> Self {
        let marginals_zero = (0..num_sniffers)
            .map(|i| {
                pattern_freqs
                    .iter()
                    .filter(|(&k, _)| k & (1 << i) == 0)
                    .map(|(_, &v)| v)
                    .sum()
            })
            .collect();
        Self {
            num_sniffers,
            slots: 0,
            pattern_freqs,
            marginals_zero,
        }
    }

    pub fn num_sniffers(&self) -> usize {
        self.num_sniffers
    }

    /// Number of samples behind the frequencies; zero for exact input.
    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn pattern_freqs(&self) -> &BTreeMap<u64, S> {
        &self.pattern_freqs
    }

    /// Frequency of one exact observation vector.
    pub fn freq(&self, pattern: u64) -> S {
        self.pattern_freqs
            .get(&pattern)
            .copied()
            .unwrap_or_else(S::zero)
    }

    /// Empirical `P(x_i = 0)` per sniffer.
    pub fn marginals_zero(&self) -> &[S] {
        &self.marginals_zero
    }

    /// Empirical `P(x_i = 0, x_j = 0)`.
    pub fn joint_zero(&self, i: usize, j: usize) -> S {
        let mask = (1u64 << i) | (1u64 << j);
        self.pattern_freqs
            .iter()
            .filter(|(&k, _)| k & mask == 0)
            .map(|(_, &v)| v)
            .sum()
    }

    /// True when no sniffer ever reported activity.
    pub fn is_silent(&self) -> bool {
        self.pattern_freqs.keys().all(|&k| k == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitMatrix;
    use crate::model::TraceKind;

    #[test]
    fn toy_trace_statistics() {
        let x = BitMatrix::parse_rows(&["0010000010", "0110011110"]).unwrap();
        let stats = ObservationStats::<f64>::from_trace(&TraceMatrix::new(
            TraceKind::SnifferObservation,
            1,
            x,
        ))
        .unwrap();
        assert_eq!(stats.slots(), 10);
        assert!((stats.freq(0b00) - 0.4).abs() < 1e-12);
        assert!((stats.freq(0b10) - 0.4).abs() < 1e-12);
        assert!((stats.freq(0b11) - 0.2).abs() < 1e-12);
        assert_eq!(stats.freq(0b01), 0.0);
        assert!((stats.marginals_zero()[0] - 0.8).abs() < 1e-12);
        assert!((stats.marginals_zero()[1] - 0.4).abs() < 1e-12);
        assert!((stats.joint_zero(0, 1) - 0.4).abs() < 1e-12);
        let total: f64 = stats.pattern_freqs().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frequency_constructor_validates() {
        let mut f = BTreeMap::new();
        f.insert(0b100u64, 1.0f64);
        assert!(ObservationStats::from_frequencies(2, f).is_err());
        let mut f = BTreeMap::new();
        f.insert(0u64, 2.0f64);
        f.insert(1u64, 2.0f64);
        let s = ObservationStats::from_frequencies(1, f).unwrap();
        assert_eq!(s.freq(1), 0.5);
        assert_eq!(s.slots(), 0);
    }
}

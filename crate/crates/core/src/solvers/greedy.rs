use crate::model::{Assignment, CoverageGraph};
use crate::scalar::Scalar;

/// Greedy max-effort coverage.
///
/// Repeatedly fixes the (unassigned sniffer, channel) pair that adds the most
/// weight of users not yet monitored. Ties go to the lowest sniffer index,
/// then the lowest channel. Once no pair adds weight, the remaining sniffers
/// go to channel 1.
pub fn solve_greedy<S: Scalar>(graph: &CoverageGraph<S>) -> Assignment {
    let m = graph.num_sniffers();
    let k = graph.num_channels();
    // covers[s] = users heard by s
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); m];
    for u in 0..graph.num_users() {
        for &s in graph.neighbors(u) {
            covers[s].push(u);
        }
    }
    let mut channel: Vec<Option<usize>> = vec![None; m];
    let mut monitored = vec![false; graph.num_users()];

    for _ in 0..m {
        let mut best: Option<(usize, usize, S)> = None;
        for s in (0..m).filter(|&s| channel[s].is_none()) {
            let mut gain = vec![S::zero(); k];
            for &u in &covers[s] {
                if !monitored[u] {
                    let c = graph.channel_of()[u] - 1;
                    gain[c] += graph.weights()[u];
                }
            }
            for (c, &g) in gain.iter().enumerate() {
                if best.is_none_or(|(_, _, b)| g > b) {
                    best = Some((s, c + 1, g));
                }
            }
        }
        match best {
            Some((s, c, g)) if g > S::zero() => {
                channel[s] = Some(c);
                for &u in &covers[s] {
                    if graph.channel_of()[u] == c {
                        monitored[u] = true;
                    }
                }
            }
            _ => break,
        }
    }
    Assignment::new(channel.into_iter().map(|c| c.unwrap_or(1)).collect())
}

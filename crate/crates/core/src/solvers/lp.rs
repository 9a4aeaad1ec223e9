use serde::{Deserialize, Serialize};

use super::simplex;
use crate::error::Result;
use crate::model::{indistinguishable_groups, CoverageGraph};
use crate::scalar::Scalar;

/// Fractional solution of the relaxed max-effort coverage program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct LpSolution<S> {
    /// `z[s][k - 1]`: fraction of sniffer `s` on channel `k`.
    pub z: Vec<Vec<S>>,
    /// Fraction of each user monitored.
    pub y: Vec<S>,
    /// `sum_u p_u y_u`, an upper bound on any pure assignment's QoM.
    pub objective: S,
}

impl<S: Scalar> LpSolution<S> {
    /// Largest violation of the relaxation's constraints.
    pub fn max_violation(&self, graph: &CoverageGraph<S>) -> S {
        let mut worst = S::zero();
        for row in &self.z {
            let s: S = row.iter().copied().sum();
            worst = worst.max(s - S::one());
            for &v in row {
                worst = worst.max(-v).max(v - S::one());
            }
        }
        for (u, &y) in self.y.iter().enumerate() {
            let c = graph.channel_of()[u];
            let cover: S = graph.neighbors(u).iter().map(|&s| self.z[s][c - 1]).sum();
            worst = worst.max(y - cover.min(S::one())).max(-y);
        }
        let obj: S = graph
            .weights()
            .iter()
            .zip(&self.y)
            .map(|(&p, &y)| p * y)
            .sum();
        worst.max((obj - self.objective).abs())
    }
}

/// Solve the LP relaxation of the coverage integer program.
///
/// Users sharing coverage column and channel have identical constraints, so
/// they are folded into one variable carrying their summed weight.
pub fn solve_lp<S: Scalar>(graph: &CoverageGraph<S>) -> Result<LpSolution<S>> {
    let m = graph.num_sniffers();
    let k = graph.num_channels();
    let groups = indistinguishable_groups(graph);
    let nz = m * k;
    let nvars = nz + groups.len();

    let mut c = vec![S::zero(); nvars];
    for (g, members) in groups.iter().enumerate() {
        c[nz + g] = members.iter().map(|&u| graph.weights()[u]).sum();
    }

    let mut rows: Vec<Vec<S>> = Vec::new();
    let mut rhs: Vec<S> = Vec::new();
    for s in 0..m {
        let mut r = vec![S::zero(); nvars];
        for ch in 0..k {
            r[s * k + ch] = S::one();
        }
        rows.push(r);
        rhs.push(S::one());
    }
    for (g, members) in groups.iter().enumerate() {
        let u = members[0];
        let ch = graph.channel_of()[u] - 1;
        let mut r = vec![S::zero(); nvars];
        r[nz + g] = S::one();
        for &s in graph.neighbors(u) {
            r[s * k + ch] = -S::one();
        }
        rows.push(r);
        rhs.push(S::zero());
        // with a single covering sniffer, y <= z <= 1 already
        if graph.neighbors(u).len() > 1 {
            let mut r = vec![S::zero(); nvars];
            r[nz + g] = S::one();
            rows.push(r);
            rhs.push(S::one());
        }
    }

    let max_iter = 50 * (rows.len() + nvars) + 1000;
    let out = simplex::maximize(&c, &rows, &rhs, max_iter)?;
    log::debug!(
        "lp: {} vars, {} rows, {} pivots{}",
        nvars,
        rows.len(),
        out.iterations,
        if out.used_bland { " (bland)" } else { "" }
    );

    let clamp = |v: S| v.clamp_unit();
    let z = (0..m)
        .map(|s| (0..k).map(|ch| clamp(out.x[s * k + ch])).collect())
        .collect();
    let mut y = vec![S::zero(); graph.num_users()];
    for (g, members) in groups.iter().enumerate() {
        for &u in members {
            y[u] = clamp(out.x[nz + g]);
        }
    }
    let objective = graph.weights().iter().zip(&y).map(|(&p, &yy)| p * yy).sum();
    Ok(LpSolution { z, y, objective })
}

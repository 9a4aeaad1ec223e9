//! Domain types: scenarios, coverage graphs, assignments, traces and inferred models.
//!
//! Channels are 1-based everywhere (`1..=K`). Sniffer and user indices are 0-based.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserSpec {
    pub x: f64,
    pub y: f64,
    pub channel_id: usize,
    pub active_prob: f64,
}

impl UserSpec {
    pub fn position(&self) -> Position {
        Position::new(self.x, self.y)
    }
}

/// A geometric deployment: where sniffers and users are, and how users behave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area_width: f64,
    pub area_height: f64,
    pub sniffers: Vec<Position>,
    pub users: Vec<UserSpec>,
    pub num_channels: usize,
    pub coverage_radius: f64,
    pub cell_circumradius: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.num_channels == 0 {
            return Err(Error::InvalidInput(
                "num_channels must be at least 1".into(),
            ));
        }
        let inside = |x: f64, y: f64| {
            (0.0..=self.area_width).contains(&x) && (0.0..=self.area_height).contains(&y)
        };
        for (i, s) in self.sniffers.iter().enumerate() {
            if !inside(s.x, s.y) {
                return Err(Error::InvalidInput(format!(
                    "sniffer {i} lies outside the area"
                )));
            }
        }
        for (j, u) in self.users.iter().enumerate() {
            if !(1..=self.num_channels).contains(&u.channel_id) {
                return Err(Error::InvalidInput(format!(
                    "user {j} has channel {} outside 1..={}",
                    u.channel_id, self.num_channels
                )));
            }
            if !(u.active_prob > 0.0 && u.active_prob <= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "user {j} has active probability {} outside (0, 1]",
                    u.active_prob
                )));
            }
            if !inside(u.x, u.y) {
                return Err(Error::InvalidInput(format!(
                    "user {j} lies outside the area"
                )));
            }
        }
        Ok(())
    }
}

/// Bipartite sniffer/user coverage relation with per-user channel and weight.
///
/// Invariants enforced by [`CoverageGraph::new`]: every user is covered by at
/// least one sniffer, channels lie in `1..=K`, weights lie in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile", bound = "S: Scalar")]
pub struct CoverageGraph<S> {
    adjacency: BitMatrix,
    channel_of: Vec<usize>,
    weights: Vec<S>,
    num_channels: usize,
    neighbors: Vec<Vec<usize>>,
}

impl<S: Scalar> CoverageGraph<S> {
    pub fn new(
        adjacency: BitMatrix,
        channel_of: Vec<usize>,
        weights: Vec<S>,
        num_channels: usize,
    ) -> Result<Self> {
        let n = adjacency.cols();
        if channel_of.len() != n || weights.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} adjacency columns, {} channels, {} weights",
                channel_of.len(),
                weights.len()
            )));
        }
        if num_channels == 0 {
            return Err(Error::InvalidInput(
                "num_channels must be at least 1".into(),
            ));
        }
        for (u, &c) in channel_of.iter().enumerate() {
            if !(1..=num_channels).contains(&c) {
                return Err(Error::InvalidInput(format!(
                    "user {u} has channel {c} outside 1..={num_channels}"
                )));
            }
        }
        for (u, &w) in weights.iter().enumerate() {
            if !(w >= S::zero() && w <= S::one()) {
                return Err(Error::InvalidInput(format!(
                    "user {u} has weight {w} outside [0, 1]"
                )));
            }
        }
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|u| {
                (0..adjacency.rows())
                    .filter(|&s| adjacency.get(s, u))
                    .collect()
            })
            .collect();
        if let Some(u) = neighbors.iter().position(Vec::is_empty) {
            return Err(Error::InvalidInput(format!(
                "user {u} is covered by no sniffer"
            )));
        }
        Ok(Self {
            adjacency,
            channel_of,
            weights,
            num_channels,
            neighbors,
        })
    }

    /// Number of sniffers `m`.
    pub fn num_sniffers(&self) -> usize {
        self.adjacency.rows()
    }

    /// Number of users `n`.
    pub fn num_users(&self) -> usize {
        self.adjacency.cols()
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    pub fn channel_of(&self) -> &[usize] {
        &self.channel_of
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn total_weight(&self) -> S {
        self.weights.iter().copied().sum()
    }

    /// Sniffers covering user `u`, ascending.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    /// Users transmitting on channel `k`, ascending.
    pub fn users_on_channel(&self, k: usize) -> Vec<usize> {
        (0..self.num_users())
            .filter(|&u| self.channel_of[u] == k)
            .collect()
    }

    /// Coverage columns and weights of the users on channel `k`.
    pub fn channel_view(&self, k: usize) -> (BitMatrix, Vec<S>) {
        let users = self.users_on_channel(k);
        let g = self.adjacency.select_columns(&users);
        let w = users.iter().map(|&u| self.weights[u]).collect();
        (g, w)
    }

    /// Same structure with new weights.
    pub fn with_weights(&self, weights: Vec<S>) -> Result<Self> {
        Self::new(
            self.adjacency.clone(),
            self.channel_of.clone(),
            weights,
            self.num_channels,
        )
    }

    /// Append users; used when assembling a graph from per-channel pieces.
    pub fn from_parts(
        num_sniffers: usize,
        num_channels: usize,
        users: impl IntoIterator<Item = (Vec<bool>, usize, S)>,
    ) -> Result<Self> {
        let mut columns = Vec::new();
        let mut channels = Vec::new();
        let mut weights = Vec::new();
        for (col, k, w) in users {
            columns.push(col);
            channels.push(k);
            weights.push(w);
        }
        let adjacency = BitMatrix::from_columns(num_sniffers, &columns)?;
        Self::new(adjacency, channels, weights, num_channels)
    }

    pub fn cast<T: Scalar>(&self) -> CoverageGraph<T> {
        CoverageGraph {
            adjacency: self.adjacency.clone(),
            channel_of: self.channel_of.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| T::of(w.to_f64_lossy()))
                .collect(),
            num_channels: self.num_channels,
            neighbors: self.neighbors.clone(),
        }
    }
}

/// On-disk form of [`CoverageGraph`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub num_channels: usize,
    pub adjacency: BitMatrix,
    pub channel_of: Vec<usize>,
    pub weights: Vec<f64>,
}

impl<S: Scalar> From<CoverageGraph<S>> for GraphFile {
    fn from(g: CoverageGraph<S>) -> Self {
        GraphFile {
            num_channels: g.num_channels,
            weights: g.weights.iter().map(|w| w.to_f64_lossy()).collect(),
            adjacency: g.adjacency,
            channel_of: g.channel_of,
        }
    }
}

impl<S: Scalar> TryFrom<GraphFile> for CoverageGraph<S> {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        let weights = f.weights.into_iter().map(S::of).collect();
        CoverageGraph::new(f.adjacency, f.channel_of, weights, f.num_channels)
    }
}

/// Graph built from a scenario together with the users that were left out.
#[derive(Clone, Debug)]
pub struct BuiltGraph<S> {
    pub graph: CoverageGraph<S>,
    /// Scenario index of each graph column.
    pub kept_users: Vec<usize>,
    /// Scenario indices of users no sniffer can hear.
    pub dropped_users: Vec<usize>,
}

/// Disk coverage: sniffer `i` covers user `j` iff their distance is at most
/// the coverage radius (boundary included).
pub fn build_coverage_graph<S: Scalar>(scenario: &Scenario) -> BuiltGraph<S> {
    let m = scenario.sniffers.len();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut columns = Vec::new();
    for (j, u) in scenario.users.iter().enumerate() {
        let p = u.position();
        let col: Vec<bool> = scenario
            .sniffers
            .iter()
            .map(|s| s.distance(&p) <= scenario.coverage_radius)
            .collect();
        if col.iter().any(|&b| b) {
            kept.push(j);
            columns.push(col);
        } else {
            dropped.push(j);
        }
    }
    if !dropped.is_empty() {
        log::info!("{} users are outside every sniffer's range", dropped.len());
    }
    let adjacency = BitMatrix::from_fn(m, columns.len(), |i, j| columns[j][i]);
    let channel_of = kept.iter().map(|&j| scenario.users[j].channel_id).collect();
    let weights = kept
        .iter()
        .map(|&j| S::of(scenario.users[j].active_prob))
        .collect();
    let graph = CoverageGraph::new(adjacency, channel_of, weights, scenario.num_channels.max(1))
        .expect("disk coverage produces a valid graph from a valid scenario");
    BuiltGraph {
        graph,
        kept_users: kept,
        dropped_users: dropped,
    }
}

/// How indistinguishable users combine into one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Users transmit independently: `1 - prod(1 - p)`.
    Independent,
    /// At most one transmits at a time (e.g. CSMA): `min(1, sum p)`.
    Exclusive,
}

/// Groups of users sharing both coverage column and channel, in order of first
/// appearance.
pub fn indistinguishable_groups<S: Scalar>(graph: &CoverageGraph<S>) -> Vec<Vec<usize>> {
    let mut index: HashMap<(Vec<bool>, usize), usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for u in 0..graph.num_users() {
        let key = (graph.adjacency.column(u), graph.channel_of[u]);
        match index.get(&key) {
            Some(&g) => groups[g].push(u),
            None => {
                index.insert(key, groups.len());
                groups.push(vec![u]);
            }
        }
    }
    groups
}

pub fn merge_indistinguishable_users<S: Scalar>(
    graph: &CoverageGraph<S>,
    mode: MergeMode,
) -> CoverageGraph<S> {
    let groups = indistinguishable_groups(graph);
    if groups.len() == graph.num_users() {
        return graph.clone();
    }
    let keep: Vec<usize> = groups.iter().map(|g| g[0]).collect();
    let weights = groups
        .iter()
        .map(|g| {
            let ws = g.iter().map(|&u| graph.weights[u]);
            match mode {
                MergeMode::Independent => {
                    S::one() - ws.fold(S::one(), |acc, p| acc * (S::one() - p))
                }
                MergeMode::Exclusive => ws.sum::<S>().min(S::one()),
            }
        })
        .collect();
    let channel_of = keep.iter().map(|&u| graph.channel_of[u]).collect();
    CoverageGraph::new(
        graph.adjacency.select_columns(&keep),
        channel_of,
        weights,
        graph.num_channels,
    )
    .expect("merging preserves graph invariants")
}

/// Pure strategy: one channel (1-based) per sniffer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub channel_per_sniffer: Vec<usize>,
}

impl Assignment {
    pub fn new(channel_per_sniffer: Vec<usize>) -> Self {
        Self {
            channel_per_sniffer,
        }
    }

    pub fn uniform(num_sniffers: usize, channel: usize) -> Self {
        Self::new(vec![channel; num_sniffers])
    }

    pub fn len(&self) -> usize {
        self.channel_per_sniffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel_per_sniffer.is_empty()
    }

    pub fn channel(&self, sniffer: usize) -> usize {
        self.channel_per_sniffer[sniffer]
    }

    pub fn validate(&self, num_sniffers: usize, num_channels: usize) -> Result<()> {
        if self.len() != num_sniffers {
            return Err(Error::DimensionMismatch(format!(
                "assignment covers {} sniffers, graph has {num_sniffers}",
                self.len()
            )));
        }
        if let Some(s) = self
            .channel_per_sniffer
            .iter()
            .position(|c| !(1..=num_channels).contains(c))
        {
            return Err(Error::InvalidInput(format!(
                "sniffer {s} assigned to channel {} outside 1..={num_channels}",
                self.channel_per_sniffer[s]
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// Ground-truth per-user activity `Y` (rows are the users on the channel).
    UserActivity,
    /// Per-sniffer busy bits `X` (rows are all sniffers, tuned to the channel).
    SnifferObservation,
}

impl TraceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceKind::UserActivity => "user_activity",
            TraceKind::SnifferObservation => "sniffer_observation",
        }
    }
}

/// Slot-by-slot binary record for one channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceMatrix {
    pub kind: TraceKind,
    pub channel_id: usize,
    pub bits: BitMatrix,
}

impl TraceMatrix {
    pub fn new(kind: TraceKind, channel_id: usize, bits: BitMatrix) -> Self {
        Self {
            kind,
            channel_id,
            bits,
        }
    }

    pub fn rows(&self) -> usize {
        self.bits.rows()
    }

    /// Number of slots `T`.
    pub fn slots(&self) -> usize {
        self.bits.cols()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceScheme {
    KnownG,
    Bica,
    Qlica,
}

/// Estimated structure `Ĝ` (sniffers × components) and component probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct InferredModel<S> {
    pub adjacency_hat: BitMatrix,
    pub probs_hat: Vec<S>,
    pub scheme: InferenceScheme,
}

impl<S: Scalar> InferredModel<S> {
    pub fn empty(num_sniffers: usize, scheme: InferenceScheme) -> Self {
        Self {
            adjacency_hat: BitMatrix::zeros(num_sniffers, 0),
            probs_hat: Vec::new(),
            scheme,
        }
    }

    pub fn num_components(&self) -> usize {
        self.probs_hat.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_scenario() -> Scenario {
        // s1 hears u1 only, s2 hears both
        Scenario {
            area_width: 100.0,
            area_height: 100.0,
            sniffers: vec![Position::new(10.0, 50.0), Position::new(40.0, 50.0)],
            users: vec![
                UserSpec {
                    x: 25.0,
                    y: 50.0,
                    channel_id: 1,
                    active_prob: 0.2,
                },
                UserSpec {
                    x: 55.0,
                    y: 50.0,
                    channel_id: 2,
                    active_prob: 0.5,
                },
            ],
            num_channels: 2,
            coverage_radius: 20.0,
            cell_circumradius: 86.0,
        }
    }

    #[test]
    fn toy_geometry_gives_printed_adjacency() {
        let built = build_coverage_graph::<f64>(&toy_scenario());
        assert_eq!(built.graph.adjacency().row_strings(), vec!["10", "11"]);
        assert_eq!(built.graph.weights(), &[0.2, 0.5]);
        assert_eq!(built.graph.channel_of(), &[1, 2]);
        assert!(built.dropped_users.is_empty());
    }

    #[test]
    fn empty_scenario_gives_empty_graph() {
        let mut sc = toy_scenario();
        sc.users.clear();
        let built = build_coverage_graph::<f64>(&sc);
        assert_eq!(built.graph.num_users(), 0);
        assert_eq!(built.graph.num_sniffers(), 2);
    }

    #[test]
    fn boundary_user_is_covered_and_far_user_dropped() {
        let mut sc = toy_scenario();
        sc.users.push(UserSpec {
            x: 60.0,
            y: 50.0,
            channel_id: 1,
            active_prob: 0.1,
        });
        sc.users.push(UserSpec {
            x: 95.0,
            y: 95.0,
            channel_id: 1,
            active_prob: 0.1,
        });
        let built = build_coverage_graph::<f64>(&sc);
        assert_eq!(built.kept_users, vec![0, 1, 2]);
        assert_eq!(built.dropped_users, vec![3]);
        assert_eq!(built.graph.neighbors(2), &[1]);
    }

    #[test]
    fn fig2_layout_reproduces_printed_matrix() {
        let sniffers = [
            (360.0, 250.0),
            (420.0, 190.0),
            (190.0, 260.0),
            (460.0, 400.0),
            (310.0, 350.0),
        ];
        let users = [
            (310.0, 220.0),
            (390.0, 240.0),
            (180.0, 170.0),
            (370.0, 270.0),
            (240.0, 340.0),
            (420.0, 330.0),
            (450.0, 460.0),
            (380.0, 410.0),
            (290.0, 430.0),
            (300.0, 420.0),
        ];
        let sc = Scenario {
            area_width: 500.0,
            area_height: 500.0,
            sniffers: sniffers.iter().map(|&(x, y)| Position::new(x, y)).collect(),
            users: users
                .iter()
                .map(|&(x, y)| UserSpec {
                    x,
                    y,
                    channel_id: 1,
                    active_prob: 0.1,
                })
                .collect(),
            num_channels: 1,
            coverage_radius: 100.0,
            cell_circumradius: 86.0,
        };
        let built = build_coverage_graph::<f64>(&sc);
        assert_eq!(
            built.graph.adjacency().row_strings(),
            vec![
                "1101010000",
                "0101000000",
                "0010100000",
                "0000011100",
                "0001100111"
            ]
        );
    }

    #[test]
    fn graph_rejects_invalid_parts() {
        let g = BitMatrix::from_rows(&[[1u8, 0], [1, 0]]).unwrap();
        assert!(CoverageGraph::new(g.clone(), vec![1, 1], vec![0.1f64, 0.2], 1).is_err());
        let g = BitMatrix::from_rows(&[[1u8, 1]]).unwrap();
        assert!(CoverageGraph::new(g.clone(), vec![1, 3], vec![0.1f64, 0.2], 2).is_err());
        assert!(CoverageGraph::new(g.clone(), vec![1, 1], vec![0.1f64, 1.2], 2).is_err());
        assert!(CoverageGraph::new(g, vec![1], vec![0.1f64, 0.2], 2).is_err());
    }

    #[test]
    fn graph_json_uses_row_strings() {
        let g = CoverageGraph::new(
            BitMatrix::from_rows(&[[1u8, 0], [1, 1]]).unwrap(),
            vec![1, 2],
            vec![0.2f64, 0.5],
            2,
        )
        .unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"{"num_channels":2,"adjacency":["10","11"],"channel_of":[1,2],"weights":[0.2,0.5]}"#
        );
        let back: CoverageGraph<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn merge_independent_and_exclusive() {
        let g = CoverageGraph::new(
            BitMatrix::from_rows(&[[1u8, 1], [1, 1]]).unwrap(),
            vec![1, 1],
            vec![0.2f64, 0.5],
            1,
        )
        .unwrap();
        let merged = merge_indistinguishable_users(&g, MergeMode::Independent);
        assert_eq!(merged.num_users(), 1);
        assert!((merged.weights()[0] - 0.6).abs() < 1e-12);

        let g = g.with_weights(vec![0.7, 0.6]).unwrap();
        let merged = merge_indistinguishable_users(&g, MergeMode::Exclusive);
        assert_eq!(merged.weights(), &[1.0]);
    }

    #[test]
    fn merge_keeps_distinct_and_separates_channels() {
        let g = CoverageGraph::new(
            BitMatrix::from_rows(&[[1u8, 1, 0], [0, 0, 1]]).unwrap(),
            vec![1, 2, 1],
            vec![0.2f64, 0.5, 0.3],
            2,
        )
        .unwrap();
        assert_eq!(merge_indistinguishable_users(&g, MergeMode::Independent), g);
    }

    #[test]
    fn scenario_validation() {
        let mut sc = toy_scenario();
        assert!(sc.validate().is_ok());
        sc.users[0].channel_id = 3;
        assert!(sc.validate().is_err());
        let mut sc = toy_scenario();
        sc.users[0].active_prob = 0.0;
        assert!(sc.validate().is_err());
        let mut sc = toy_scenario();
        sc.sniffers[0].x = -1.0;
        assert!(sc.validate().is_err());
    }
}

//! Synthetic deployments and slot traces.
//!
//! Hex deployments tile the area with flat-top hexagonal cells anchored at the
//! origin. Cell `(col, row)` is centred at `(1.5 R col, sqrt(3) R (row + col/2
//! mod 1))`, i.e. odd columns are shifted by half a cell. Users belong to the
//! nearest centre, which is exactly hexagon membership.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitMatrix;
use crate::error::{Error, Result};
use crate::model::{CoverageGraph, Position, Scenario, TraceKind, TraceMatrix, UserSpec};
use crate::scalar::Scalar;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the half-open interval `(lo, hi]`.
fn sample_prob(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.gen();
    hi - (hi - lo) * u
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub num_users: usize,
    pub cell_circumradius: f64,
    pub sniffer_spacing: f64,
    /// Position of the first grid sniffer on each axis.
    pub sniffer_offset: f64,
    pub coverage_radius: f64,
    pub num_channels: usize,
    /// Activity probabilities are drawn from `(p_min, p_max]`.
    pub p_min: f64,
    pub p_max: f64,
}

impl HexConfig {
    /// 500 m square, 500 users, 25 grid sniffers.
    pub fn paper(num_channels: usize) -> Self {
        Self {
            area_width: 500.0,
            area_height: 500.0,
            num_users: 500,
            cell_circumradius: 86.0,
            sniffer_spacing: 100.0,
            sniffer_offset: 50.0,
            coverage_radius: 120.0,
            num_channels,
            p_min: 0.0,
            p_max: 0.06,
        }
    }

    /// Same area and cells as [`HexConfig::paper`] with 100 users and a 3x3
    /// sniffer grid, laid out like the full-size grid: spacing `W / 3`, offset
    /// half a spacing.
    pub fn reduced(num_channels: usize) -> Self {
        let spacing = 500.0 / 3.0;
        Self {
            num_users: 100,
            sniffer_spacing: spacing,
            sniffer_offset: spacing / 2.0,
            ..Self::paper(num_channels)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HexCell {
    pub col: i64,
    pub row: i64,
    pub center: Position,
    pub channel: usize,
}

/// A hex deployment with the cell layout it was drawn from.
#[derive(Clone, Debug)]
pub struct HexInstance {
    pub scenario: Scenario,
    pub cells: Vec<HexCell>,
    /// Cell index of every scenario user.
    pub user_cell: Vec<usize>,
}

impl HexInstance {
    /// `1 - prod(1 - p)` over each cell's users, averaged over occupied cells.
    pub fn mean_cell_busy_probability(&self) -> f64 {
        let mut idle = vec![1.0; self.cells.len()];
        let mut occupied = vec![false; self.cells.len()];
        for (u, &c) in self.user_cell.iter().enumerate() {
            idle[c] *= 1.0 - self.scenario.users[u].active_prob;
            occupied[c] = true;
        }
        let busy: Vec<f64> = idle
            .iter()
            .zip(&occupied)
            .filter(|(_, &o)| o)
            .map(|(&i, _)| 1.0 - i)
            .collect();
        if busy.is_empty() {
            0.0
        } else {
            busy.iter().sum::<f64>() / busy.len() as f64
        }
    }
}

pub fn hex_center(col: i64, row: i64, r: f64) -> Position {
    let shift = if col.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
    Position::new(1.5 * r * col as f64, 3f64.sqrt() * r * (row as f64 + shift))
}

/// Two cells are adjacent when their centres are one apothem pair apart.
pub fn cells_adjacent(a: &HexCell, b: &HexCell, r: f64) -> bool {
    let d = a.center.distance(&b.center);
    d > 0.0 && d < 3f64.sqrt() * r * 1.01
}

/// Cells whose hexagon can intersect the area, in column-major order.
fn hex_cells(width: f64, height: f64, r: f64) -> Vec<(i64, i64, Position)> {
    let h = 3f64.sqrt() * r;
    let max_col = (width / (1.5 * r)).ceil() as i64 + 1;
    let max_row = (height / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    for col in 0..=max_col {
        for row in -1..=max_row {
            let c = hex_center(col, row, r);
            if c.x - r <= width && c.x + r >= 0.0 && c.y - h / 2.0 <= height && c.y + h / 2.0 >= 0.0
            {
                out.push((col, row, c));
            }
        }
    }
    out
}

/// Greedy proper colouring with `k` channels.
///
/// Cells are visited in order and take the least used channel among those no
/// coloured neighbour holds. If greedy gets stuck, the standard 3-class hex
/// colouring is used instead, spreading each class over its channels.
fn color_cells(cells: &mut [HexCell], k: usize, r: f64) -> Result<()> {
    if k < 3 {
        return Err(Error::InvalidInput(format!(
            "{k} channels cannot colour a hexagonal cell layout; at least 3 are needed"
        )));
    }
    let n = cells.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| cells_adjacent(&cells[i], &cells[j], r))
                .collect()
        })
        .collect();
    let mut used = vec![0usize; k + 1];
    let mut greedy_ok = true;
    for i in 0..n {
        let taken: Vec<usize> = adj[i].iter().map(|&j| cells[j].channel).collect();
        let choice = (1..=k)
            .filter(|c| !taken.contains(c))
            .min_by_key(|&c| (used[c], c));
        match choice {
            Some(c) => {
                cells[i].channel = c;
                used[c] += 1;
            }
            None => {
                greedy_ok = false;
                break;
            }
        }
    }
    if greedy_ok {
        return Ok(());
    }
    log::debug!("hex colouring: greedy stuck, using class colouring");
    let mut used = vec![0usize; k + 1];
    for cell in cells.iter_mut() {
        let q = cell.col;
        let rr = cell.row - (cell.col - (cell.col & 1)) / 2;
        let class = (q - rr).rem_euclid(3) as usize;
        let c = (1..=k)
            .filter(|c| (c - 1) % 3 == class)
            .min_by_key(|&c| (used[c], c))
            .expect("k >= 3 leaves every class a channel");
        cell.channel = c;
        used[c] += 1;
    }
    Ok(())
}

pub fn grid_sniffers(width: f64, height: f64, spacing: f64, offset: f64) -> Vec<Position> {
    let axis = |len: f64| {
        let mut v = Vec::new();
        let mut x = offset;
        while x <= len {
            v.push(x);
            x += spacing;
        }
        v
    };
    let (xs, ys) = (axis(width), axis(height));
    ys.iter()
        .flat_map(|&y| xs.iter().map(move |&x| Position::new(x, y)))
        .collect()
}

pub fn generate_hex_instance(config: &HexConfig, seed: u64) -> Result<HexInstance> {
    if !(config.area_width > 0.0 && config.area_height > 0.0 && config.cell_circumradius > 0.0) {
        return Err(Error::InvalidInput(
            "area and cell radius must be positive".into(),
        ));
    }
    if !(0.0 <= config.p_min && config.p_min < config.p_max && config.p_max <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "activity range ({}, {}] is not inside (0, 1]",
            config.p_min, config.p_max
        )));
    }
    let r = config.cell_circumradius;
    let mut cells: Vec<HexCell> = hex_cells(config.area_width, config.area_height, r)
        .into_iter()
        .map(|(col, row, center)| HexCell {
            col,
            row,
            center,
            channel: 0,
        })
        .collect();
    color_cells(&mut cells, config.num_channels, r)?;

    let mut rng = seeded_rng(seed);
    let mut users = Vec::with_capacity(config.num_users);
    let mut user_cell = Vec::with_capacity(config.num_users);
    for _ in 0..config.num_users {
        let x = rng.gen::<f64>() * config.area_width;
        let y = rng.gen::<f64>() * config.area_height;
        let p = Position::new(x, y);
        let cell = (0..cells.len())
            .min_by(|&a, &b| {
                cells[a]
                    .center
                    .distance(&p)
                    .partial_cmp(&cells[b].center.distance(&p))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("area has at least one cell");
        users.push(UserSpec {
            x,
            y,
            channel_id: cells[cell].channel,
            active_prob: sample_prob(&mut rng, config.p_min, config.p_max),
        });
        user_cell.push(cell);
    }
    let scenario = Scenario {
        area_width: config.area_width,
        area_height: config.area_height,
        sniffers: grid_sniffers(
            config.area_width,
            config.area_height,
            config.sniffer_spacing,
            config.sniffer_offset,
        ),
        users,
        num_channels: config.num_channels,
        coverage_radius: config.coverage_radius,
        cell_circumradius: r,
    };
    Ok(HexInstance {
        scenario,
        cells,
        user_cell,
    })
}

pub fn generate_hex_scenario(config: &HexConfig, seed: u64) -> Result<Scenario> {
    Ok(generate_hex_instance(config, seed)?.scenario)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomConfig {
    pub num_sniffers: usize,
    pub num_users: usize,
    pub num_channels: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub area_width: f64,
    pub area_height: f64,
    pub coverage_radius: f64,
    /// Position draws per user before the sniffer layout is redrawn.
    pub user_tries: usize,
    /// Sniffer layouts tried before giving up.
    pub layout_tries: usize,
}

impl RandomConfig {
    /// Random sniffers in a 1000 m square with 100 m range.
    pub fn accuracy(num_sniffers: usize, num_users: usize) -> Self {
        Self {
            num_sniffers,
            num_users,
            num_channels: 1,
            p_min: 0.0,
            p_max: 0.06,
            area_width: 1000.0,
            area_height: 1000.0,
            coverage_radius: 100.0,
            user_tries: 2000,
            layout_tries: 200,
        }
    }
}

/// Random placement where every user is heard and no two users share a
/// coverage column.
pub fn generate_random_instance(config: &RandomConfig, seed: u64) -> Result<Scenario> {
    let (m, n, k) = (config.num_sniffers, config.num_users, config.num_channels);
    if m == 0 || n == 0 || k == 0 {
        return Err(Error::InvalidInput(
            "sniffer, user and channel counts must be positive".into(),
        ));
    }
    if !(0.0 <= config.p_min && config.p_min < config.p_max && config.p_max <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "activity range ({}, {}] is not inside (0, 1]",
            config.p_min, config.p_max
        )));
    }
    let mut rng = seeded_rng(seed);
    let (w, h, radius) = (
        config.area_width,
        config.area_height,
        config.coverage_radius,
    );
    'layout: for _ in 0..config.layout_tries.max(1) {
        let sniffers: Vec<Position> = (0..m)
            .map(|_| Position::new(rng.gen::<f64>() * w, rng.gen::<f64>() * h))
            .collect();
        let mut seen: Vec<Vec<bool>> = Vec::with_capacity(n);
        let mut users = Vec::with_capacity(n);
        for _ in 0..n {
            let mut placed = None;
            for _ in 0..config.user_tries.max(1) {
                let p = Position::new(rng.gen::<f64>() * w, rng.gen::<f64>() * h);
                let col: Vec<bool> = sniffers.iter().map(|s| s.distance(&p) <= radius).collect();
                if col.iter().any(|&b| b) && !seen.contains(&col) {
                    placed = Some((p, col));
                    break;
                }
            }
            let Some((p, col)) = placed else {
                continue 'layout;
            };
            seen.push(col);
            users.push(UserSpec {
                x: p.x,
                y: p.y,
                channel_id: rng.gen_range(1..=k),
                active_prob: sample_prob(&mut rng, config.p_min, config.p_max),
            });
        }
        return Ok(Scenario {
            area_width: w,
            area_height: h,
            sniffers,
            users,
            num_channels: k,
            coverage_radius: radius,
            cell_circumradius: 0.0,
        });
    }
    Err(Error::RetriesExhausted(config.layout_tries.max(1)))
}

/// Abstract graph with distinct nonzero random columns, for oracle tests.
pub fn random_graph<S: Scalar>(
    num_sniffers: usize,
    num_users: usize,
    num_channels: usize,
    p_range: (f64, f64),
    seed: u64,
) -> Result<CoverageGraph<S>> {
    let m = num_sniffers;
    if m == 0 || num_channels == 0 {
        return Err(Error::InvalidInput(
            "need at least one sniffer and channel".into(),
        ));
    }
    if m < 64 && num_users as u128 > (1u128 << m) - 1 {
        return Err(Error::InvalidInput(format!(
            "{num_users} distinct nonzero columns do not fit {m} sniffers"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut cols: Vec<Vec<bool>> = Vec::with_capacity(num_users);
    while cols.len() < num_users {
        let col: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
        if col.iter().any(|&b| b) && !cols.contains(&col) {
            cols.push(col);
        }
    }
    let users: Vec<(Vec<bool>, usize, S)> = cols
        .into_iter()
        .map(|c| {
            let k = rng.gen_range(1..=num_channels);
            let p = sample_prob(&mut rng, p_range.0, p_range.1);
            (c, k, S::of(p))
        })
        .collect();
    CoverageGraph::from_parts(m, num_channels, users)
}

/// Optional deviations from independent Bernoulli activity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleOptions {
    /// Group id per graph user. Within a group at most one user is active per
    /// slot: if several draw active, one of them is kept uniformly at random.
    pub exclusive_groups: Option<Vec<usize>>,
}

/// Per-channel activity `Y` and sniffer observations `X` over `slots` slots.
///
/// Each channel draws from its own stream of the seeded generator, so the
/// result does not depend on how channels are scheduled.
pub fn sample_traces<S: Scalar>(
    graph: &CoverageGraph<S>,
    slots: usize,
    seed: u64,
) -> Result<(Vec<TraceMatrix>, Vec<TraceMatrix>)> {
    sample_traces_with(graph, slots, seed, &SampleOptions::default())
}

pub fn sample_traces_with<S: Scalar>(
    graph: &CoverageGraph<S>,
    slots: usize,
    seed: u64,
    options: &SampleOptions,
) -> Result<(Vec<TraceMatrix>, Vec<TraceMatrix>)> {
    if slots == 0 {
        return Err(Error::InvalidInput("at least one slot is required".into()));
    }
    if let Some(g) = &options.exclusive_groups {
        if g.len() != graph.num_users() {
            return Err(Error::DimensionMismatch(format!(
                "{} exclusion groups for {} users",
                g.len(),
                graph.num_users()
            )));
        }
    }
    let per_channel: Vec<(TraceMatrix, TraceMatrix)> = (1..=graph.num_channels())
        .into_par_iter()
        .map(|k| sample_channel(graph, k, slots, seed, options))
        .collect();
    Ok(per_channel.into_iter().unzip())
}

fn sample_channel<S: Scalar>(
    graph: &CoverageGraph<S>,
    k: usize,
    slots: usize,
    seed: u64,
    options: &SampleOptions,
) -> (TraceMatrix, TraceMatrix) {
    let users = graph.users_on_channel(k);
    let m = graph.num_sniffers();
    let mut rng = seeded_rng(seed);
    rng.set_stream(k as u64);
    let probs: Vec<f64> = users
        .iter()
        .map(|&u| graph.weights()[u].to_f64_lossy())
        .collect();
    let mut y = BitMatrix::zeros(users.len(), slots);
    let mut x = BitMatrix::zeros(m, slots);
    let mut active: Vec<usize> = Vec::with_capacity(users.len());
    for t in 0..slots {
        active.clear();
        for (r, &p) in probs.iter().enumerate() {
            if rng.gen::<f64>() < p {
                active.push(r);
            }
        }
        if let Some(groups) = &options.exclusive_groups {
            let mut by_group: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &r in &active {
                by_group.entry(groups[users[r]]).or_default().push(r);
            }
            active = by_group
                .into_values()
                .map(|g| {
                    if g.len() == 1 {
                        g[0]
                    } else {
                        g[rng.gen_range(0..g.len())]
                    }
                })
                .collect();
        }
        for &r in &active {
            y.set(r, t, true);
            for &s in graph.neighbors(users[r]) {
                x.set(s, t, true);
            }
        }
    }
    (
        TraceMatrix::new(TraceKind::UserActivity, k, y),
        TraceMatrix::new(TraceKind::SnifferObservation, k, x),
    )
}

/// Write traces as CSV: `kind,channel,row,t0,...` with one line per row.
pub fn write_traces_csv<W: Write>(mut out: W, traces: &[TraceMatrix]) -> Result<()> {
    let slots = traces.first().map_or(0, TraceMatrix::slots);
    if traces.iter().any(|t| t.slots() != slots) {
        return Err(Error::DimensionMismatch(
            "traces differ in slot count".into(),
        ));
    }
    let mut header = String::from("kind,channel,row");
    for t in 0..slots {
        header.push_str(&format!(",t{t}"));
    }
    writeln!(out, "{header}")?;
    for trace in traces {
        for r in 0..trace.rows() {
            let mut line = format!("{},{},{}", trace.kind.as_str(), trace.channel_id, r);
            for &b in trace.bits.row(r) {
                line.push(',');
                line.push(if b { '1' } else { '0' });
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Parse traces written by [`write_traces_csv`]. Matrices come back in order
/// of first appearance of each `(kind, channel)`.
pub fn read_traces_csv<R: BufRead>(input: R) -> Result<Vec<TraceMatrix>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::TraceFormat("empty file".into()))??;
    let fields: Vec<&str> = header.trim_end().split(',').collect();
    if fields.len() < 3 || fields[..3] != ["kind", "channel", "row"] {
        return Err(Error::TraceFormat(
            "header must start with kind,channel,row".into(),
        ));
    }
    for (t, f) in fields[3..].iter().enumerate() {
        if *f != format!("t{t}") {
            return Err(Error::TraceFormat(format!(
                "unexpected header column {f:?}"
            )));
        }
    }
    let slots = fields.len() - 3;
    let mut order: Vec<(TraceKind, usize)> = Vec::new();
    let mut rows: BTreeMap<(u8, usize), Vec<(usize, Vec<bool>)>> = BTreeMap::new();
    for (ln, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| Error::TraceFormat(format!("line {}: {what}", ln + 2));
        if parts.len() != slots + 3 {
            return Err(bad("wrong number of fields"));
        }
        let kind = match parts[0] {
            "user_activity" => TraceKind::UserActivity,
            "sniffer_observation" => TraceKind::SnifferObservation,
            _ => return Err(bad("unknown kind")),
        };
        let channel: usize = parts[1].parse().map_err(|_| bad("bad channel"))?;
        let row: usize = parts[2].parse().map_err(|_| bad("bad row index"))?;
        let bits = parts[3..]
            .iter()
            .map(|b| match *b {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad("bits must be 0 or 1")),
            })
            .collect::<Result<Vec<bool>>>()?;
        let key = (kind as u8, channel);
        if !order.contains(&(kind, channel)) {
            order.push((kind, channel));
        }
        rows.entry(key).or_default().push((row, bits));
    }
    let mut out = Vec::with_capacity(order.len());
    for (kind, channel) in order {
        let mut entries = rows.remove(&(kind as u8, channel)).unwrap_or_default();
        entries.sort_by_key(|(r, _)| *r);
        if entries.iter().enumerate().any(|(i, (r, _))| *r != i) {
            return Err(Error::TraceFormat(format!(
                "{} channel {channel}: row indices must be 0..n without gaps",
                kind.as_str()
            )));
        }
        let n = entries.len();
        let bits = BitMatrix::from_fn(n, slots, |i, t| entries[i].1[t]);
        out.push(TraceMatrix::new(kind, channel, bits));
    }
    Ok(out)
}

//! End-to-end experiment pipelines producing CSV tables.
//!
//! Every run derives its own seed from the experiment seed and the run's
//! coordinates, so runs execute in parallel yet the table is reproducible
//! from `(config, seed)` alone. Rows are emitted in a fixed order.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{bica, qlica, BicaConfig, QlicaConfig};
use crate::metrics::{match_structures, structure_error_of, transmission_probability_error};
use crate::model::{
    build_coverage_graph, merge_indistinguishable_users, CoverageGraph, InferredModel, MergeMode,
    TraceMatrix,
};
use crate::qom::evaluate_qom;
use crate::simgen::{
    generate_hex_scenario, generate_random_instance, sample_traces, HexConfig, RandomConfig,
};
use crate::solvers::{round_probrand, sniffer_busy_fractions, solve_greedy, solve_lp, solve_max};

/// SplitMix64 finalizer over the seed and run coordinates.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    let mut z = seed;
    for &c in coords {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(c);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    UserCentric,
    Qlica,
    Bica,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::UserCentric => "user-centric",
            Scheme::Qlica => "qlica",
            Scheme::Bica => "bica",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user-centric" => Ok(Scheme::UserCentric),
            "qlica" => Ok(Scheme::Qlica),
            "bica" => Ok(Scheme::Bica),
            _ => Err(Error::InvalidInput(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Max,
    Greedy,
    LpRound,
    /// The LP objective itself, an upper bound rather than an assignment.
    LpUp,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Max, Algo::Greedy, Algo::LpRound, Algo::LpUp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::Max => "max",
            Algo::Greedy => "greedy",
            Algo::LpRound => "lp-round",
            Algo::LpUp => "lp-up",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QomExperimentConfig {
    /// Deployment template; its channel count is overridden per sweep value.
    pub hex: HexConfig,
    pub channels: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub runs: usize,
    /// Calibration slots sampled per channel.
    pub slots: usize,
    pub rounding_repetitions: usize,
    pub bica: BicaConfig,
    pub qlica: QlicaConfig,
}

impl QomExperimentConfig {
    /// Full-size deployment: 500 users, 25 sniffers.
    pub fn paper() -> Self {
        Self {
            hex: HexConfig::paper(3),
            channels: vec![3, 6, 9],
            schemes: vec![Scheme::UserCentric, Scheme::Qlica, Scheme::Bica],
            runs: 20,
            slots: 10_000,
            rounding_repetitions: crate::solvers::DEFAULT_REPETITIONS,
            bica: BicaConfig {
                max_sniffers: 25,
                ..BicaConfig::default()
            },
            qlica: QlicaConfig::default(),
        }
    }

    /// Desk-scale deployment: 100 users, 9 sniffers on the same area.
    pub fn reduced() -> Self {
        Self {
            hex: HexConfig::reduced(3),
            ..Self::paper()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QomRow {
    pub scheme: Scheme,
    pub algo: Algo,
    #[serde(rename = "K")]
    pub channels: usize,
    pub run: usize,
    pub qom: f64,
}

/// Per-run QoM of every algorithm under every scheme.
///
/// A run index fixes user positions and probabilities for every `K`; only the
/// cell colouring changes with `K`. Within a run all schemes see the same
/// deployment and traces.
/// Assignments are scored against the true graph; `lp-up` reports the LP
/// objective on the graph the scheme works with.
pub fn run_experiment_qom(config: &QomExperimentConfig, seed: u64) -> Result<Vec<QomRow>> {
    if config.channels.iter().any(|&k| k < 3) {
        return Err(Error::InvalidInput(
            "hex deployments need at least 3 channels".into(),
        ));
    }
    if config.slots == 0 {
        return Err(Error::InvalidInput(
            "at least one calibration slot is required".into(),
        ));
    }
    let tasks: Vec<(usize, usize)> = config
        .channels
        .iter()
        .flat_map(|&k| (0..config.runs).map(move |r| (k, r)))
        .collect();
    let per_task: Vec<Vec<QomRow>> = tasks
        .par_iter()
        .map(|&(k, run)| qom_run(config, k, run, derive_seed(seed, &[run as u64])))
        .collect::<Result<_>>()?;
    // order: scheme, K, run, algo
    let mut rows = Vec::new();
    for &scheme in &config.schemes {
        for task in &per_task {
            rows.extend(task.iter().filter(|r| r.scheme == scheme).cloned());
        }
    }
    Ok(rows)
}

fn qom_run(config: &QomExperimentConfig, k: usize, run: usize, seed: u64) -> Result<Vec<QomRow>> {
    let hex = HexConfig {
        num_channels: k,
        ..config.hex.clone()
    };
    let scenario = generate_hex_scenario(&hex, seed)?;
    let built = build_coverage_graph::<f64>(&scenario);
    let truth = merge_indistinguishable_users(&built.graph, MergeMode::Independent);
    let (_, observations) = sample_traces(&truth, config.slots, derive_seed(seed, &[1]))?;
    let busy = sniffer_busy_fractions(&truth, &observations)?;
    let max_qom = evaluate_qom(&truth, &solve_max(&busy))?.expected_qom;

    let mut rows = Vec::new();
    for &scheme in &config.schemes {
        let working = match scheme {
            Scheme::UserCentric => truth.clone(),
            Scheme::Bica | Scheme::Qlica => inferred_graph(config, scheme, &truth, &observations)?,
        };
        let greedy = evaluate_qom(&truth, &solve_greedy(&working))?.expected_qom;
        let lp = solve_lp(&working)?;
        let rounded = round_probrand(
            &lp,
            &working,
            config.rounding_repetitions,
            derive_seed(seed, &[2]),
        );
        let lp_round = evaluate_qom(&truth, &rounded)?.expected_qom;
        for (algo, qom) in [
            (Algo::Max, max_qom),
            (Algo::Greedy, greedy),
            (Algo::LpRound, lp_round),
            (Algo::LpUp, lp.objective),
        ] {
            rows.push(QomRow {
                scheme,
                algo,
                channels: k,
                run,
                qom,
            });
        }
    }
    Ok(rows)
}

/// Coverage graph assembled from per-channel inferred components.
fn inferred_graph(
    config: &QomExperimentConfig,
    scheme: Scheme,
    truth: &CoverageGraph<f64>,
    observations: &[TraceMatrix],
) -> Result<CoverageGraph<f64>> {
    let m = truth.num_sniffers();
    let mut parts = Vec::new();
    for trace in observations {
        let model: InferredModel<f64> = match scheme {
            Scheme::Bica => bica(trace, &config.bica)?,
            _ => qlica(trace, &config.qlica)?,
        };
        for (j, &p) in model.probs_hat.iter().enumerate() {
            parts.push((model.adjacency_hat.column(j), trace.channel_id, p));
        }
    }
    CoverageGraph::from_parts(m, truth.num_channels(), parts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QomSummary {
    pub scheme: Scheme,
    pub algo: Algo,
    #[serde(rename = "K")]
    pub channels: usize,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation per `(scheme, algo, K)`, in first
/// appearance order.
pub fn summarize_qom(rows: &[QomRow]) -> Vec<QomSummary> {
    let mut keys: Vec<(Scheme, Algo, usize)> = Vec::new();
    for r in rows {
        let key = (r.scheme, r.algo, r.channels);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(scheme, algo, channels)| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.algo == algo && r.channels == channels)
                .map(|r| r.qom)
                .collect();
            let (mean, std) = mean_std(&v);
            QomSummary {
                scheme,
                algo,
                channels,
                runs: v.len(),
                mean,
                std,
            }
        })
        .collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyExperimentConfig {
    /// Deployment template; its user count is overridden per sweep value.
    pub random: RandomConfig,
    pub user_counts: Vec<usize>,
    pub runs: usize,
    pub slots: usize,
    pub bica: BicaConfig,
    pub qlica: QlicaConfig,
}

impl Default for AccuracyExperimentConfig {
    /// 10 random sniffers in a 1000 m square, `n` from 5 to 20, 10000 slots.
    fn default() -> Self {
        Self {
            random: RandomConfig::accuracy(10, 5),
            user_counts: (5..=20).collect(),
            runs: 20,
            slots: 10_000,
            bica: BicaConfig::default(),
            qlica: QlicaConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub scheme: Scheme,
    pub n: usize,
    pub run: usize,
    pub structure_err: f64,
    /// NaN when no matched pair has positive probabilities on both sides.
    pub prob_err: f64,
}

/// Structure and probability error of bICA and qlICA on random instances.
pub fn run_experiment_accuracy(
    config: &AccuracyExperimentConfig,
    seed: u64,
) -> Result<Vec<AccuracyRow>> {
    if config.slots == 0 {
        return Err(Error::InvalidInput("at least one slot is required".into()));
    }
    let tasks: Vec<(usize, usize)> = config
        .user_counts
        .iter()
        .flat_map(|&n| (0..config.runs).map(move |r| (n, r)))
        .collect();
    let per_task: Vec<[AccuracyRow; 2]> = tasks
        .par_iter()
        .map(|&(n, run)| accuracy_run(config, n, run, derive_seed(seed, &[n as u64, run as u64])))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(2 * per_task.len());
    for scheme in [Scheme::Bica, Scheme::Qlica] {
        for pair in &per_task {
            rows.extend(pair.iter().filter(|r| r.scheme == scheme).cloned());
        }
    }
    Ok(rows)
}

fn accuracy_run(
    config: &AccuracyExperimentConfig,
    n: usize,
    run: usize,
    seed: u64,
) -> Result<[AccuracyRow; 2]> {
    let rc = RandomConfig {
        num_users: n,
        num_channels: 1,
        ..config.random.clone()
    };
    let scenario = generate_random_instance(&rc, seed)?;
    let truth = build_coverage_graph::<f64>(&scenario).graph;
    let (_, observations) = sample_traces(&truth, config.slots, derive_seed(seed, &[1]))?;
    let x = &observations[0];
    let score = |scheme: Scheme, model: InferredModel<f64>| -> Result<AccuracyRow> {
        let mt = match_structures(truth.adjacency(), &model.adjacency_hat)?;
        let prob_err =
            match transmission_probability_error(truth.weights(), &model.probs_hat, &mt.pairs) {
                Ok(v) => v,
                Err(Error::InvalidInput(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
        Ok(AccuracyRow {
            scheme,
            n,
            run,
            structure_err: structure_error_of(&mt),
            prob_err,
        })
    };
    Ok([
        score(Scheme::Bica, bica(x, &config.bica)?)?,
        score(Scheme::Qlica, qlica(x, &config.qlica)?)?,
    ])
}

/// Mean structure and probability error per `(scheme, n)`; NaN probability
/// errors are left out of their mean.
pub fn summarize_accuracy(rows: &[AccuracyRow]) -> Vec<(Scheme, usize, f64, f64)> {
    let mut keys: Vec<(Scheme, usize)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.scheme, r.n)) {
            keys.push((r.scheme, r.n));
        }
    }
    keys.into_iter()
        .map(|(scheme, n)| {
            let sel: Vec<&AccuracyRow> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.n == n)
                .collect();
            let s: Vec<f64> = sel.iter().map(|r| r.structure_err).collect();
            let p: Vec<f64> = sel
                .iter()
                .map(|r| r.prob_err)
                .filter(|v| v.is_finite())
                .collect();
            (scheme, n, mean_std(&s).0, mean_std(&p).0)
        })
        .collect()
}

fn header<W: Write, C: Serialize>(out: &mut W, name: &str, config: &C, seed: u64) -> Result<()> {
    writeln!(out, "# experiment={name} seed={seed}")?;
    writeln!(out, "# config={}", serde_json::to_string(config)?)?;
    Ok(())
}

pub fn write_qom_csv<W: Write>(
    mut out: W,
    config: &QomExperimentConfig,
    seed: u64,
    rows: &[QomRow],
) -> Result<()> {
    header(&mut out, "qom", config, seed)?;
    writeln!(out, "scheme,algo,K,run,qom")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.9}",
            r.scheme, r.algo, r.channels, r.run, r.qom
        )?;
    }
    Ok(())
}

pub fn write_accuracy_csv<W: Write>(
    mut out: W,
    config: &AccuracyExperimentConfig,
    seed: u64,
    rows: &[AccuracyRow],
) -> Result<()> {
    header(&mut out, "accuracy", config, seed)?;
    writeln!(out, "scheme,n,run,structure_err,prob_err")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.9},{:.9}",
            r.scheme, r.n, r.run, r.structure_err, r.prob_err
        )?;
    }
    Ok(())
}

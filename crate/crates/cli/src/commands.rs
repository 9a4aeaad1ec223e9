use qom_core::experiment::{
    run_experiment_accuracy, run_experiment_qom, summarize_accuracy, summarize_qom,
    write_accuracy_csv, write_qom_csv, AccuracyExperimentConfig, QomExperimentConfig, Scheme,
};
use qom_core::inference::{
    bica, infer_p_known_g, qlica, BicaConfig, ObservationStats, QlicaConfig,
};
use qom_core::metrics::{match_structures, structure_error_of, transmission_probability_error};
use qom_core::model::indistinguishable_groups;
use qom_core::qom::{brute_force_opt, empirical_qom, evaluate_qom, DEFAULT_ENUMERATION_CAP};
use qom_core::simgen::{
    generate_hex_scenario, generate_random_instance, sample_traces_with, HexConfig, RandomConfig,
    SampleOptions,
};
use qom_core::solvers::{
    analytic_busy_fractions, round_probrand, sniffer_busy_fractions, solve_greedy, solve_lp,
    solve_max,
};
use qom_core::{
    CoverageGraph, Error, InferenceScheme, InferredModel, Result, TraceKind, TraceMatrix,
};
use serde_json::{json, Value};

use crate::io::{
    emit, json_bytes, load_graph, load_traces, parse_assignment, read_value, traces_to_csv,
    traces_to_json,
};
use crate::{
    AccuracyExperimentArgs, Cli, Command, EvalArgs, ExperimentCommand, ExperimentPreset, Format,
    GenArgs, InferArgs, InferScheme, Preset, QomExperimentArgs, SampleArgs, ScoreArgs, SolveAlgo,
    SolveArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    let bytes = match &cli.command {
        Command::Gen(a) => gen(cli, a)?,
        Command::Sample(a) => sample(cli, a)?,
        Command::Solve(a) => solve(cli, a)?,
        Command::Infer(a) => infer(cli, a)?,
        Command::Score(a) => score(cli, a)?,
        Command::Eval(a) => eval(cli, a)?,
        Command::Experiment(ExperimentCommand::Qom(a)) => experiment_qom(cli, a)?,
        Command::Experiment(ExperimentCommand::Accuracy(a)) => experiment_accuracy(cli, a)?,
    };
    emit(cli.out.as_deref(), &bytes)
}

fn json_only(cli: &Cli, what: &str) -> Result<()> {
    if cli.format == Some(Format::Csv) {
        return Err(Error::InvalidInput(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<Vec<u8>> {
    json_only(cli, "scenario")?;
    let scenario = match a.preset {
        Preset::HexPaper | Preset::HexReduced => {
            let mut cfg = if a.preset == Preset::HexPaper {
                HexConfig::paper(a.channels)
            } else {
                HexConfig::reduced(a.channels)
            };
            if let Some(n) = a.users {
                cfg.num_users = n;
            }
            generate_hex_scenario(&cfg, cli.seed)?
        }
        Preset::Random => {
            let cfg = RandomConfig {
                num_channels: a.channels,
                ..RandomConfig::accuracy(a.sniffers, a.users.unwrap_or(10))
            };
            generate_random_instance(&cfg, cli.seed)?
        }
    };
    json_bytes(&serde_json::to_value(&scenario)?)
}

fn sample(cli: &Cli, a: &SampleArgs) -> Result<Vec<u8>> {
    let graph = load_graph(&a.graph)?;
    let options = if a.exclusive {
        let mut group = vec![0; graph.num_users()];
        for (g, members) in indistinguishable_groups(&graph).iter().enumerate() {
            for &u in members {
                group[u] = g;
            }
        }
        SampleOptions {
            exclusive_groups: Some(group),
        }
    } else {
        SampleOptions::default()
    };
    let (y, x) = sample_traces_with(&graph, a.slots, cli.seed, &options)?;
    let all: Vec<TraceMatrix> = y.into_iter().chain(x).collect();
    match cli.format {
        Some(Format::Json) => json_bytes(&traces_to_json(&all)),
        _ => traces_to_csv(&all),
    }
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<Vec<u8>> {
    let graph = load_graph(&a.graph)?;
    let mut lp_objective = None;
    let (name, assignment) = match a.algo {
        SolveAlgo::Greedy => ("greedy", solve_greedy(&graph)),
        SolveAlgo::Max => {
            let busy = match &a.traces {
                Some(path) => sniffer_busy_fractions(&graph, &load_traces(path)?)?,
                None => analytic_busy_fractions(&graph),
            };
            ("max", solve_max(&busy))
        }
        SolveAlgo::LpRound => {
            let lp = solve_lp(&graph)?;
            lp_objective = Some(lp.objective);
            ("lp-round", round_probrand(&lp, &graph, a.reps, cli.seed))
        }
        SolveAlgo::Brute => ("brute", brute_force_opt(&graph, DEFAULT_ENUMERATION_CAP)?.0),
    };
    let report = evaluate_qom(&graph, &assignment)?;
    match cli.format {
        Some(Format::Csv) => {
            let mut s = String::from("sniffer,channel\n");
            for (i, c) in assignment.channel_per_sniffer.iter().enumerate() {
                s.push_str(&format!("{i},{c}\n"));
            }
            Ok(s.into_bytes())
        }
        _ => {
            let mut v = json!({
                "algo": name,
                "assignment": assignment.channel_per_sniffer,
                "expected_qom": report.expected_qom,
            });
            if let Some(obj) = lp_objective {
                v["lp_objective"] = json!(obj);
            }
            json_bytes(&v)
        }
    }
}

fn infer(cli: &Cli, a: &InferArgs) -> Result<Vec<u8>> {
    json_only(cli, "inferred model")?;
    let traces = load_traces(&a.traces)?;
    let graph = match (a.scheme, &a.graph) {
        (InferScheme::KnownG, Some(p)) => Some(load_graph(p)?),
        (InferScheme::KnownG, None) => {
            return Err(Error::InvalidInput("known-g needs --graph".into()));
        }
        _ => None,
    };
    let selected: Vec<&TraceMatrix> = traces
        .iter()
        .filter(|t| t.kind == TraceKind::SnifferObservation)
        .filter(|t| a.channel.is_none_or(|k| t.channel_id == k))
        .collect();
    if selected.is_empty() {
        return Err(match a.channel {
            Some(k) => Error::MissingChannel(k),
            None => Error::InvalidInput("no sniffer observation traces in the input".into()),
        });
    }
    let mut out = Vec::new();
    for trace in selected {
        let model: InferredModel = match a.scheme {
            InferScheme::KnownG => known_g_model(graph.as_ref().expect("loaded above"), trace)?,
            InferScheme::Bica => bica(
                trace,
                &BicaConfig {
                    epsilon: a.epsilon,
                    max_sniffers: a.max_sniffers,
                },
            )?,
            InferScheme::Qlica => qlica(
                trace,
                &QlicaConfig {
                    threshold: a.threshold,
                    restarts: a.restarts,
                    seed: cli.seed,
                    ..QlicaConfig::default()
                },
            )?,
        };
        let mut v = serde_json::to_value(&model)?;
        v["channel_id"] = json!(trace.channel_id);
        out.push(v);
    }
    json_bytes(&Value::Array(out))
}

fn known_g_model(graph: &CoverageGraph, trace: &TraceMatrix) -> Result<InferredModel> {
    if trace.rows() != graph.num_sniffers() {
        return Err(Error::DimensionMismatch(format!(
            "trace has {} sniffer rows, graph has {} sniffers",
            trace.rows(),
            graph.num_sniffers()
        )));
    }
    let (g, _) = graph.channel_view(trace.channel_id);
    if g.cols() == 0 {
        return Ok(InferredModel::empty(g.rows(), InferenceScheme::KnownG));
    }
    let stats = ObservationStats::from_trace(trace)?;
    let probs_hat = infer_p_known_g(&g, &stats)?;
    Ok(InferredModel {
        adjacency_hat: g,
        probs_hat,
        scheme: InferenceScheme::KnownG,
    })
}

fn score(cli: &Cli, a: &ScoreArgs) -> Result<Vec<u8>> {
    let truth = load_graph(&a.truth)?;
    let inferred = read_value(&a.inferred)?;
    let entries: Vec<(Option<usize>, Value)> = match inferred {
        Value::Array(items) => items
            .into_iter()
            .map(|v| {
                let k = v
                    .get("channel_id")
                    .and_then(Value::as_u64)
                    .map(|k| k as usize);
                (k, v)
            })
            .collect(),
        other => vec![(None, other)],
    };
    let mut rows = Vec::new();
    for (channel, value) in entries {
        let model: InferredModel = serde_json::from_value(value)?;
        let (g, p) = match channel {
            Some(k) if (1..=truth.num_channels()).contains(&k) => truth.channel_view(k),
            Some(k) => return Err(Error::MissingChannel(k)),
            None => (truth.adjacency().clone(), truth.weights().to_vec()),
        };
        let mt = match_structures(&g, &model.adjacency_hat)?;
        let prob = match transmission_probability_error(&p, &model.probs_hat, &mt.pairs) {
            Ok(v) => Some(v),
            Err(Error::InvalidInput(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push((channel, structure_error_of(&mt), prob, mt));
    }
    match cli.format {
        Some(Format::Csv) => {
            let mut s = String::from("channel,structure_err,prob_err\n");
            for (k, se, pe, _) in &rows {
                let k = k.map_or(String::from("all"), |k| k.to_string());
                let pe = pe.map_or(String::from("nan"), |v| format!("{v:.9}"));
                s.push_str(&format!("{k},{se:.9},{pe}\n"));
            }
            Ok(s.into_bytes())
        }
        _ => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(k, se, pe, mt)| {
                    json!({
                        "channel_id": k,
                        "structure_error_ratio": se,
                        "transmission_probability_error": pe,
                        "hamming_distance": mt.distance,
                        "pairs": mt.pairs,
                    })
                })
                .collect();
            let v = if items.len() == 1 && rows[0].0.is_none() {
                items.into_iter().next().expect("one item")
            } else {
                Value::Array(items)
            };
            json_bytes(&v)
        }
    }
}

fn eval(cli: &Cli, a: &EvalArgs) -> Result<Vec<u8>> {
    let graph = load_graph(&a.graph)?;
    let assignment = parse_assignment(&a.assignment)?;
    let report = evaluate_qom(&graph, &assignment)?;
    let empirical = match &a.traces {
        Some(path) => Some(empirical_qom(&graph, &load_traces(path)?, &assignment)?),
        None => None,
    };
    match cli.format {
        Some(Format::Json) => {
            let mut v = serde_json::to_value(&report)?;
            if let Some(e) = empirical {
                v["empirical_qom"] = json!(e);
            }
            json_bytes(&v)
        }
        _ => {
            let mut s = format!("{:.6}\n", report.expected_qom);
            if let Some(e) = empirical {
                s.push_str(&format!("{e:.6}\n"));
            }
            Ok(s.into_bytes())
        }
    }
}

fn experiment_qom(cli: &Cli, a: &QomExperimentArgs) -> Result<Vec<u8>> {
    let base = match a.preset {
        ExperimentPreset::Reduced => QomExperimentConfig::reduced(),
        ExperimentPreset::Paper => QomExperimentConfig::paper(),
    };
    let schemes = a
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<Vec<_>>>()?;
    let config = QomExperimentConfig {
        channels: a.channels.clone(),
        schemes,
        runs: a.runs,
        slots: a.slots,
        rounding_repetitions: a.reps,
        qlica: QlicaConfig {
            restarts: a.restarts,
            seed: cli.seed,
            ..base.qlica
        },
        ..base
    };
    let rows = run_experiment_qom(&config, cli.seed)?;
    match cli.format {
        Some(Format::Json) => json_bytes(&json!({
            "experiment": "qom",
            "seed": cli.seed,
            "config": config,
            "rows": rows,
            "summary": summarize_qom(&rows),
        })),
        _ => {
            let mut buf = Vec::new();
            write_qom_csv(&mut buf, &config, cli.seed, &rows)?;
            Ok(buf)
        }
    }
}

fn experiment_accuracy(cli: &Cli, a: &AccuracyExperimentArgs) -> Result<Vec<u8>> {
    let base = AccuracyExperimentConfig::default();
    let config = AccuracyExperimentConfig {
        random: RandomConfig {
            num_sniffers: a.sniffers,
            ..base.random.clone()
        },
        user_counts: a.users.clone(),
        runs: a.runs,
        slots: a.slots,
        qlica: QlicaConfig {
            restarts: a.restarts,
            seed: cli.seed,
            ..base.qlica
        },
        ..base
    };
    let rows = run_experiment_accuracy(&config, cli.seed)?;
    match cli.format {
        Some(Format::Json) => {
            let summary: Vec<Value> = summarize_accuracy(&rows)
                .into_iter()
                .map(|(scheme, n, s, p)| {
                    json!({ "scheme": scheme, "n": n, "structure_err": s, "prob_err": p })
                })
                .collect();
            json_bytes(&json!({
                "experiment": "accuracy",
                "seed": cli.seed,
                "config": config,
                "rows": rows,
                "summary": summary,
            }))
        }
        _ => {
            let mut buf = Vec::new();
            write_accuracy_csv(&mut buf, &config, cli.seed, &rows)?;
            Ok(buf)
        }
    }
}

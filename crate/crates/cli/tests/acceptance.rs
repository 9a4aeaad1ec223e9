//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are reported but do not fail the
//! run; every other failure gives a non-zero exit.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{brute_force_qom, exact_pattern_freqs, qom_direct, sorted_components};
use qom_core::experiment::{
    run_experiment_accuracy, run_experiment_qom, summarize_qom, AccuracyExperimentConfig, Algo,
    QomExperimentConfig, Scheme,
};
use qom_core::inference::{
    bica, bica_from_stats, infer_p_known_g, qlica, BicaConfig, ObservationStats, QlicaConfig,
};
use qom_core::qom::{brute_force_opt, evaluate_qom, DEFAULT_ENUMERATION_CAP};
use qom_core::simgen::{generate_hex_instance, random_graph, sample_traces, HexConfig};
use qom_core::solvers::{
    repetition_rng, round_once, round_probrand, round_row, solve_greedy, solve_lp,
};
use qom_core::{BitMatrix, CoverageGraph, TraceKind, TraceMatrix};

const KNOWN_UNATTAINABLE: &[usize] = &[8, 9];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn toy() -> CoverageGraph {
    CoverageGraph::new(
        BitMatrix::parse_rows(&["10", "11"]).unwrap(),
        vec![1, 2],
        vec![0.2, 0.5],
        2,
    )
    .unwrap()
}

fn toy_trace() -> TraceMatrix {
    let x = BitMatrix::parse_rows(&["0010000010", "0110011110"]).unwrap();
    TraceMatrix::new(TraceKind::SnifferObservation, 1, x)
}

fn toy_optimum() -> Outcome {
    let g = toy();
    let (_, brute) = brute_force_opt(&g, DEFAULT_ENUMERATION_CAP).unwrap();
    let greedy = evaluate_qom(&g, &solve_greedy(&g)).unwrap().expected_qom;
    let lp = solve_lp(&g).unwrap();
    let rounded = evaluate_qom(&g, &round_probrand(&lp, &g, 50, 0))
        .unwrap()
        .expected_qom;
    let exact = |v: f64| (v - 0.7).abs() < 1e-12;
    outcome(
        exact(brute) && exact(greedy) && exact(rounded) && (lp.objective - 0.7).abs() < 1e-7,
        format!(
            "brute={brute} greedy={greedy} lp+round={rounded} lp={}",
            lp.objective
        ),
    )
}

fn bica_toy() -> Outcome {
    let m = bica::<f64>(&toy_trace(), &BicaConfig::default()).unwrap();
    let rows = m.adjacency_hat.row_strings();
    let got = sorted_components(&m.adjacency_hat, &m.probs_hat);
    let want = vec![(vec![false, true], 0.5), (vec![true, true], 0.2)];
    let pass = got.len() == 2
        && got
            .iter()
            .zip(&want)
            .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() < 1e-12);
    outcome(pass, format!("G_hat={rows:?} p_hat={:?}", m.probs_hat))
}

fn qlica_toy() -> Outcome {
    let m = qlica::<f64>(&toy_trace(), &QlicaConfig::default()).unwrap();
    let got = sorted_components(&m.adjacency_hat, &m.probs_hat);
    let want = vec![(vec![false, true], 0.5), (vec![true, true], 0.2)];
    let pass = got.len() == 2
        && got
            .iter()
            .zip(&want)
            .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() < 1e-6);
    outcome(
        pass,
        format!(
            "G_hat={:?} p_hat={:?}",
            m.adjacency_hat.row_strings(),
            m.probs_hat
        ),
    )
}

fn approximation_ratio() -> Outcome {
    let mut worst_ratio = f64::INFINITY;
    let mut failures = 0;
    for seed in 0..200u64 {
        let m = 1 + (seed % 6) as usize;
        let n = (1 + (seed * 7 % 15) as usize).min((1 << m) - 1);
        let k = 1 + (seed % 3) as usize;
        let g: CoverageGraph = random_graph(m, n, k, (0.0, 1.0), 10_000 + seed).unwrap();
        let opt = brute_force_qom(&g);
        let greedy = qom_direct(&g, &solve_greedy(&g).channel_per_sniffer);
        let lp = solve_lp(&g).unwrap().objective;
        if greedy < 0.5 * opt - 1e-12 || lp < opt - 1e-9 {
            failures += 1;
        }
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(greedy / opt);
        }
    }
    outcome(
        failures == 0,
        format!("200 instances, {failures} violations, worst greedy/opt={worst_ratio:.4}"),
    )
}

fn rounding_marginals() -> Outcome {
    let mut rng = repetition_rng(5, 0);
    let draws = 100_000;
    let ones = (0..draws)
        .filter(|_| round_row(&[0.5f64, 0.5], &mut rng) == 0)
        .count();
    let freq = ones as f64 / draws as f64;
    let bound = 1.0 - (-1.0f64).exp() - 0.02;
    let mut worst = f64::INFINITY;
    for inst in 0..20u64 {
        let g: CoverageGraph = random_graph(6, 15, 3, (0.0, 1.0), 20_000 + inst).unwrap();
        let lp = solve_lp(&g).unwrap();
        let mut rng = repetition_rng(inst, 1);
        let reps = 10_000;
        let total: f64 = (0..reps)
            .map(|_| qom_direct(&g, &round_once(&lp, &mut rng).channel_per_sniffer))
            .sum();
        worst = worst.min(total / reps as f64 / lp.objective);
    }
    outcome(
        (freq - 0.5).abs() <= 0.01 && worst >= bound,
        format!(
            "channel-1 frequency={freq:.4}, worst mean-rounded/LP={worst:.4} (bound {bound:.4})"
        ),
    )
}

fn inference_exactness() -> Outcome {
    let mut worst_known = 0.0f64;
    let mut worst_bica = 0.0f64;
    let mut structure_misses = 0;
    for seed in 0..100u64 {
        let m = 2 + (seed % 5) as usize;
        let n = (1 + (seed * 3 % 10) as usize).min((1 << m) - 1);
        let g: CoverageGraph = random_graph(m, n, 1, (0.05, 0.6), 30_000 + seed).unwrap();
        let stats =
            ObservationStats::from_frequencies(m, exact_pattern_freqs(g.adjacency(), g.weights()))
                .unwrap();
        let p = infer_p_known_g(g.adjacency(), &stats).unwrap();
        for (a, b) in p.iter().zip(g.weights()) {
            worst_known = worst_known.max((a - b).abs());
        }
        let model = bica_from_stats(&stats, &BicaConfig::default()).unwrap();
        let want = sorted_components(g.adjacency(), g.weights());
        let got = sorted_components(&model.adjacency_hat, &model.probs_hat);
        if got.len() != want.len() || got.iter().zip(&want).any(|(a, b)| a.0 != b.0) {
            structure_misses += 1;
            continue;
        }
        for (a, b) in got.iter().zip(&want) {
            worst_bica = worst_bica.max((a.1 - b.1).abs());
        }
    }
    outcome(
        worst_known < 1e-9 && worst_bica < 1e-9 && structure_misses == 0,
        format!(
            "100 instances: known-G max err={worst_known:.2e}, bICA max err={worst_bica:.2e}, structure misses={structure_misses}"
        ),
    )
}

fn sampled_inference() -> Outcome {
    let trials = 100u64;
    let mut good = 0;
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let n = 1 + (trial % 8) as usize;
        let g: CoverageGraph = random_graph(6, n, 1, (0.0, 0.3), 40_000 + trial).unwrap();
        let (_, xs) = sample_traces(&g, 100_000, trial).unwrap();
        let stats = ObservationStats::from_trace(&xs[0]).unwrap();
        let p = infer_p_known_g(g.adjacency(), &stats).unwrap();
        let err = p
            .iter()
            .zip(g.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err <= 0.02 {
            good += 1;
        }
    }
    outcome(
        good as f64 >= 0.95 * trials as f64,
        format!("{good}/{trials} trials within 0.02, worst max error={worst:.4}"),
    )
}

fn setup_statistics() -> Outcome {
    let cfg = HexConfig::paper(3);
    let mut sniffer_counts = Vec::new();
    let mut busy = 0.0;
    for seed in 0..20 {
        let inst = generate_hex_instance(&cfg, seed).unwrap();
        sniffer_counts.push(inst.scenario.sniffers.len());
        busy += inst.mean_cell_busy_probability();
    }
    busy /= 20.0;
    let all25 = sniffer_counts.iter().all(|&c| c == 25);
    outcome(
        all25 && (busy - 0.2685).abs() <= 0.05,
        format!("sniffers=25 on all seeds: {all25}; mean cell busy probability={busy:.4} (target 0.2685 +/- 0.05)"),
    )
}

fn orderings() -> Outcome {
    let cfg = QomExperimentConfig::reduced();
    let summary = summarize_qom(&run_experiment_qom(&cfg, 0).unwrap());
    let mean = |scheme: Scheme, algo: Algo, k: usize| {
        summary
            .iter()
            .find(|s| s.scheme == scheme && s.algo == algo && s.channels == k)
            .map(|s| s.mean)
            .unwrap()
    };
    let uc = Scheme::UserCentric;
    let algos = [Algo::Max, Algo::Greedy, Algo::LpRound, Algo::LpUp];
    let mut notes = Vec::new();
    let (max3, greedy3, round3, up3) = (
        mean(uc, Algo::Max, 3),
        mean(uc, Algo::Greedy, 3),
        mean(uc, Algo::LpRound, 3),
        mean(uc, Algo::LpUp, 3),
    );
    let order_ok = max3 <= greedy3
        && max3 <= round3
        && [max3, greedy3, round3].iter().all(|&v| v <= up3 + 1e-9);
    notes.push(format!(
        "K=3 max={max3:.4} greedy={greedy3:.4} lp-round={round3:.4} lp-up={up3:.4} order={}",
        if order_ok { "ok" } else { "violated" }
    ));
    let mut mono_ok = true;
    for algo in algos {
        let v: Vec<f64> = cfg.channels.iter().map(|&k| mean(uc, algo, k)).collect();
        let ok = v.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        mono_ok &= ok;
        notes.push(format!(
            "{} over K={:?}: {:?}{}",
            algo.as_str(),
            cfg.channels,
            v.iter()
                .map(|x| (x * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            if ok { "" } else { " not monotone" }
        ));
    }
    let acc = run_experiment_accuracy(&AccuracyExperimentConfig::default(), 0).unwrap();
    let avg = |scheme: Scheme, f: fn(&qom_core::experiment::AccuracyRow) -> f64| {
        let v: Vec<f64> = acc
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(f)
            .filter(|x| x.is_finite())
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (bs, qs) = (
        avg(Scheme::Bica, |r| r.structure_err),
        avg(Scheme::Qlica, |r| r.structure_err),
    );
    let (bp, qp) = (
        avg(Scheme::Bica, |r| r.prob_err),
        avg(Scheme::Qlica, |r| r.prob_err),
    );
    let acc_ok = bs <= qs && bp <= qp;
    notes.push(format!(
        "accuracy structure bica={bs:.4} qlica={qs:.4}, probability bica={bp:.5} qlica={qp:.5}"
    ));
    outcome(order_ok && mono_ok && acc_ok, notes.join("; "))
}

fn run_twice(bin: &str, dir: &Path, args: &[String]) -> Result<(), String> {
    let mut outputs = Vec::new();
    for attempt in 0..2 {
        let out_file = dir.join(format!("out{attempt}"));
        let mut full: Vec<String> = args.to_vec();
        full.extend(["-o".to_string(), out_file.to_str().unwrap().to_string()]);
        let o = Command::new(bin)
            .args(&full)
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(format!(
                "{args:?} failed: {}",
                String::from_utf8_lossy(&o.stderr)
            ));
        }
        let plain = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        outputs.push((
            std::fs::read(&out_file).map_err(|e| e.to_string())?,
            plain.stdout,
        ));
    }
    if outputs[0] != outputs[1] || outputs[0].0 != outputs[0].1 {
        return Err(format!("{args:?} differs between runs"));
    }
    Ok(())
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_qom");
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let setup = |args: &[&str]| {
        let o = Command::new(bin).args(args).output().unwrap();
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    };
    let (sc, tr, hex, inf, toy) = (
        p("sc.json"),
        p("tr.csv"),
        p("hex.json"),
        p("inf.json"),
        p("toy.json"),
    );
    std::fs::write(
        &toy,
        r#"{"num_channels":2,"adjacency":["10","11"],"channel_of":[1,2],"weights":[0.2,0.5]}"#,
    )
    .unwrap();
    setup(&[
        "--seed",
        "9",
        "-o",
        &sc,
        "gen",
        "--preset",
        "random",
        "--sniffers",
        "6",
        "--users",
        "8",
        "--channels",
        "2",
    ]);
    setup(&[
        "--seed", "9", "-o", &tr, "sample", "--graph", &sc, "--slots", "5000",
    ]);
    setup(&[
        "--seed",
        "9",
        "-o",
        &hex,
        "gen",
        "--preset",
        "hex-reduced",
        "--channels",
        "3",
    ]);
    setup(&[
        "--seed", "9", "-o", &inf, "infer", "--scheme", "qlica", "--traces", &tr,
    ]);
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen", "--preset", "hex-paper", "--channels", "3"],
        vec!["gen", "--preset", "hex-reduced", "--channels", "6"],
        vec![
            "gen",
            "--preset",
            "random",
            "--sniffers",
            "6",
            "--users",
            "8",
            "--channels",
            "2",
        ],
        vec!["sample", "--graph", &sc, "--slots", "2000"],
        vec![
            "--format",
            "json",
            "sample",
            "--graph",
            &hex,
            "--slots",
            "500",
            "--exclusive",
        ],
        vec!["solve", "--algo", "greedy", "--graph", &hex],
        vec![
            "solve", "--algo", "lp-round", "--graph", &hex, "--reps", "20",
        ],
        vec!["solve", "--algo", "max", "--graph", &sc, "--traces", &tr],
        vec!["solve", "--algo", "brute", "--graph", &toy],
        vec!["infer", "--scheme", "bica", "--traces", &tr],
        vec!["infer", "--scheme", "qlica", "--traces", &tr],
        vec![
            "infer", "--scheme", "known-g", "--traces", &tr, "--graph", &sc,
        ],
        vec!["score", "--truth", &sc, "--inferred", &inf],
        vec![
            "--format",
            "csv",
            "score",
            "--truth",
            &sc,
            "--inferred",
            &inf,
        ],
        vec![
            "eval",
            "--graph",
            &sc,
            "--assignment",
            "1,2,1,2,1,2",
            "--traces",
            &tr,
        ],
        vec![
            "experiment",
            "qom",
            "--runs",
            "2",
            "--slots",
            "1000",
            "--channels",
            "3,6",
        ],
        vec![
            "--format",
            "json",
            "experiment",
            "accuracy",
            "--users",
            "5,8",
            "--runs",
            "2",
            "--slots",
            "2000",
        ],
    ];
    let mut failures = Vec::new();
    for cmd in &commands {
        let mut args = vec!["--seed".to_string(), "17".to_string()];
        args.extend(cmd.iter().map(|s| s.to_string()));
        if let Err(e) = run_twice(bin, dir.path(), &args) {
            failures.push(e);
        }
    }
    let detail = if failures.is_empty() {
        format!("{} commands byte-identical across runs", commands.len())
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

type Criterion = (usize, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<Criterion> = vec![
        (1, "toy optimum", toy_optimum, secs(1)),
        (2, "bica toy", bica_toy, secs(1)),
        (3, "qlica toy", qlica_toy, secs(1)),
        (4, "approximation ratio", approximation_ratio, secs(30)),
        (5, "rounding marginals", rounding_marginals, secs(60)),
        (6, "inference exactness", inference_exactness, secs(60)),
        (7, "sampled-trace inference", sampled_inference, secs(300)),
        (8, "setup statistics", setup_statistics, secs(30)),
        (9, "qualitative orderings", orderings, secs(600)),
        (10, "cli determinism", determinism, None),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let mut out = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                out.pass = false;
                out.detail
                    .push_str(&format!("; exceeded {}s limit", limit.as_secs()));
            }
        }
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        let note = if !out.pass && KNOWN_UNATTAINABLE.contains(&id) {
            " [known unattainable]"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {name}: {verdict}{note} ({:.2}s) {}",
            elapsed.as_secs_f64(),
            out.detail
        );
        if !out.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

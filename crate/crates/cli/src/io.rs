use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use qom_core::model::build_coverage_graph;
use qom_core::simgen::{read_traces_csv, write_traces_csv};
use qom_core::{
    Assignment, BitMatrix, CoverageGraph, Error, Result, Scenario, TraceKind, TraceMatrix,
};
use serde_json::{json, Value};

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// A coverage graph file, or a scenario from which the graph is built.
pub fn load_graph(path: &Path) -> Result<CoverageGraph> {
    let value = read_json(path)?;
    if value.get("sniffers").is_some() {
        let scenario: Scenario = serde_json::from_value(value)?;
        scenario.validate()?;
        let built = build_coverage_graph(&scenario);
        if !built.dropped_users.is_empty() {
            log::warn!(
                "{} users outside every sniffer's range were dropped",
                built.dropped_users.len()
            );
        }
        Ok(built.graph)
    } else {
        Ok(serde_json::from_value(value)?)
    }
}

/// Trace file in CSV, or the JSON layout written with `--format json`.
pub fn load_traces(path: &Path) -> Result<Vec<TraceMatrix>> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('[') {
        let value: Value = serde_json::from_str(&text)?;
        let items = value.as_array().cloned().unwrap_or_default();
        items.iter().map(trace_from_json).collect()
    } else {
        read_traces_csv(BufReader::new(text.as_bytes()))
    }
}

fn trace_from_json(v: &Value) -> Result<TraceMatrix> {
    let bad = |what: &str| Error::TraceFormat(format!("JSON trace: {what}"));
    let kind = match v.get("kind").and_then(Value::as_str) {
        Some("user_activity") => TraceKind::UserActivity,
        Some("sniffer_observation") => TraceKind::SnifferObservation,
        _ => return Err(bad("missing or unknown kind")),
    };
    let channel = v
        .get("channel_id")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("missing channel_id"))? as usize;
    let rows: Vec<String> = serde_json::from_value(v.get("rows").cloned().unwrap_or(Value::Null))
        .map_err(|_| bad("rows must be bit strings"))?;
    let slots = v.get("slots").and_then(Value::as_u64).unwrap_or(0) as usize;
    let bits = if rows.is_empty() {
        BitMatrix::zeros(0, slots)
    } else {
        BitMatrix::parse_rows(&rows)?
    };
    Ok(TraceMatrix::new(kind, channel, bits))
}

pub fn traces_to_json(traces: &[TraceMatrix]) -> Value {
    Value::Array(
        traces
            .iter()
            .map(|t| {
                json!({
                    "kind": t.kind.as_str(),
                    "channel_id": t.channel_id,
                    "slots": t.slots(),
                    "rows": t.bits.row_strings(),
                })
            })
            .collect(),
    )
}

pub fn traces_to_csv(traces: &[TraceMatrix]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_traces_csv(&mut buf, traces)?;
    Ok(buf)
}

/// `1,2,3`, or a JSON file holding an assignment (possibly under an
/// `assignment` key, as written by `solve`).
pub fn parse_assignment(arg: &str) -> Result<Assignment> {
    let direct: std::result::Result<Vec<usize>, _> =
        arg.split(',').map(|s| s.trim().parse::<usize>()).collect();
    if let Ok(channels) = direct {
        return Ok(Assignment::new(channels));
    }
    let value = read_json(&PathBuf::from(arg))?;
    let inner = value.get("assignment").cloned().unwrap_or(value);
    if inner.is_array() {
        return Ok(Assignment::new(serde_json::from_value(inner)?));
    }
    Ok(serde_json::from_value(inner)?)
}

pub fn read_value(path: &Path) -> Result<Value> {
    read_json(path)
}

pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            // a closed reader (e.g. `| head`) is not an error
            match lock.write_all(bytes).and_then(|_| lock.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

pub fn json_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

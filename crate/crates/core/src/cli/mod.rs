//! Command-line front end.
//!
//! ```text
//! rtasim run --config scenario.json --out trace.json [--seed-check]
//! rtasim eval trace.json --out results/ [--config scenario.json]
//! rtasim snapshot trace.json --time 2.5
//! ```
//!
//! Exit status: 0 success, 1 usage, 2 invalid input, 3 runtime failure.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use indexmap::IndexMap;
use serde_json::{json, Map, Value};

use crate::eval::{evaluate, write_outputs, EvalMeta};
use crate::geometry::payload::to_payload;
use crate::scenario::io::{trace_from_str, trace_to_string};
use crate::scenario::{build_scenario, ExecutionTrace, Scenario, SimState};

pub use config::{
    config_from_file, parse_scenario_config, parse_scenario_file, parse_scenario_str, AgentEntry,
    ConfigError, GoalEntry, RtaEntry, RtaKind, ScenarioFile, TimeSection, UnsafeEntry,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rtasim", version, about = "Run and evaluate runtime-assurance scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a scenario and write its trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Execute a second time and fail unless both traces are identical.
        #[arg(long)]
        seed_check: bool,
    },
    /// Evaluate a trace file.
    Eval {
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Scenario file the trace came from; without it, layout is inferred.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the scenario state at a time.
    Snapshot {
        trace: PathBuf,
        #[arg(long)]
        time: f64,
    },
}

/// A failed command: message plus exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn validation(message: impl ToString) -> CliError {
    CliError {
        code: EXIT_VALIDATION,
        message: message.to_string(),
    }
}

fn runtime(message: impl ToString) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message: message.to_string(),
    }
}

/// `trace.json` -> `trace.timing.json`
pub fn timing_path(trace: &Path) -> PathBuf {
    let stem = trace.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    trace.with_file_name(format!("{stem}.timing.json"))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let config = parse_scenario_config(path).map_err(validation)?;
    build_scenario(config).map_err(validation)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn timings_of(scenario: &Scenario) -> IndexMap<String, Vec<f64>> {
    scenario
        .bindings()
        .filter_map(|(id, b)| b.collector().map(|c| (id.to_string(), c.durations().to_vec())))
        .collect()
}

pub fn cmd_run(config: &Path, out: &Path, seed_check: bool) -> Result<(), CliError> {
    let mut scenario = load_scenario(config)?;
    let start = Instant::now();
    let trace = scenario.execute().map_err(runtime)?;
    let exec = start.elapsed().as_secs_f64();
    let text = trace_to_string(&trace);
    write(out, &text)?;
    let timing = serde_json::to_string_pretty(&timings_of(&scenario)).expect("timings serialize");
    write(&timing_path(out), &format!("{timing}\n"))?;
    println!("samples: {}", trace.len());
    println!("exec time: {exec:.6} s");
    if seed_check {
        let again = scenario.execute().map_err(runtime)?;
        if trace_to_string(&again) != text {
            return Err(runtime("determinism check failed: re-run produced a different trace"));
        }
        println!("determinism check: identical");
    }
    Ok(())
}

fn read_trace(path: &Path) -> Result<ExecutionTrace, CliError> {
    let text = fs::read_to_string(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    trace_from_str(&text).map_err(|e| validation(format!("{}: schema error at {e}", path.display())))
}

fn read_timings(trace: &Path) -> Result<IndexMap<String, Vec<f64>>, CliError> {
    let path = timing_path(trace);
    if !path.exists() {
        return Ok(IndexMap::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

pub fn cmd_eval(trace_path: &Path, out: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let trace = read_trace(trace_path)?;
    let timings = read_timings(trace_path)?;
    let meta = match config {
        Some(c) => {
            let scenario = load_scenario(c)?;
            let meta = EvalMeta::from_world(&scenario.world);
            if let Some(id) = trace.agents.keys().find(|id| !meta.kinematics.contains_key(*id)) {
                return Err(validation(format!("agent {id:?} is in the trace but not in the scenario")));
            }
            meta
        }
        None => EvalMeta::infer(&trace),
    };
    let start = Instant::now();
    let report = evaluate(&trace, &timings, &meta).map_err(runtime)?;
    let elapsed = start.elapsed().as_secs_f64();
    write_outputs(&report, &trace, out).map_err(runtime)?;
    print!("{}", report.to_text());
    println!("eval time: {elapsed:.6} s");
    Ok(())
}

pub fn snapshot_to_value(s: &SimState, trace: &ExecutionTrace) -> Value {
    let agents: Map<String, Value> = s
        .agents
        .iter()
        .map(|(id, a)| {
            let mode = a.mode.map(|m| Value::from(m.as_str())).unwrap_or(Value::Null);
            (id.clone(), json!({"state": a.state, "mode": mode}))
        })
        .collect();
    let sets: Map<String, Value> = s
        .unsafe_sets
        .iter()
        .map(|(id, def)| {
            let kind = trace.unsafe_sets[id.as_str()].kind.as_str();
            (id.clone(), json!({"type": kind, "definition": to_payload(def)}))
        })
        .collect();
    json!({"t": s.t, "agents": agents, "unsafe": sets})
}

pub fn cmd_snapshot(trace_path: &Path, t: f64) -> Result<(), CliError> {
    let trace = read_trace(trace_path)?;
    let state = trace.snapshot(t).map_err(validation)?;
    let text = serde_json::to_string_pretty(&snapshot_to_value(&state, &trace)).expect("snapshot serializes");
    println!("{text}");
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run {
            config,
            out,
            seed_check,
        } => cmd_run(config, out, *seed_check),
        Command::Eval { trace, out, config } => cmd_eval(trace, out, config.as_deref()),
        Command::Snapshot { trace, time } => cmd_snapshot(trace, *time),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

//! `born` — derive, transform, and simulate channel-weight models.
//!
//! Subcommands:
//! - `derive`: solve a model for its channel weights (auto-selects the
//!   equal-norm, rational, or continuity route) and print the report JSON.
//! - `equiv`: apply a chain of transformations, printing one edge summary
//!   per step with the value-invariance check.
//! - `simulate`: sample outcomes under a weight rule into a CSV file.
//! - `pilotwave`: run the built-in two-channel hidden-variable model.
//! - `lpscan`: print the l^p weight vector for each requested exponent.
//! - `check`: print the realization witness report of an experiment
//!   against a model at every region.
//!
//! Exit codes: 0 success, 1 validation or input error, 2 solver failure
//! (no convergence or an oversized refinement).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use born_core::equivalence::{transform, Transformation};
use born_core::json::{
    parse_experiment_str, parse_model_str, parse_weights_str, RealizationSchema, ReportSchema,
};
use born_core::model::{born_value, ExperimentalModel, ModelError, WeightVector};
use born_core::rational::{format_rat, parse_rat, Rat};
use born_core::sim;
use born_core::solver::{
    lp_weights, solve_continuity, solve_equal_norm, solve_rational, SolverError,
};
use born_core::value::Value;
use born_core::CoreError;

#[derive(Parser)]
#[command(
    name = "born",
    about = "Exact derivation and simulation of channel weights from consistency constraints",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    /// Equal-norm if all |c_k|² agree, rational if all are positive
    /// rationals, continuity otherwise.
    Auto,
    Equal,
    Rational,
    Continuity,
}

#[derive(Subcommand)]
enum Command {
    /// Derive the channel weights of a model and print the report JSON.
    Derive {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Convergence tolerance of the continuity route (max norm on weights).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Apply a transformation chain and print one edge summary per step.
    Equiv {
        #[arg(long)]
        model: PathBuf,
        /// Repeatable. One of: coarsen | permute:1,0 | phase:1/4,0 |
        /// refine:1,2 | relabel:1/2=-1/2,-1/2=1/2
        #[arg(long = "transform", required = true)]
        transforms: Vec<String>,
    },
    /// Sample outcomes under a weight rule and write the CSV record.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// born | lp:<p> | file:<weights.json>
        #[arg(long, default_value = "born")]
        rule: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in two-channel hidden-variable model.
    Pilotwave {
        /// Probability that the hidden variable sits on the first channel's side.
        #[arg(long)]
        bias: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the l^p weight row for each exponent.
    Lpscan {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated exponents, each >= 1.
        #[arg(long = "p", value_delimiter = ',', required = true)]
        p_list: Vec<f64>,
    },
    /// Check whether an experiment realizes a model, region by region.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        experiment: PathBuf,
    },
}

enum CliError {
    /// Exit 1: unreadable input, schema violation, precondition failure.
    Input(String),
    /// Exit 2: solver gave up (no convergence, oversized refinement).
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Solver(m) => write!(f, "{m}"),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NoConvergence { .. } | SolverError::RefinementTooLarge { .. } => {
                CliError::Solver(format!("solver: {e}"))
            }
            other => CliError::Input(format!("solver: {other}")),
        }
    }
}

impl From<born_core::json::SchemaError> for CliError {
    fn from(e: born_core::json::SchemaError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(format!("model: {e}"))
    }
}

impl From<sim::SimError> for CliError {
    fn from(e: sim::SimError) -> Self {
        CliError::Input(format!("simulation: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &PathBuf) -> Result<ExperimentalModel, CliError> {
    Ok(parse_model_str(&read_to_string(path)?)?)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Derive { model, method, tol } => derive(&model, method, tol),
        Command::Equiv { model, transforms } => equiv(&model, &transforms),
        Command::Simulate {
            model,
            rule,
            trials,
            seed,
            out,
        } => simulate(&model, &rule, trials, seed, &out),
        Command::Pilotwave {
            bias,
            trials,
            seed,
            out,
        } => pilotwave(bias, trials, seed, &out),
        Command::Lpscan { model, p_list } => lpscan(&model, &p_list),
        Command::Check { model, experiment } => check(&model, &experiment),
    }
}

fn all_mag2_equal(g: &ExperimentalModel) -> bool {
    let mag2 = g.mag2s();
    !mag2[0].is_zero()
        && mag2[1..].iter().all(|m| match (&mag2[0], m) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => a.to_f64() == b.to_f64(),
        })
}

fn derive(path: &PathBuf, method: MethodArg, tol: f64) -> Result<(), CliError> {
    let g = load_model(path)?;
    let report = match method {
        MethodArg::Equal => solve_equal_norm(&g)?,
        MethodArg::Rational => solve_rational(&g)?,
        MethodArg::Continuity => solve_continuity(&g, tol)?,
        MethodArg::Auto => {
            if all_mag2_equal(&g) {
                solve_equal_norm(&g)?
            } else if g.is_exact() && g.mag2s().iter().all(|m| !m.is_zero()) {
                solve_rational(&g)?
            } else {
                solve_continuity(&g, tol)?
            }
        }
    };
    println!("{}", ReportSchema::from_report(&report, Some(tol)).to_string_pretty());
    Ok(())
}

fn parse_usize_list(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("invalid index {s:?} in transform spec")))
        })
        .collect()
}

fn parse_transformation(spec: &str) -> Result<Transformation, CliError> {
    let (kind, args) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    match (kind, args) {
        ("coarsen", None) => Ok(Transformation::Coarsen),
        ("permute", Some(a)) => Ok(Transformation::Permute(parse_usize_list(a)?)),
        ("phase", Some(a)) => {
            let turns = a
                .split(',')
                .map(|s| {
                    parse_rat(s.trim())
                        .map_err(|e| CliError::Input(format!("invalid phase in {spec:?}: {e}")))
                })
                .collect::<Result<Vec<Rat>, _>>()?;
            Ok(Transformation::Phase(turns))
        }
        ("refine", Some(a)) => {
            let z = a
                .split(',')
                .map(|s| {
                    s.trim().parse::<u64>().map_err(|_| {
                        CliError::Input(format!("invalid multiplicity {s:?} in {spec:?}"))
                    })
                })
                .collect::<Result<Vec<u64>, _>>()?;
            Ok(Transformation::Refine(z))
        }
        ("relabel", Some(a)) => {
            let mut map = BTreeMap::new();
            for pair in a.split(',') {
                let (from, to) = pair.split_once('=').ok_or_else(|| {
                    CliError::Input(format!("relabel entries are FROM=TO, got {pair:?}"))
                })?;
                let from = parse_rat(from.trim())
                    .map_err(|e| CliError::Input(format!("invalid eigenvalue in {spec:?}: {e}")))?;
                let to = parse_rat(to.trim())
                    .map_err(|e| CliError::Input(format!("invalid eigenvalue in {spec:?}: {e}")))?;
                map.insert(from, to);
            }
            Ok(Transformation::Relabel(map))
        }
        _ => Err(CliError::Input(format!(
            "unknown transform {spec:?}; expected coarsen, permute:…, phase:…, refine:…, or relabel:…"
        ))),
    }
}

fn value_string(v: &Value) -> serde_json::Value {
    match v {
        Value::Exact(r) => json!(format_rat(r)),
        Value::Float(x) => json!(x),
    }
}

fn equiv(path: &PathBuf, transforms: &[String]) -> Result<(), CliError> {
    let mut current = load_model(path)?;
    let mut steps = Vec::new();
    for spec in transforms {
        let t = parse_transformation(spec)?;
        let edge = transform(&current, &t)
            .map_err(|e| CliError::Input(format!("transform {spec:?}: {e}")))?;
        let source_value = born_value(&edge.source)?;
        let target_value = born_value(&edge.target)?;
        steps.push(json!({
            "via": spec,
            "source_dim": edge.source.dim(),
            "target_dim": edge.target.dim(),
            "value_source": value_string(&source_value),
            "value_target": value_string(&target_value),
            "value_invariant": source_value.approx_eq(&target_value, 1e-12),
        }));
        current = edge.target;
    }
    println!("{}", serde_json::to_string_pretty(&steps).expect("serializes"));
    Ok(())
}

fn weights_for_rule(g: &ExperimentalModel, rule: &str) -> Result<WeightVector, CliError> {
    if rule == "born" {
        return Ok(g.born_weights());
    }
    if let Some(p) = rule.strip_prefix("lp:") {
        let p: f64 = p
            .parse()
            .map_err(|_| CliError::Input(format!("invalid exponent in rule {rule:?}")))?;
        return Ok(lp_weights(g, p)?);
    }
    if let Some(path) = rule.strip_prefix("file:") {
        let w = parse_weights_str(&read_to_string(&PathBuf::from(path))?)?;
        if w.dim() != g.dim() {
            return Err(CliError::Input(format!(
                "weights file has {} entries for a {}-channel model",
                w.dim(),
                g.dim()
            )));
        }
        return Ok(w);
    }
    Err(CliError::Input(format!(
        "unknown rule {rule:?}; expected born, lp:<p>, or file:<path>"
    )))
}

fn write_record(
    record: &sim::TrialRecord,
    expected: &BTreeMap<Rat, f64>,
    out: &PathBuf,
) -> Result<sim::GoodnessOfFit, CliError> {
    let mut buf: Vec<u8> = Vec::new();
    let fit = sim::write_csv(record, expected, &mut buf)?;
    fs::write(out, buf)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    Ok(fit)
}

fn simulate(
    path: &PathBuf,
    rule: &str,
    trials: u64,
    seed: u64,
    out: &PathBuf,
) -> Result<(), CliError> {
    let g = load_model(path)?;
    let w = weights_for_rule(&g, rule)?;
    let record = sim::sample_tagged(&g, &w, trials, seed, rule)?;
    let expected = sim::expected_probs_f64(&g, &w)?;
    let fit = write_record(&record, &expected, out)?;
    let summary = json!({
        "command": "simulate",
        "model": path.display().to_string(),
        "rule": rule,
        "trials": trials,
        "seed": seed,
        "out": out.display().to_string(),
        "chi_square": fit.chi_square,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
    Ok(())
}

/// The built-in hidden-variable testbed: a balanced two-channel model with
/// eigenvalues ±1/2 and outcomes ±1.
fn pilot_model() -> ExperimentalModel {
    parse_model_str(
        r#"{
            "dim": 2,
            "amplitudes": [
                {"mag2": "1/2", "phase_turns": "0"},
                {"mag2": "1/2", "phase_turns": "0"}
            ],
            "eigenvalues": ["1/2", "-1/2"],
            "payoff": [
                {"lambda": "1/2", "outcome": "1"},
                {"lambda": "-1/2", "outcome": "-1"}
            ]
        }"#,
    )
    .expect("built-in model is valid")
}

fn pilotwave(bias: f64, trials: u64, seed: u64, out: &PathBuf) -> Result<(), CliError> {
    let g = pilot_model();
    let cfg = sim::PilotWaveConfig::new(g.clone(), bias)?;
    let record = sim::pilot_wave_run(&cfg, trials, seed)?;
    let expected = sim::expected_probs_f64(&g, &g.born_weights())?;
    let fit = write_record(&record, &expected, out)?;
    let summary = json!({
        "command": "pilotwave",
        "bias": bias,
        "trials": trials,
        "seed": seed,
        "out": out.display().to_string(),
        "chi_square": fit.chi_square,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
    Ok(())
}

fn lpscan(path: &PathBuf, p_list: &[f64]) -> Result<(), CliError> {
    let g = load_model(path)?;
    let mut header = String::from("p");
    for k in 0..g.dim() {
        header.push_str(&format!(",w{k}"));
    }
    println!("{header}");
    for &p in p_list {
        let w = lp_weights(&g, p)?;
        let mut row = format!("{p}");
        for v in w.iter() {
            row.push_str(&format!(",{v}"));
        }
        println!("{row}");
    }
    Ok(())
}

fn check(model_path: &PathBuf, experiment_path: &PathBuf) -> Result<(), CliError> {
    let g = load_model(model_path)?;
    let m = parse_experiment_str(&read_to_string(experiment_path)?)?;
    let mut reports = Vec::new();
    for region in 0..m.region_count() {
        let schema = match m.realizes(&g, region) {
            Ok(report) => RealizationSchema::from_report(&report),
            Err(ModelError::DimensionMismatch { expected, got })
            | Err(ModelError::Core(CoreError::DimensionMismatch { expected, got })) => {
                RealizationSchema {
                    region,
                    realized: false,
                    failing_clause: None,
                    detail: format!(
                        "model dimension {got} does not match region dimension {expected}"
                    ),
                }
            }
            Err(e) => return Err(e.into()),
        };
        reports.push(schema);
    }
    println!("{}", serde_json::to_string_pretty(&reports).expect("serializes"));
    Ok(())
}

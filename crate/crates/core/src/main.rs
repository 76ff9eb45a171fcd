use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use markov_morse::harness::{
    property_trials, stability_trials, ChainSource, RandomChainSpec, StabilityMode,
    DEFAULT_MAX_DELTA,
};
use markov_morse::persistence::{build_stage, render_svg};
use markov_morse::{
    bottleneck, build_complex, build_diagram, morse_order, parse_matrix, run_filtration, Format,
    PersistenceDiagram, PipelineError, TransitionMatrix,
};

/// Persistence of Morse decompositions of finite Markov chains.
#[derive(Parser)]
#[command(name = "markov-morse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the threshold grid of a matrix.
    Thresholds { matrix: PathBuf },
    /// Print the multivector field at one threshold.
    Mvf {
        matrix: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
    /// Print the Morse sets, their indices and their order at one threshold.
    Morse {
        matrix: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
    /// Print the persistence diagram of a matrix.
    Diagram {
        matrix: PathBuf,
        /// Also write an SVG plot to this file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Bottleneck distance between two matrices or two diagram files.
    Bottleneck { a: PathBuf, b: PathBuf },
    /// Randomized stability trials under compensated perturbations.
    Stability {
        #[arg(required_unless_present = "random", conflicts_with = "random")]
        matrix: Option<PathBuf>,
        /// Random chains, e.g. `n=5,density=0.5`.
        #[arg(long)]
        random: Option<RandomChainSpec>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Perturb this many distinct entries per trial.
        #[arg(long)]
        multi: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_MAX_DELTA)]
        max_delta: f64,
    },
    /// Structural property checks on random chains.
    Properties {
        #[arg(long)]
        random: RandomChainSpec,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Violation(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Violation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
    } else {
        fs::read_to_string(path)
    }
    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &Path) -> Result<TransitionMatrix, Failure> {
    let text = read(path)?;
    parse_matrix(&text, Format::sniff(&text))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// A diagram file (JSON with `points`) or a matrix whose diagram is computed.
fn load_diagram(path: &Path) -> Result<PersistenceDiagram, Failure> {
    let text = read(path)?;
    let input = |e: String| Failure::Input(format!("{}: {e}", path.display()));
    if Format::sniff(&text) == Format::Json {
        let value: Value = serde_json::from_str(&text).map_err(|e| input(e.to_string()))?;
        if value.get("points").is_some() {
            return PersistenceDiagram::from_json(&text).map_err(|e| input(e.to_string()));
        }
    }
    let matrix = parse_matrix(&text, Format::sniff(&text)).map_err(|e| input(e.to_string()))?;
    Ok(build_diagram(&run_filtration(&matrix)?)?)
}

fn number(x: f64) -> Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

fn emit(value: &impl serde::Serialize) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn check_gamma(gamma: f64) -> Result<(), Failure> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--gamma must be a finite value >= 0, got {gamma}"
        )))
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Thresholds { matrix } => {
            let p = load_matrix(&matrix)?;
            emit(&json!({ "grid": p.threshold_grid() }));
        }
        Command::Mvf { matrix, gamma } => {
            check_gamma(gamma)?;
            let p = load_matrix(&matrix)?;
            let stage = build_stage(&build_complex(&p), &p, gamma)?;
            emit(&json!({ "gamma": gamma, "multivectors": stage.field.partition() }));
        }
        Command::Morse { matrix, gamma } => {
            check_gamma(gamma)?;
            let p = load_matrix(&matrix)?;
            let stage = build_stage(&build_complex(&p), &p, gamma)?;
            let sets: Vec<_> = stage.morse.iter().map(|m| m.set.clone()).collect();
            let order = morse_order(&stage.graph, &sets);
            let morse: Vec<Value> = stage
                .morse
                .iter()
                .map(|m| {
                    json!({
                        "label": m.set.label,
                        "cells": m.set.cells,
                        "members": m.set.members,
                        "index": m.index,
                    })
                })
                .collect();
            emit(&json!({ "gamma": gamma, "morse_sets": morse, "order": order.pairs() }));
        }
        Command::Diagram { matrix, svg } => {
            let p = load_matrix(&matrix)?;
            let diagram = build_diagram(&run_filtration(&p)?)?;
            if let Some(path) = svg {
                fs::write(&path, render_svg(&diagram))
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            emit(&diagram);
        }
        Command::Bottleneck { a, b } => {
            let (da, db) = (load_diagram(&a)?, load_diagram(&b)?);
            let result = bottleneck(&da, &db);
            let label = |side: &str, k: Option<usize>| match k {
                Some(k) => json!(format!("{side}.p{}", k + 1)),
                None => json!("diagonal"),
            };
            let matching: Vec<Value> = result
                .matching
                .iter()
                .map(|m| json!([label("A", m.a), label("B", m.b), number(m.cost)]))
                .collect();
            emit(&json!({ "distance": number(result.distance), "matching": matching }));
        }
        Command::Stability {
            matrix,
            random,
            trials,
            multi,
            seed,
            max_delta,
        } => {
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            if !(max_delta > 0.0 && max_delta <= 1.0) {
                return Err(Failure::Usage("--max-delta must lie in (0, 1]".into()));
            }
            let mode = match multi {
                None | Some(1) => StabilityMode::Single,
                Some(0) => return Err(Failure::Usage("--multi must be at least 1".into())),
                Some(l) => StabilityMode::Multi(l),
            };
            let source = match (matrix, random) {
                (Some(path), None) => ChainSource::Fixed {
                    matrix: load_matrix(&path)?,
                    seed: seed.unwrap_or(0),
                },
                (None, Some(mut spec)) => {
                    if let Some(s) = seed {
                        spec.seed = s;
                    }
                    ChainSource::Random(spec)
                }
                _ => return Err(Failure::Usage("give a matrix or --random".into())),
            };
            let report = stability_trials(&source, trials, mode, max_delta)?;
            emit(&report);
            if report.violations > 0 {
                return Err(Failure::Violation(format!(
                    "{} of {} trials exceeded the stability bound",
                    report.violations,
                    report.completed()
                )));
            }
        }
        Command::Properties {
            mut random,
            trials,
            seed,
        } => {
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            if let Some(s) = seed {
                random.seed = s;
            }
            let report = property_trials(&random, trials);
            emit(&report);
            if !report.passed() {
                return Err(Failure::Violation(format!(
                    "{} of {} trials failed",
                    report.failures.len(),
                    report.trials
                )));
            }
        }
    }
    Ok(())
}

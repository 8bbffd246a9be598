//! `ittm` — run machines, take them past ω, and work with the resulting
//! state graphs, matrices, and analysis reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use ittm_core::analysis::{
    accuracy_closed_form, accuracy_monte_carlo, attention_cost, saturation, AccuracyModel,
    AnalysisError,
};
use ittm_core::dsl::{self, parse_machine, parse_ordinal, parse_tape, ParseError};
use ittm_core::encodings::{
    rules_to_dot, to_adjacency, to_dot, to_layer_tensor, EncodeError, MatrixMode,
};
use ittm_core::exec::{run, ExecError, Trace};
use ittm_core::graph::{
    collapse, evolution_graph, format_graph, merge, parse_graph, GraphError, GraphLayerSequence,
    StateGraph,
};
use ittm_core::machine::Machine;
use ittm_core::ordinal::OrdinalTime;
use ittm_core::transfinite::{
    decide_halting_at_omega, limit_configuration, run_transfinite, DivergenceWitness,
    HaltingVerdict, TransfiniteError,
};

/// Default step budget when neither `--budget` nor `ITTM_BUDGET` is set.
const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "ittm",
    version,
    about = "Turing machine workbench: execution, transfinite limits, state graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output style: `human` for reading, `machine` for golden files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MatrixModeArg {
    Counts,
    Probabilities,
}

impl From<MatrixModeArg> for MatrixMode {
    fn from(mode: MatrixModeArg) -> Self {
        match mode {
            MatrixModeArg::Counts => MatrixMode::Counts,
            MatrixModeArg::Probabilities => MatrixMode::Probabilities,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a machine on an input tape and print the trace.
    Run {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect a cycle and print the limit-supremum report at ω.
    Limit {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run through limit stages (ω, ω·2, …) and print the full trace.
    Transfinite {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        max_limits: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide halting by bounded run plus cycle witnesses.
    Halting {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
    },
    /// Build state graphs from runs, or merge existing graph files.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Walk a graph: greedy routing, exact replay, or layered traversal.
    #[command(group(ArgGroup::new("mode").required(true).args(["greedy", "replay", "layers"])))]
    Route {
        /// Follow the heaviest out-edge at each node.
        #[arg(long)]
        greedy: bool,
        /// Follow the stored visit orders, reproducing the original run.
        #[arg(long)]
        replay: bool,
        /// One greedy hop per graph file, carrying the reached key forward.
        #[arg(long)]
        layers: bool,
        /// Graph file(s); one for --greedy/--replay, one per layer for --layers.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Start node key; for --replay defaults to the recorded start.
        #[arg(long, required_unless_present = "replay")]
        start: Option<String>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Comma-separated ordinal times for --layers (default w, w+1, …).
        #[arg(long)]
        times: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export graphs as CSV matrices, layer tensors, or DOT text.
    #[command(subcommand)]
    Export(ExportCommand),
    /// The autoregressive accuracy law (1 − ε)^L.
    #[command(group(ArgGroup::new("mode").required(true).args(["closed", "mc"])))]
    Accuracy {
        /// Evaluate the closed form.
        #[arg(long)]
        closed: bool,
        /// Estimate by seeded Monte-Carlo simulation.
        #[arg(long)]
        mc: bool,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        length: u64,
        #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The attention cost model L·N².
    Cost {
        #[arg(long)]
        tokens: u64,
        #[arg(long)]
        layers: u64,
    },
    /// Structural saturation metrics of a graph file.
    Saturation {
        file: PathBuf,
        #[arg(long)]
        include_self_loops: bool,
    },
}

#[derive(Debug, Subcommand)]
enum GraphCommand {
    /// Collapse a run into one node per distinct configuration.
    Collapse {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One node per step of a run, in time order.
    Evolution {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge collapsed graphs into a probabilistic graph.
    Merge {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ExportCommand {
    /// Adjacency matrix of a graph file as CSV.
    Matrix {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MatrixModeArg::Counts)]
        mode: MatrixModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Order-3 tensor over graph files taken as layers.
    Tensor {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = MatrixModeArg::Counts)]
        mode: MatrixModeArg,
        /// Comma-separated ordinal times (default w, w+1, …).
        #[arg(long)]
        times: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DOT text of a graph file, or of a machine's rule graph with --rules.
    Dot {
        file: PathBuf,
        /// Treat the file as a machine description and draw its rule graph.
        #[arg(long)]
        rules: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Parse(Vec<ParseError>),
    TapeParse(ParseError),
    Ordinal(ParseError),
    TimesMismatch {
        expected: usize,
        got: usize,
    },
    Exec(ExecError),
    Transfinite(TransfiniteError),
    Graph(GraphError),
    Encode(EncodeError),
    Analysis(AnalysisError),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// The stable error name printed before the details.
    fn name(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::TapeParse(_) => "UnknownSymbol",
            CliError::Ordinal(_) => "BadOrdinal",
            CliError::TimesMismatch { .. } => "TimesMismatch",
            CliError::Exec(ExecError::MissingRule { .. }) => "MissingRule",
            CliError::Exec(ExecError::HaltedMachineStepped { .. }) => "HaltedMachineStepped",
            CliError::Transfinite(TransfiniteError::NoCycleFound { .. }) => "NoCycleFound",
            CliError::Transfinite(TransfiniteError::UnboundedTape { .. }) => "UnboundedTape",
            CliError::Transfinite(TransfiniteError::LimitUndetectedWithinBudget { .. }) => {
                "LimitUndetectedWithinBudget"
            }
            CliError::Transfinite(TransfiniteError::Exec(ExecError::MissingRule { .. })) => {
                "MissingRule"
            }
            CliError::Transfinite(TransfiniteError::Exec(_)) => "HaltedMachineStepped",
            CliError::Graph(GraphError::MixedProvenance { .. }) => "MixedProvenance",
            CliError::Graph(GraphError::WrongKind { .. }) => "WrongKind",
            CliError::Graph(GraphError::EmptyMerge) => "EmptyMerge",
            CliError::Graph(GraphError::AmbiguousReplay) => "AmbiguousReplay",
            CliError::Graph(GraphError::UnknownNode { .. }) => "UnknownNode",
            CliError::Graph(GraphError::NotABijection { .. }) => "NotABijection",
            CliError::Graph(GraphError::NonIncreasingTimes { .. }) => "NonIncreasingTimes",
            CliError::Graph(GraphError::Format { .. }) => "GraphFormatError",
            CliError::Encode(EncodeError::NotSquare { .. }) => "NotSquare",
            CliError::Encode(EncodeError::NegativeEntry { .. }) => "NegativeEntry",
            CliError::Encode(EncodeError::NonIntegralCount { .. }) => "NonIntegralCount",
            CliError::Encode(EncodeError::NormalizationError { .. }) => "NormalizationError",
            CliError::Encode(EncodeError::DuplicateKey { .. }) => "DuplicateKey",
            CliError::Encode(EncodeError::Format { .. }) => "MatrixFormatError",
            CliError::Analysis(AnalysisError::DomainError { .. }) => "DomainError",
            CliError::Io { .. } => "IoError",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(errors) => {
                let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
                write!(f, "{}", lines.join("\n"))
            }
            CliError::TapeParse(e) | CliError::Ordinal(e) => write!(f, "{e}"),
            CliError::TimesMismatch { expected, got } => {
                write!(f, "expected {expected} layer times, got {got}")
            }
            CliError::Exec(e) => write!(f, "{e}"),
            CliError::Transfinite(e) => write!(f, "{e}"),
            CliError::Graph(e) => write!(f, "{e}"),
            CliError::Encode(e) => write!(f, "{e}"),
            CliError::Analysis(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<ExecError> for CliError {
    fn from(e: ExecError) -> Self {
        CliError::Exec(e)
    }
}

impl From<TransfiniteError> for CliError {
    fn from(e: TransfiniteError) -> Self {
        CliError::Transfinite(e)
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Graph(e)
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        CliError::Encode(e)
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Analysis(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {}", e.name(), e);
            ExitCode::from(1)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_machine(path: &Path) -> Result<Machine, CliError> {
    parse_machine(&read_file(path)?).map_err(CliError::Parse)
}

fn load_graph(path: &Path) -> Result<StateGraph, CliError> {
    Ok(parse_graph(&read_file(path)?)?)
}

fn budget_or_default(flag: Option<u64>) -> usize {
    flag.map(|b| b as usize)
        .or_else(|| {
            std::env::var("ITTM_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_BUDGET)
        .max(1)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_machine_file(
    machine_path: &Path,
    input: &str,
    budget: Option<u64>,
) -> Result<(Machine, Trace), CliError> {
    let machine = load_machine(machine_path)?;
    let tape = parse_tape(input, &machine).map_err(CliError::TapeParse)?;
    let trace = run(&machine, &tape, budget_or_default(budget))?;
    Ok((machine, trace))
}

/// Times for layered structures: parse the comma-separated flag, or default
/// to w, w+1, … matching the number of layers.
fn layer_times(times: Option<&str>, layer_count: usize) -> Result<Vec<OrdinalTime>, CliError> {
    match times {
        Some(csv) => {
            let parsed: Vec<OrdinalTime> = csv
                .split(',')
                .map(|t| parse_ordinal(t.trim()).map_err(CliError::Ordinal))
                .collect::<Result<_, _>>()?;
            if parsed.len() != layer_count {
                return Err(CliError::TimesMismatch {
                    expected: layer_count,
                    got: parsed.len(),
                });
            }
            Ok(parsed)
        }
        None => Ok((0..layer_count as u64)
            .map(|i| OrdinalTime {
                limits: 1,
                offset: i,
            })
            .collect()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::Run {
            machine,
            input,
            budget,
            out,
        } => {
            let (machine, trace) = run_machine_file(&machine, &input, budget)?;
            emit(out.as_deref(), &dsl::format_trace(&trace, &machine))
        }
        Command::Limit {
            machine,
            input,
            budget,
            out,
        } => {
            let (machine, trace) = run_machine_file(&machine, &input, budget)?;
            let report = limit_configuration(&trace, &machine)?;
            let mut text = String::new();
            let limit_step = ittm_core::exec::TraceStep {
                time: OrdinalTime::limit(1),
                config: report.limit_config.clone(),
                applied: ittm_core::exec::Applied::Limit,
            };
            text.push_str(&dsl::format_trace_step(&limit_step, &machine));
            text.push('\n');
            text.push_str(&format!(
                "cycle start={} period={}\n",
                report.cycle_start, report.period
            ));
            for (pos, cell) in &report.per_cell {
                text.push_str(&format!(
                    "cell {} seen={} limsup={}\n",
                    pos,
                    cell.seen.join(","),
                    cell.limsup
                ));
            }
            emit(out.as_deref(), &text)
        }
        Command::Transfinite {
            machine,
            input,
            budget,
            max_limits,
            out,
        } => {
            let machine = load_machine(&machine)?;
            let tape = parse_tape(&input, &machine).map_err(CliError::TapeParse)?;
            let trace = run_transfinite(&machine, &tape, budget_or_default(budget), max_limits)?;
            emit(out.as_deref(), &dsl::format_trace(&trace, &machine))
        }
        Command::Halting {
            machine,
            input,
            budget,
        } => {
            let machine = load_machine(&machine)?;
            let tape = parse_tape(&input, &machine).map_err(CliError::TapeParse)?;
            let verdict = decide_halting_at_omega(&machine, &tape, budget_or_default(budget))?;
            let line = match verdict {
                HaltingVerdict::Halts { steps } => format!("Halts({steps})"),
                HaltingVerdict::Diverges {
                    witness: DivergenceWitness::ExactCycle { start, period, .. },
                } => format!("Diverges(exact-cycle start={start} period={period})"),
                HaltingVerdict::Diverges {
                    witness: DivergenceWitness::TranslationCycle { period, drift, .. },
                } => format!("Diverges(translation-cycle period={period} drift={drift:+})"),
                HaltingVerdict::Unknown { budget } => format!("Unknown(budget={budget})"),
            };
            println!("{line}");
            Ok(())
        }
        Command::Graph(graph_command) => match graph_command {
            GraphCommand::Collapse {
                machine,
                input,
                budget,
                out,
            } => {
                let (_, trace) = run_machine_file(&machine, &input, budget)?;
                emit(out.as_deref(), &format_graph(&collapse(&trace)))
            }
            GraphCommand::Evolution {
                machine,
                input,
                budget,
                out,
            } => {
                let (_, trace) = run_machine_file(&machine, &input, budget)?;
                emit(out.as_deref(), &format_graph(&evolution_graph(&trace)))
            }
            GraphCommand::Merge { files, out } => {
                let graphs = files
                    .iter()
                    .map(|path| load_graph(path))
                    .collect::<Result<Vec<_>, _>>()?;
                let merged = merge(&graphs)?;
                emit(out.as_deref(), &format_graph(&merged))
            }
        },
        Command::Route {
            greedy,
            replay,
            layers,
            files,
            start,
            max_steps,
            times,
            out,
        } => {
            let mut text = String::new();
            if greedy {
                let graph = load_graph(&files[0])?;
                let start = start.expect("clap requires --start for --greedy");
                for key in graph.route_greedy(&start, max_steps)? {
                    text.push_str(&key);
                    text.push('\n');
                }
            } else if replay {
                let graph = load_graph(&files[0])?;
                let start = match start {
                    Some(start) => start,
                    None => recorded_start(&graph)?,
                };
                for key in graph.replay(&start)? {
                    text.push_str(&key);
                    text.push('\n');
                }
            } else {
                debug_assert!(layers);
                let graphs = files
                    .iter()
                    .map(|path| load_graph(path))
                    .collect::<Result<Vec<_>, _>>()?;
                let times = layer_times(times.as_deref(), graphs.len())?;
                let sequence = GraphLayerSequence::new(times.into_iter().zip(graphs).collect())?;
                let start = start.expect("clap requires --start for --layers");
                let traversal = sequence.traverse(&start)?;
                for hop in &traversal.hops {
                    text.push_str(&format!("t={} {} -> {}\n", hop.time, hop.from, hop.to));
                }
                if traversal.truncated {
                    text.push_str("truncated\n");
                }
            }
            emit(out.as_deref(), &text)
        }
        Command::Export(export_command) => match export_command {
            ExportCommand::Matrix { file, mode, out } => {
                let graph = load_graph(&file)?;
                let matrix = to_adjacency(&graph, mode.into());
                emit(out.as_deref(), &matrix.to_csv())
            }
            ExportCommand::Tensor {
                files,
                mode,
                times,
                out,
            } => {
                let graphs = files
                    .iter()
                    .map(|path| load_graph(path))
                    .collect::<Result<Vec<_>, _>>()?;
                let times = layer_times(times.as_deref(), graphs.len())?;
                let sequence = GraphLayerSequence::new(times.into_iter().zip(graphs).collect())?;
                let tensor = to_layer_tensor(&sequence, mode.into());
                emit(out.as_deref(), &tensor.to_text())
            }
            ExportCommand::Dot { file, rules, out } => {
                let text = if rules {
                    rules_to_dot(&load_machine(&file)?)
                } else {
                    to_dot(&load_graph(&file)?)
                };
                emit(out.as_deref(), &text)
            }
        },
        Command::Accuracy {
            closed,
            mc,
            epsilon,
            length,
            trials,
            seed,
        } => {
            let model = AccuracyModel::new(epsilon, length)?;
            if closed {
                println!("{}", accuracy_closed_form(&model));
            } else {
                debug_assert!(mc);
                let result = accuracy_monte_carlo(&model, trials, seed);
                match format {
                    Format::Machine => println!(
                        "rate={} std_error={} trials={} successes={} seed={}",
                        result.rate, result.std_error, result.trials, result.successes, seed
                    ),
                    Format::Human => println!(
                        "rate = {} ± {} ({} trials, seed {})",
                        result.rate, result.std_error, result.trials, seed
                    ),
                }
            }
            Ok(())
        }
        Command::Cost { tokens, layers } => {
            println!("{}", attention_cost(tokens, layers));
            Ok(())
        }
        Command::Saturation {
            file,
            include_self_loops,
        } => {
            let graph = load_graph(&file)?;
            let report = saturation(&graph, include_self_loops);
            println!("nodes={}", report.node_count);
            println!("edges={}", report.edge_count);
            println!("density={}", report.density);
            println!("mean_out_degree={}", report.mean_out_degree);
            println!("entropy_bits={}", report.entropy_bits);
            Ok(())
        }
    }
}

/// The start key a replayable graph recorded: the source of the edge with
/// visit order 0.
fn recorded_start(graph: &StateGraph) -> Result<String, CliError> {
    graph
        .edges()
        .iter()
        .find(|e| e.visit_orders.contains(&0))
        .map(|e| e.from.clone())
        .or_else(|| graph.keys().next().map(|k| k.to_string()))
        .ok_or(CliError::Graph(GraphError::AmbiguousReplay))
}

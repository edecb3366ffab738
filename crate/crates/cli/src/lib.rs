//! Command-line front end: reads a series (or a matrix for extended wavelets),
//! runs one solver and writes a JSON document.
//!
//! Exit codes: 0 success, 2 unreadable or unparsable input, 3 invalid
//! parameters or data, 4 refused by a resource guard.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use wavesyn::{
    build_grid, coefficients_from_data, compute_benefits, extract_restricted, forward, solve_extended_with,
    vopt_linear_space_with_stats, CandidateRule, ExtendedOptions, GridConfig, Metric, RestrictedSolver, Signal,
    Stats, SynopsisError, UnrestrictedSolver,
};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("cannot write output: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Output(_) => 1,
        }
    }
}

impl From<SynopsisError> for CliError {
    fn from(e: SynopsisError) -> Self {
        match e {
            SynopsisError::GridTooLarge { .. } | SynopsisError::InstanceTooLarge { .. } => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wavesyn", version, about = "Wavelet synopses, V-Opt histograms and extended wavelets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Haar transform of a series.
    Transform(IoArgs),
    /// Best B-term wavelet synopsis.
    Synopsis(SynopsisArgs),
    /// Optimal B-bucket V-Opt histogram.
    Histogram(HistogramArgs),
    /// Extended-wavelet allocation for an n x M matrix.
    Extended(ExtendedArgs),
    /// Error of a stored synopsis against a series.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Input file; standard input when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Restricted,
    Unrestricted,
}

#[derive(Debug, Args)]
pub struct SynopsisArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum, default_value = "restricted")]
    pub mode: Mode,
    /// Per-point weights, same format as the input.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// l1, l2, ..., lk or linf.
    #[arg(long, default_value = "l2")]
    pub metric: String,
    #[arg(long, allow_negative_numbers = true)]
    pub budget: i64,
    /// Additive error factor (unrestricted mode only). Default 0.1.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest accepted value grid (unrestricted mode only).
    #[arg(long)]
    pub grid_cap: Option<usize>,
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Maximum number of buckets.
    #[arg(long, allow_negative_numbers = true)]
    pub budget: i64,
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct ExtendedArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub budget: i64,
    /// Storage units per kept coefficient on top of one unit per value.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub header_cost: i64,
    /// The matrix already holds Haar coefficients, one row per index.
    #[arg(long)]
    pub coefficients: bool,
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Synopsis document written by `synopsis`.
    #[arg(long)]
    pub synopsis: PathBuf,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Defaults to the metric recorded in the synopsis document.
    #[arg(long)]
    pub metric: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Pick {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SynopsisParams {
    pub command: String,
    pub mode: String,
    pub n: usize,
    pub metric: String,
    pub budget: usize,
    pub weighted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid_size: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DpStats {
    pub node_visits: u64,
    pub peak_live_entries: usize,
    pub minplus_ops: u64,
}

impl From<&Stats> for DpStats {
    fn from(s: &Stats) -> Self {
        Self {
            node_visits: s.node_visits,
            peak_live_entries: s.peak_live_entries,
            minplus_ops: s.minplus_ops,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SynopsisDocument {
    pub params: SynopsisParams,
    pub picks: Vec<Pick>,
    pub error: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stats: Option<DpStats>,
}

#[derive(Debug, Serialize)]
struct TransformDocument {
    params: TransformParams,
    coefficients: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct TransformParams {
    command: &'static str,
    n: usize,
}

#[derive(Debug, Serialize)]
struct Bucket {
    start: usize,
    end: usize,
    value: f64,
}

#[derive(Debug, Serialize)]
struct HistogramDocument {
    params: HistogramParams,
    buckets: Vec<Bucket>,
    /// Sum of squared errors.
    error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<HistogramStats>,
}

#[derive(Debug, Serialize)]
struct HistogramParams {
    command: &'static str,
    n: usize,
    budget: usize,
}

#[derive(Debug, Serialize)]
struct HistogramStats {
    cell_evaluations: u64,
    top_level_evaluations: u64,
    peak_cells: usize,
    passes: u64,
}

#[derive(Debug, Serialize)]
struct ExtendedDocument {
    params: ExtendedParams,
    allocation: Allocation,
    /// Squared error left over all dimensions.
    error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<ExtendedStatsDoc>,
}

#[derive(Debug, Serialize)]
struct ExtendedParams {
    command: &'static str,
    n: usize,
    dimensions: usize,
    budget: usize,
    header_cost: usize,
}

#[derive(Debug, Serialize)]
struct Allocation {
    entries: Vec<AllocationRecord>,
    profit: f64,
    cost: usize,
}

#[derive(Debug, Serialize)]
struct AllocationRecord {
    index: usize,
    dimensions: Vec<usize>,
    values: Vec<f64>,
    profit: f64,
    cost: usize,
}

#[derive(Debug, Serialize)]
struct ExtendedStatsDoc {
    candidates: usize,
    cell_updates: u64,
    passes: u64,
    peak_live_entries: usize,
}

#[derive(Debug, Serialize)]
struct EvaluateDocument {
    params: EvaluateParams,
    picks: usize,
    error: f64,
}

#[derive(Debug, Serialize)]
struct EvaluateParams {
    command: &'static str,
    n: usize,
    metric: String,
    weighted: bool,
}

fn read_text(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Parse(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, CliError> {
    token
        .parse::<f64>()
        .map_err(|_| CliError::Parse(format!("line {line}: '{token}' is not a number")))
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Values separated by commas, whitespace or newlines. Lines starting with
/// `#` are ignored.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (line, content) in data_lines(text) {
        for t in tokens(content) {
            out.push(parse_number(t, line)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse("input holds no values".into()));
    }
    Ok(out)
}

/// One row per line, columns separated by commas or whitespace.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (line, content) in data_lines(text) {
        let row = tokens(content).map(|t| parse_number(t, line)).collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(CliError::Parse(format!(
                    "line {line}: {} columns, expected {first}",
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse("input holds no rows".into()));
    }
    Ok(rows)
}

fn parse_metric(s: &str) -> Result<Metric, CliError> {
    s.parse::<Metric>().map_err(CliError::Validation)
}

fn budget(b: i64) -> Result<usize, CliError> {
    usize::try_from(b).map_err(|_| CliError::Validation(format!("budget must be >= 0, got {b}")))
}

fn load_signal(io: &IoArgs, weights: Option<&Path>) -> Result<Signal<f64>, CliError> {
    let values = parse_values(&read_text(io.input.as_deref())?)?;
    Ok(match weights {
        Some(p) => Signal::with_weights(values, parse_values(&read_text(Some(p))?)?)?,
        None => Signal::new(values)?,
    })
}

fn to_json<S: Serialize>(doc: &S) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Runs one command and returns the document it produced.
pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Transform(args) => transform(args),
        Command::Synopsis(args) => synopsis(args),
        Command::Histogram(args) => histogram(args),
        Command::Extended(args) => extended(args),
        Command::Evaluate(args) => evaluate(args),
    }
}

/// Runs a command and writes its document to `--output` or standard output.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let doc = execute(&cli.command)?;
    let output = match &cli.command {
        Command::Transform(a) => &a.output,
        Command::Synopsis(a) => &a.io.output,
        Command::Histogram(a) => &a.io.output,
        Command::Extended(a) => &a.io.output,
        Command::Evaluate(a) => &a.io.output,
    };
    match output {
        Some(path) => fs::write(path, doc)?,
        None => io::stdout().lock().write_all(doc.as_bytes())?,
    }
    Ok(())
}

fn transform(args: &IoArgs) -> Result<String, CliError> {
    let values = parse_values(&read_text(args.input.as_deref())?)?;
    let coefficients = forward(&values)?.into_vec();
    Ok(to_json(&TransformDocument {
        params: TransformParams {
            command: "transform",
            n: values.len(),
        },
        coefficients,
    }))
}

fn synopsis(args: &SynopsisArgs) -> Result<String, CliError> {
    let metric = parse_metric(&args.metric)?;
    let b = budget(args.budget)?;
    if args.mode == Mode::Restricted && (args.epsilon.is_some() || args.grid_cap.is_some()) {
        return Err(CliError::Validation(
            "--epsilon and --grid-cap apply to unrestricted mode only".into(),
        ));
    }
    let signal = load_signal(&args.io, args.weights.as_deref())?;
    let mut params = SynopsisParams {
        command: "synopsis".into(),
        mode: String::new(),
        n: signal.len(),
        metric: metric.to_string(),
        budget: b,
        weighted: signal.is_weighted(),
        epsilon: None,
        grid_delta: None,
        grid_size: None,
    };
    let (solution, stats) = match args.mode {
        Mode::Restricted => {
            params.mode = "restricted".into();
            if args.stats {
                let mut solver = RestrictedSolver::new(&signal, metric, b);
                let s = solver.extract();
                (s, Some(DpStats::from(solver.stats())))
            } else {
                (extract_restricted(&signal, metric, b), None)
            }
        }
        Mode::Unrestricted => {
            params.mode = "unrestricted".into();
            let epsilon = args.epsilon.unwrap_or(0.1);
            let mut config = GridConfig::default();
            if let Some(cap) = args.grid_cap {
                config.cap = cap;
            }
            let grid = build_grid(&signal, metric, epsilon, config)?;
            params.epsilon = Some(epsilon);
            params.grid_delta = Some(grid.delta);
            params.grid_size = Some(grid.count());
            let mut solver = UnrestrictedSolver::new(&signal, metric, b, grid);
            let s = solver.extract();
            let stats = args.stats.then(|| DpStats::from(solver.stats()));
            (s, stats)
        }
    };
    Ok(to_json(&SynopsisDocument {
        params,
        picks: solution
            .picks
            .iter()
            .map(|&(index, value)| Pick { index, value })
            .collect(),
        error: solution.error,
        stats,
    }))
}

fn histogram(args: &HistogramArgs) -> Result<String, CliError> {
    let b = budget(args.budget)?;
    let values = parse_values(&read_text(args.io.input.as_deref())?)?;
    let (h, stats) = vopt_linear_space_with_stats(&values, b)?;
    let buckets = h
        .boundaries
        .windows(2)
        .zip(&h.reps)
        .map(|(w, &value)| Bucket {
            start: w[0],
            end: w[1],
            value,
        })
        .collect();
    Ok(to_json(&HistogramDocument {
        params: HistogramParams {
            command: "histogram",
            n: values.len(),
            budget: b,
        },
        buckets,
        error: h.sse,
        stats: args.stats.then_some(HistogramStats {
            cell_evaluations: stats.cell_evaluations,
            top_level_evaluations: stats.top_level_evaluations,
            peak_cells: stats.peak_cells,
            passes: stats.passes,
        }),
    }))
}

fn extended(args: &ExtendedArgs) -> Result<String, CliError> {
    let b = budget(args.budget)?;
    let header = usize::try_from(args.header_cost)
        .map_err(|_| CliError::Validation(format!("header cost must be >= 0, got {}", args.header_cost)))?;
    let rows = parse_matrix(&read_text(args.io.input.as_deref())?)?;
    let coeffs = if args.coefficients {
        rows
    } else {
        coefficients_from_data(&rows)?
    };
    let items = compute_benefits(&coeffs)?;
    let total = items
        .iter()
        .fold(0.0, |acc, it| acc + it.profit(it.dimensions()));
    let options = ExtendedOptions {
        rule: CandidateRule::default(),
    };
    let (alloc, stats) = solve_extended_with(&items, b, header, options);
    Ok(to_json(&ExtendedDocument {
        params: ExtendedParams {
            command: "extended",
            n: coeffs.len(),
            dimensions: coeffs[0].len(),
            budget: b,
            header_cost: header,
        },
        allocation: Allocation {
            entries: alloc
                .entries
                .iter()
                .map(|e| AllocationRecord {
                    index: e.index,
                    dimensions: e.dims.clone(),
                    values: e.values.clone(),
                    profit: e.profit,
                    cost: e.cost,
                })
                .collect(),
            profit: alloc.profit,
            cost: alloc.cost,
        },
        error: (total - alloc.profit).max(0.0),
        stats: args.stats.then_some(ExtendedStatsDoc {
            candidates: stats.candidates,
            cell_updates: stats.cell_updates,
            passes: stats.passes,
            peak_live_entries: stats.peak_live_entries,
        }),
    }))
}

fn evaluate(args: &EvaluateArgs) -> Result<String, CliError> {
    let text = read_text(Some(&args.synopsis))?;
    let doc: SynopsisDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: not a synopsis document: {e}", args.synopsis.display())))?;
    let metric = parse_metric(args.metric.as_deref().unwrap_or(&doc.params.metric))?;
    let signal = load_signal(&args.io, args.weights.as_deref())?;
    let picks: Vec<(usize, f64)> = doc.picks.iter().map(|p| (p.index, p.value)).collect();
    let error = metric.evaluate_synopsis(&signal, &picks)?;
    Ok(to_json(&EvaluateDocument {
        params: EvaluateParams {
            command: "evaluate",
            n: signal.len(),
            metric: metric.to_string(),
            weighted: signal.is_weighted(),
        },
        picks: picks.len(),
        error,
    }))
}

//! The `exposome` command line.
//!
//! Reports go to stdout as JSON, human summaries to stderr. Exit status is
//! 0 on success (rejected records included) and 2 on any fatal error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::export::{Format, GraphDocument};
use crate::graph::{
    BuildAlgorithm, DimSet, ExposomeGraph, GraphBuilder, GraphConfig, GraphError,
    DEFAULT_HUB_THRESHOLD,
};
use crate::ingest::{
    fold_identities, parse_csv, parse_jsonl, write_csv, write_jsonl, IngestError, ParseOutcome,
};
use crate::model::{Hierarchy, HierarchyError, PathologyLevel};
use crate::stats::StatsReport;
use crate::surveillance::{
    replay, SurveillanceConfig, SurveillanceError, DEFAULT_GROWTH_THRESHOLD,
};
use crate::synth::{generate, SynthConfig, SynthError};
use crate::tripartite::project_tripartite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "exposome",
    version,
    about = "Occupational exposome networks from OHP reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the exposome network, write it, and print its statistics.
    Build(Common),
    /// Print network statistics without writing the graph.
    Stats(Common),
    /// Project records onto the pathology / agent / occupation graph.
    Tripartite {
        #[command(flatten)]
        common: Common,
        /// Keep only pathologies whose code starts with this prefix.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Replay a stream and report emergence events as JSON Lines.
    Surveil {
        #[command(flatten)]
        common: Common,
        /// Last day of the baseline history (YYYY-MM-DD).
        #[arg(long)]
        baseline_end: NaiveDate,
        /// Window length in days.
        #[arg(long, default_value_t = 30)]
        window: u32,
        #[arg(long, default_value_t = DEFAULT_GROWTH_THRESHOLD)]
        growth_threshold: u64,
    },
    /// Write a synthetic corpus (CSV if the output ends in .csv, JSONL otherwise).
    Generate {
        #[command(flatten)]
        common: Common,
        /// TOML or JSON generator config.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the number of background records.
        #[arg(long)]
        records: Option<usize>,
    },
    /// Convert a JSON graph document to another format.
    Export(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input corpus (.csv for CSV, JSON Lines otherwise).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// graphml, dot or json.
    #[arg(long, default_value = "graphml")]
    pub format: Format,
    /// category, subgroup or disease.
    #[arg(long, default_value = "disease")]
    pub level: PathologyLevel,
    /// Comma-separated subset of agent,occupation,sector, or `all`.
    #[arg(long, default_value = "all")]
    pub dims: DimSet,
    /// Tab-separated code/subgroup/category table.
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    /// Seed for the generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the pairwise definitional edge builder.
    #[arg(long)]
    pub quadratic: bool,
    /// Build on a single thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long, default_value_t = DEFAULT_HUB_THRESHOLD)]
    pub hub_threshold: usize,
    /// Write reject reports here as JSON Lines.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Surveillance(#[from] SurveillanceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: not a graph document: {source}")]
    Document {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("writing output: {0}")]
    Write(#[from] std::io::Error),
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
                    if e.exit_code() == 0 =>
                {
                    let _ = stdout.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    EXIT_FATAL
                }
            };
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FATAL
        }
    }
}

pub fn execute(
    command: &Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Build(common) => cmd_build(common, true, stdout, stderr),
        Command::Stats(common) => cmd_build(common, false, stdout, stderr),
        Command::Tripartite { common, filter } => {
            cmd_tripartite(common, filter.as_deref(), stdout, stderr)
        }
        Command::Surveil {
            common,
            baseline_end,
            window,
            growth_threshold,
        } => {
            let config = SurveillanceConfig {
                graph: GraphConfig::new(common.dims, common.level),
                baseline_end: *baseline_end,
                window_days: *window,
                growth_threshold: *growth_threshold,
            };
            cmd_surveil(common, config, stdout, stderr)
        }
        Command::Generate {
            common,
            config,
            records,
        } => cmd_generate(common, config.as_deref(), *records, stdout, stderr),
        Command::Export(common) => cmd_export(common, stdout, stderr),
    }
}

fn required_input(common: &Common) -> Result<&Path, CliError> {
    common
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a corpus, choosing the parser from the file extension.
pub fn read_corpus(path: &Path) -> Result<ParseOutcome, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed = if is_csv(path) {
        parse_csv(BufReader::new(file))
    } else {
        parse_jsonl(BufReader::new(file))
    };
    parsed.map_err(|source| CliError::Ingest {
        path: path.to_path_buf(),
        source,
    })
}

fn read_hierarchy(common: &Common) -> Result<Option<Hierarchy>, CliError> {
    let Some(path) = &common.hierarchy else {
        return Ok(None);
    };
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(Some(Hierarchy::from_reader(BufReader::new(file))?))
}

fn load(common: &Common, stderr: &mut dyn Write) -> Result<ParseOutcome, CliError> {
    let input = required_input(common)?;
    let outcome = read_corpus(input)?;
    if !outcome.rejects.is_empty() {
        let _ = writeln!(
            stderr,
            "{}: {} of {} lines rejected",
            input.display(),
            outcome.rejects.len(),
            outcome.total_lines
        );
    }
    if let Some(path) = &common.rejects {
        let mut out = Vec::new();
        for reject in &outcome.rejects {
            serde_json::to_writer(&mut out, reject).expect("reject serializes");
            out.push(b'\n');
        }
        write_file(path, &out)?;
    }
    Ok(outcome)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn print_json<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *stdout, value).map_err(std::io::Error::from)?;
    stdout.write_all(b"\n")?;
    Ok(())
}

/// Builds the graph described by the shared flags.
pub fn build_from(
    common: &Common,
    outcome: &ParseOutcome,
    hierarchy: Option<&Hierarchy>,
) -> Result<ExposomeGraph, CliError> {
    let ledger = fold_identities(&outcome.records);
    let algorithm = if common.quadratic {
        BuildAlgorithm::Quadratic
    } else {
        BuildAlgorithm::Indexed
    };
    Ok(
        GraphBuilder::new(GraphConfig::new(common.dims, common.level))
            .hierarchy(hierarchy)
            .hub_threshold(common.hub_threshold)
            .algorithm(algorithm)
            .parallel(!common.sequential)
            .build(&ledger)?,
    )
}

fn cmd_build(
    common: &Common,
    write_graph: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let hierarchy = read_hierarchy(common)?;
    let outcome = load(common, stderr)?;
    let graph = build_from(common, &outcome, hierarchy.as_ref())?;
    if write_graph {
        if let Some(path) = &common.output {
            let doc = GraphDocument::from_exposome(&graph);
            write_file(path, doc.render(common.format).as_bytes())?;
        }
    }
    let report = StatsReport::new(&graph, Some(&outcome));
    print_json(stdout, &report)?;
    let _ = writeln!(stderr, "{}", report.summary());
    Ok(())
}

fn cmd_tripartite(
    common: &Common,
    filter: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let outcome = load(common, stderr)?;
    let ledger = fold_identities(&outcome.records);
    let graph = project_tripartite(&ledger, filter);
    let text = GraphDocument::from_tripartite(&graph).render(common.format);
    let _ = writeln!(
        stderr,
        "tripartite: {} pathologies, {} agents, {} occupations, {} edges",
        graph.pathologies.len(),
        graph.agents.len(),
        graph.occupations.len(),
        graph.edge_count()
    );
    match &common.output {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            print_json(
                stdout,
                &json!({
                    "pathologies": graph.pathologies.len(),
                    "agents": graph.agents.len(),
                    "occupations": graph.occupations.len(),
                    "agent_occupation_edges": graph.agent_occupation.len(),
                    "agent_pathology_edges": graph.agent_pathology.len(),
                }),
            )
        }
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn cmd_surveil(
    common: &Common,
    config: SurveillanceConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    config.validate()?;
    let hierarchy = read_hierarchy(common)?;
    let outcome = load(common, stderr)?;
    let result = replay(&outcome.records, &config, hierarchy.as_ref())?;
    let mut lines = Vec::new();
    for event in &result.events {
        serde_json::to_writer(&mut lines, event).expect("event serializes");
        lines.push(b'\n');
    }
    let count = |kind| result.events.iter().filter(|e| e.kind == kind).count();
    use crate::surveillance::EventKind::*;
    let _ = writeln!(
        stderr,
        "surveil: {} baseline records, {} replayed over {} active windows; {} events ({} new nodes, {} new connections, {} weight growth)",
        result.baseline_records,
        result.replayed_records,
        result.active_windows,
        result.events.len(),
        count(NewNode),
        count(NewConnection),
        count(WeightGrowth)
    );
    match &common.output {
        Some(path) => {
            write_file(path, &lines)?;
            print_json(
                stdout,
                &json!({
                    "status": result.status,
                    "baseline_records": result.baseline_records,
                    "replayed_records": result.replayed_records,
                    "active_windows": result.active_windows,
                    "events": result.events.len(),
                    "new_node": count(NewNode),
                    "new_connection": count(NewConnection),
                    "weight_growth": count(WeightGrowth),
                }),
            )
        }
        None => Ok(stdout.write_all(&lines)?),
    }
}

fn cmd_generate(
    common: &Common,
    config_path: Option<&Path>,
    records: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let mut config = match config_path {
        Some(path) => SynthConfig::from_path(path)?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(n) = records {
        config.n_records = n;
    }
    let corpus = generate(&config)?;
    let mut bytes = Vec::new();
    let csv = common.output.as_deref().is_some_and(is_csv);
    if csv {
        write_csv(&corpus, &mut bytes).map_err(|e| CliError::Usage(e.to_string()))?;
    } else {
        write_jsonl(&corpus, &mut bytes)?;
    }
    let _ = writeln!(
        stderr,
        "generate: {} records, seed {}",
        corpus.len(),
        config.seed
    );
    match &common.output {
        Some(path) => {
            write_file(path, &bytes)?;
            print_json(
                stdout,
                &json!({ "records": corpus.len(), "seed": config.seed }),
            )
        }
        None => Ok(stdout.write_all(&bytes)?),
    }
}

fn cmd_export(
    common: &Common,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let input = required_input(common)?;
    let text = std::fs::read_to_string(input).map_err(|source| CliError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let doc = GraphDocument::from_json(&text).map_err(|source| CliError::Document {
        path: input.to_path_buf(),
        source,
    })?;
    let rendered = doc.render(common.format);
    let _ = writeln!(
        stderr,
        "export: {} nodes, {} edges as {}",
        doc.nodes.len(),
        doc.edges.len(),
        common.format.extension()
    );
    match &common.output {
        Some(path) => write_file(path, rendered.as_bytes()),
        None => Ok(stdout.write_all(rendered.as_bytes())?),
    }
}

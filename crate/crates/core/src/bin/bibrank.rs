//! Command-line front end for the citation-graph ranking engine.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bibrank::graph::{AuthorId, CitationGraph, PaperId, RefCountMode};
use bibrank::ingest::{
    load_snapshot, load_snapshot_path, ApiClient, ApiConfig, FixtureTransport, Strictness,
};
use bibrank::rank::{TimeWindow, DEFAULT_ALPHA, DEFAULT_BETA};
use bibrank::report::{
    build_paper_detail, build_rank_report, build_scatter_report, build_verify_report, Metric,
    OutputFormat, ReportOptions, ValidationOutput, DEFAULT_I_THRESHOLD,
};
use bibrank::state::RankState;

#[derive(Parser)]
#[command(
    name = "bibrank",
    version,
    about = "Citation-graph ranking: PaperRank/AuthorRank indices, reports and incremental sync"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Reference-count mode: full bibliography length or in-database count
    #[arg(long, global = true, default_value = "bibliography", value_parser = parse_mode)]
    mode: RefCountMode,

    /// Share threshold factor for the h_alpha column
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,

    /// Share threshold for the i_beta column
    #[arg(long, global = true, default_value_t = DEFAULT_BETA)]
    beta: f64,

    /// Publication-year window FROM:TO (either side may be empty)
    #[arg(long, global = true, value_parser = parse_window)]
    window: Option<TimeWindow>,

    /// Output format
    #[arg(long, global = true, default_value = "table", value_parser = parse_format)]
    format: OutputFormat,

    /// Rank-state file used by init and sync
    #[arg(long, global = true)]
    state: Option<PathBuf>,

    /// Endpoint configuration file used by sync
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write output to a file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-author index table over a snapshot
    Rank {
        /// Snapshot file (`-` for standard input)
        snapshot: String,
        /// Citation threshold for the i-N column
        #[arg(long, default_value_t = DEFAULT_I_THRESHOLD)]
        i_threshold: usize,
    },
    /// Detail view of one paper: rank, citations, rho, per-citer terms
    Paper {
        snapshot: String,
        /// Paper id
        id: String,
    },
    /// Per-author (x, y) rows for two metrics, with a least-squares fit
    Scatter {
        snapshot: String,
        /// X metric: sumcit, sumpr, authorrank or hindex
        #[arg(value_parser = parse_metric)]
        x: Metric,
        /// Y metric: sumcit, sumpr, authorrank or hindex
        #[arg(value_parser = parse_metric)]
        y: Metric,
        /// Author ids to leave out of the rows and the fit
        #[arg(long)]
        exclude: Vec<String>,
    },
    /// Run the eigenvector-oracle checks against the snapshot
    Verify {
        snapshot: String,
        /// Residual tolerance for the power-method fixed point
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Data-quality scan: dangling papers, self-citations, uncited authors
    Validate {
        snapshot: String,
        /// Skip malformed lines instead of aborting
        #[arg(long)]
        lenient: bool,
    },
    /// Bootstrap a rank-state file from a snapshot (see --state)
    Init { snapshot: String },
    /// Synchronize a rank state against the configured backend for the
    /// given author ids (see --state and --config)
    Sync {
        /// Author ids to synchronize
        #[arg(required = true)]
        authors: Vec<String>,
    },
}

fn parse_mode(s: &str) -> Result<RefCountMode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse()
}

fn parse_window(s: &str) -> Result<TimeWindow, String> {
    let (from, to) = s
        .split_once(':')
        .ok_or_else(|| format!("window `{s}` is not FROM:TO"))?;
    let parse_side = |side: &str| -> Result<Option<i32>, String> {
        if side.is_empty() {
            Ok(None)
        } else {
            side.parse()
                .map(Some)
                .map_err(|_| format!("`{side}` is not a year"))
        }
    };
    TimeWindow::new(parse_side(from)?, parse_side(to)?).map_err(|e| e.to_string())
}

fn load_graph(
    source: &str,
    strictness: Strictness,
) -> Result<(CitationGraph, usize, Vec<bibrank::ingest::LineIssue>)> {
    let load = if source == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .context("reading snapshot from standard input")?;
        load_snapshot(text.as_bytes(), strictness)?
    } else {
        load_snapshot_path(Path::new(source), strictness)
            .with_context(|| format!("loading snapshot `{source}`"))?
    };
    let build = CitationGraph::build(load.records)?;
    Ok((build.graph, build.pruned_references.len(), load.skipped))
}

fn emit(global: &GlobalArgs, text: &str) -> Result<()> {
    match &global.out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing output to `{}`", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_state(global: &GlobalArgs) -> Result<&PathBuf> {
    global
        .state
        .as_ref()
        .ok_or_else(|| anyhow!("--state PATH is required for this command"))
}

fn run(cli: &Cli) -> Result<bool> {
    let global = &cli.global;
    let window = global.window.unwrap_or_default();
    match &cli.command {
        Command::Rank { snapshot, i_threshold } => {
            let (graph, _, _) = load_graph(snapshot, Strictness::Strict)?;
            let report = build_rank_report(
                &graph,
                &ReportOptions {
                    mode: global.mode,
                    alpha: global.alpha,
                    beta: global.beta,
                    i_threshold: *i_threshold,
                    window,
                },
            )?;
            emit(global, &report.render(global.format))?;
            Ok(true)
        }
        Command::Paper { snapshot, id } => {
            let (graph, _, _) = load_graph(snapshot, Strictness::Strict)?;
            let detail =
                build_paper_detail(&graph, &PaperId::new(id.as_str()), global.mode, window)?;
            emit(global, &detail.render(global.format))?;
            Ok(true)
        }
        Command::Scatter { snapshot, x, y, exclude } => {
            let (graph, _, _) = load_graph(snapshot, Strictness::Strict)?;
            let excluded: Vec<AuthorId> =
                exclude.iter().map(|a| AuthorId::new(a.as_str())).collect();
            let report = build_scatter_report(&graph, *x, *y, global.mode, window, &excluded)?;
            emit(global, &report.render(global.format))?;
            Ok(true)
        }
        Command::Verify { snapshot, tolerance, max_iterations } => {
            let (graph, _, _) = load_graph(snapshot, Strictness::Strict)?;
            let report = build_verify_report(&graph, *tolerance, *max_iterations)?;
            emit(global, &report.render(global.format))?;
            Ok(report.passed)
        }
        Command::Validate { snapshot, lenient } => {
            let strictness = if *lenient {
                Strictness::Lenient
            } else {
                Strictness::Strict
            };
            let (graph, pruned, skipped) = load_graph(snapshot, strictness)?;
            let output = ValidationOutput {
                papers: graph.paper_count(),
                pruned_references: pruned,
                report: graph.validate(),
                skipped_lines: skipped,
            };
            emit(global, &output.render(global.format))?;
            Ok(true)
        }
        Command::Init { snapshot } => {
            let state_path = require_state(global)?;
            let (graph, _, _) = load_graph(snapshot, Strictness::Strict)?;
            let state = RankState::init(&graph, global.mode)?;
            state.save_to_path(state_path)?;
            emit(
                global,
                &format!(
                    "initialized state for {} papers, {} mode, at `{}`\n",
                    state.paper_count(),
                    state.mode(),
                    state_path.display()
                ),
            )?;
            Ok(true)
        }
        Command::Sync { authors } => {
            let state_path = require_state(global)?;
            let config_path = global
                .config
                .as_ref()
                .ok_or_else(|| anyhow!("--config PATH is required for sync"))?;
            let config = ApiConfig::from_file(config_path)?;
            let transport = FixtureTransport::open(&config.base_url)?;
            let mut state = RankState::load_from_path(state_path)
                .with_context(|| format!("loading state `{}`", state_path.display()))?;
            if state.mode() != global.mode && global.mode != RefCountMode::default() {
                bail!(
                    "state file is in {} mode; pass --mode {} or omit --mode",
                    state.mode(),
                    state.mode()
                );
            }
            let mut client = ApiClient::new(config, transport);

            let mut summary = String::new();
            for author in authors {
                let author = AuthorId::new(author.as_str());
                let delta = client
                    .sync_author(&mut state, &author)
                    .with_context(|| format!("syncing author `{author}`"))?;
                summary.push_str(&format!(
                    "author {author}: {} paper deltas (total {}), {} author deltas (total {})\n",
                    delta.paper_deltas.len(),
                    delta.paper_total(),
                    delta.author_deltas.len(),
                    delta.author_total(),
                ));
                for (paper, value) in &delta.paper_deltas {
                    summary.push_str(&format!("  paper {paper} +{value}\n"));
                }
                for (author_id, value) in &delta.author_deltas {
                    summary.push_str(&format!("  author {author_id} +{value}\n"));
                }
                for skipped in &delta.skipped_references {
                    summary.push_str(&format!("  skipped unknown reference {skipped}\n"));
                }
            }
            // Write-new-then-swap: a failure above leaves the old file as is.
            state.save_to_path(state_path)?;
            summary.push_str(&format!("budget: {}\n", client.budget()));
            emit(global, &summary)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}

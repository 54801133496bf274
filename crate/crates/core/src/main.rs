//! Command-line front end for the collaboration-graph scoring pipeline.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or parameter
//! values), 2 on data errors (unreadable files, malformed records,
//! unscorable nodes). Every failure prints a one-line diagnostic to stderr.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use nodepurity::evaluation::{
    accuracy, auc, export_features, format_sig6, precision_at, sweep, write_sweep_csv, EvalError,
    LabeledScore,
};
use nodepurity::graph::{GraphError, TemporalGraph};
use nodepurity::ingest::{self, EventFormat, IngestError};
use nodepurity::mcl::MclParams;
use nodepurity::scoring::{score_node, score_nodes, ScoreError, ScoreParams, ScoreRecord};
use nodepurity::synth::{generate, SynthConfig, SynthError};

#[derive(Parser)]
#[command(
    name = "nodepurity",
    version,
    about = "Scores collaboration-graph nodes for merged-identity likelihood \
             from topology and timestamps alone"
)]
struct Cli {
    /// Worker threads for batch scoring (0 or unset: all cores)
    #[arg(long, global = true, env = "NODEPURITY_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one node and print its record as JSON
    Score(ScoreCmd),
    /// Score nodes and emit a most-suspicious-first CSV ranking
    Rank(RankCmd),
    /// Export per-node score and centrality features as CSV
    Features(FeaturesCmd),
    /// Evaluate a ranking CSV against ground-truth labels
    Eval(EvalCmd),
    /// Sweep decay and mixing parameters, emitting AUC per grid point
    Sweep(SweepCmd),
    /// Generate a labeled synthetic benchmark
    Synth(SynthCmd),
}

#[derive(Args)]
struct InputArgs {
    /// Event file (JSONL or CSV; .gz accepted)
    #[arg(long)]
    events: PathBuf,
    /// Input format (default: inferred from the file extension)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Skip malformed lines with a warning instead of failing
    #[arg(long)]
    lenient: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for EventFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => EventFormat::Jsonl,
            FormatArg::Csv => EventFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Decay time constant, in time-bin units
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    /// Weight of the mobility term in the combined score
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Cluster-expansion inflation exponent
    #[arg(long, default_value_t = 1.4)]
    inflation: f64,
    /// Moving-average window (odd) for activity profiles
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Probability floor added to empty activity bins
    #[arg(long, default_value_t = 0.01)]
    laplace: f64,
}

impl ParamArgs {
    fn to_params(&self) -> Result<ScoreParams, CliError> {
        let params = ScoreParams {
            alpha: self.alpha,
            tau: self.tau,
            laplace_eps: self.laplace,
            smoothing_window: self.window,
            mcl: MclParams {
                inflation: self.inflation,
                ..MclParams::default()
            },
        };
        params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(params)
    }
}

#[derive(Args)]
struct ScoreCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Node to score
    #[arg(long)]
    node: String,
}

#[derive(Args)]
struct RankCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// File with one node id per line (default: every node in the graph)
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Output CSV path (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// File with one node id per line (default: the labeled nodes if
    /// --labels is given, otherwise every node in the graph)
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Label CSV; adds a label column and must cover every exported node
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output CSV path (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCmd {
    /// Ranking CSV with node_id and s_score columns (as written by rank)
    #[arg(long)]
    scores: PathBuf,
    /// Label CSV with node_id,label rows
    #[arg(long)]
    labels: PathBuf,
    /// Score threshold for the accuracy line (positives score below it)
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Label CSV naming the nodes to score, with their classes
    #[arg(long)]
    labels: PathBuf,
    /// Decay constants to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [3.0, 5.0, 7.0, 10.0])]
    taus: Vec<f64>,
    /// Mobility weights to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2])]
    alphas: Vec<f64>,
    /// Cluster-expansion inflation exponent
    #[arg(long, default_value_t = 1.4)]
    inflation: f64,
    /// Moving-average window (odd) for activity profiles
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Probability floor added to empty activity bins
    #[arg(long, default_value_t = 0.01)]
    laplace: f64,
    /// Output CSV path (default: stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SynthCmd {
    /// Where to write the generated events (JSONL)
    #[arg(long)]
    out_events: PathBuf,
    /// Where to write the ground-truth labels (CSV)
    #[arg(long)]
    out_labels: PathBuf,
    /// Single-community nodes (negative class)
    #[arg(long, default_value_t = 25)]
    n_pure: usize,
    /// Merged nodes (positive class)
    #[arg(long, default_value_t = 25)]
    n_multi: usize,
    /// Era-switching nodes (negative class)
    #[arg(long, default_value_t = 25)]
    n_mobile: usize,
    /// Communities per merged node
    #[arg(long, default_value_t = 2)]
    entities_per_multi: usize,
    /// Collaborators per community
    #[arg(long, default_value_t = 15)]
    collaborators_per_entity: usize,
    /// Within-community edge probability, in (0, 1]
    #[arg(long, default_value_t = 0.3)]
    intra_density: f64,
    /// Cross-community stray-edge probability, in [0, 1)
    #[arg(long, default_value_t = 0.02)]
    inter_noise: f64,
    /// Year span of every generated world
    #[arg(long, default_value_t = 10)]
    years: u32,
    /// Mean yearly event count per active edge
    #[arg(long, default_value_t = 3.0)]
    events_per_year: f64,
    /// Year index where mobile nodes switch communities
    #[arg(long, default_value_t = 5)]
    mobility_break: u32,
    /// Generator seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) => f.write_str(msg),
        }
    }
}

macro_rules! data_error_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error_from!(
    io::Error,
    IngestError,
    GraphError,
    ScoreError,
    EvalError,
    SynthError,
    serde_json::Error
);

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        // ignore failure: the pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Score(cmd) => cmd_score(cmd),
        Command::Rank(cmd) => cmd_rank(cmd),
        Command::Features(cmd) => cmd_features(cmd),
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Sweep(cmd) => cmd_sweep(cmd),
        Command::Synth(cmd) => cmd_synth(cmd),
    }
}

/// Reads events, printing one warning line per skipped record in lenient
/// mode, and builds the graph.
fn load_graph(input: &InputArgs) -> Result<TemporalGraph, CliError> {
    let parsed = ingest::read_events_from_path(
        &input.events,
        input.format.map(EventFormat::from),
        input.lenient,
    )
    .map_err(|e| CliError::Data(format!("{}: {e}", input.events.display())))?;
    for issue in &parsed.issues {
        eprintln!(
            "warning: {}:{}: {}",
            input.events.display(),
            issue.line,
            issue.reason
        );
    }
    Ok(TemporalGraph::build(&parsed.events)?)
}

fn read_node_list(path: &Path) -> Result<Vec<String>, CliError> {
    let reader = ingest::open_input(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut ids = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let id = line.trim();
        if !id.is_empty() {
            ids.push(id.to_string());
        }
    }
    Ok(ids)
}

fn read_labels(path: &Path) -> Result<Vec<ingest::LabelRecord>, CliError> {
    ingest::read_labels_from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn all_node_ids(g: &TemporalGraph) -> Vec<String> {
    let mut ids: Vec<String> = g.node_indices().map(|u| g.node_id(u).to_string()).collect();
    ids.sort();
    ids
}

fn output_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Scores a node set, emitting one warning line per unscorable node and
/// returning the surviving records sorted by node id.
fn score_all(
    g: &TemporalGraph,
    ids: &[String],
    params: &ScoreParams,
    with_centrality: bool,
) -> Result<Vec<ScoreRecord>, CliError> {
    let mut records = Vec::with_capacity(ids.len());
    for (id, result) in ids.iter().zip(score_nodes(g, ids, params, with_centrality)) {
        match result {
            Ok(record) => records.push(record),
            Err(e) => eprintln!("warning: skipping {id}: {e}"),
        }
    }
    if records.is_empty() {
        return Err(CliError::Data("no scorable nodes in the input set".into()));
    }
    records.sort_by(|a, b| a.node_id.cmp(&b.node_id));
    Ok(records)
}

fn cmd_score(cmd: ScoreCmd) -> Result<(), CliError> {
    let params = cmd.params.to_params()?;
    let g = load_graph(&cmd.input)?;
    let record = score_node(&g, &cmd.node, &params, true)?;
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn write_ranking(mut out: impl Write, records: &[ScoreRecord]) -> Result<(), CliError> {
    writeln!(out, "node_id,nc_score,tm_score,s_score,k")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.node_id,
            format_sig6(r.nc_score),
            format_sig6(r.tm_score),
            format_sig6(r.s_score),
            r.k
        )?;
    }
    Ok(())
}

fn cmd_rank(cmd: RankCmd) -> Result<(), CliError> {
    let params = cmd.params.to_params()?;
    let g = load_graph(&cmd.input)?;
    let ids = match &cmd.nodes {
        Some(path) => read_node_list(path)?,
        None => all_node_ids(&g),
    };
    let mut records = score_all(&g, &ids, &params, false)?;
    records.sort_by(|a, b| {
        a.s_score
            .total_cmp(&b.s_score)
            .then_with(|| a.node_id.cmp(&b.node_id))
    });
    write_ranking(output_writer(&cmd.output)?, &records)?;
    eprintln!("ranked {} nodes (ascending combined score)", records.len());
    Ok(())
}

fn cmd_features(cmd: FeaturesCmd) -> Result<(), CliError> {
    let params = cmd.params.to_params()?;
    let g = load_graph(&cmd.input)?;
    let labels: Option<HashMap<String, bool>> = match &cmd.labels {
        Some(path) => Some(
            read_labels(path)?
                .into_iter()
                .map(|l| (l.node_id, l.label))
                .collect(),
        ),
        None => None,
    };
    let ids = match (&cmd.nodes, &labels) {
        (Some(path), _) => read_node_list(path)?,
        (None, Some(map)) => {
            let mut ids: Vec<String> = map.keys().cloned().collect();
            ids.sort();
            ids
        }
        (None, None) => all_node_ids(&g),
    };
    let records = score_all(&g, &ids, &params, true)?;
    export_features(output_writer(&cmd.output)?, &records, labels.as_ref())?;
    eprintln!("exported features for {} nodes", records.len());
    Ok(())
}

/// Reads `node_id` and `s_score` columns from a ranking CSV.
fn read_scores_csv(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let reader = ingest::open_input(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(CliError::Data(format!("{}: empty file", path.display()))),
    };
    let columns: Vec<&str> = header.trim().split(',').collect();
    let col = |name: &str| {
        columns.iter().position(|c| *c == name).ok_or_else(|| {
            CliError::Data(format!("{}: missing column '{name}'", path.display()))
        })
    };
    let id_col = col("node_id")?;
    let score_col = col("s_score")?;
    let mut rows = Vec::new();
    for (index, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let bad_row = |what: &str| {
            CliError::Data(format!("{}:{}: {what}", path.display(), index + 1))
        };
        if fields.len() != columns.len() {
            return Err(bad_row("wrong field count"));
        }
        let score: f64 = fields[score_col]
            .parse()
            .map_err(|_| bad_row("unreadable s_score"))?;
        rows.push((fields[id_col].to_string(), score));
    }
    Ok(rows)
}

fn cmd_eval(cmd: EvalCmd) -> Result<(), CliError> {
    let scores = read_scores_csv(&cmd.scores)?;
    let labels: HashMap<String, bool> = read_labels(&cmd.labels)?
        .into_iter()
        .map(|l| (l.node_id, l.label))
        .collect();
    let joined: Vec<LabeledScore> = scores
        .iter()
        .filter_map(|(id, score)| {
            labels.get(id).map(|&label| LabeledScore {
                node_id: id.clone(),
                score: *score,
                label,
            })
        })
        .collect();
    if joined.len() < scores.len() {
        eprintln!(
            "note: ignoring {} scored nodes without labels",
            scores.len() - joined.len()
        );
    }
    if joined.is_empty() {
        return Err(CliError::Data(
            "no scored nodes matched the label file".into(),
        ));
    }
    println!("auc: {}", format_sig6(auc(&joined, true)?));
    for fraction in [0.10, 0.15, 0.20] {
        println!(
            "precision@{:.0}%: {}",
            fraction * 100.0,
            format_sig6(precision_at(&joined, fraction, true)?)
        );
    }
    println!(
        "accuracy@{}: {}",
        format_sig6(cmd.threshold),
        format_sig6(accuracy(&joined, cmd.threshold, true)?)
    );
    Ok(())
}

fn cmd_sweep(cmd: SweepCmd) -> Result<(), CliError> {
    let base = ParamArgs {
        tau: 5.0,
        alpha: 0.1,
        inflation: cmd.inflation,
        window: cmd.window,
        laplace: cmd.laplace,
    }
    .to_params()?;
    if cmd.taus.is_empty() || cmd.alphas.is_empty() {
        return Err(CliError::Usage("sweep needs at least one τ and one α".into()));
    }
    let g = load_graph(&cmd.input)?;
    let labels = read_labels(&cmd.labels)?;
    let points = sweep(&g, &labels, &cmd.taus, &cmd.alphas, &base)?;
    write_sweep_csv(output_writer(&cmd.output)?, &points)?;
    eprintln!("swept {} grid points", points.len());
    Ok(())
}

fn cmd_synth(cmd: SynthCmd) -> Result<(), CliError> {
    let cfg = SynthConfig {
        n_pure: cmd.n_pure,
        n_multi: cmd.n_multi,
        n_mobile: cmd.n_mobile,
        entities_per_multi: cmd.entities_per_multi,
        collaborators_per_entity: cmd.collaborators_per_entity,
        intra_density: cmd.intra_density,
        inter_noise: cmd.inter_noise,
        years: cmd.years,
        events_per_year: cmd.events_per_year,
        mobility_break: cmd.mobility_break,
        seed: cmd.seed,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (events, labels) = generate(&cfg)?;
    let mut events_out = BufWriter::new(File::create(&cmd.out_events)?);
    ingest::write_events_jsonl(&mut events_out, &events)?;
    events_out.flush()?;
    let mut labels_out = BufWriter::new(File::create(&cmd.out_labels)?);
    ingest::write_labels_csv(&mut labels_out, &labels)?;
    labels_out.flush()?;
    eprintln!(
        "wrote {} events and {} labels ({} positive)",
        events.len(),
        labels.len(),
        labels.iter().filter(|l| l.label).count()
    );
    Ok(())
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Exit status 2: the invocation itself is wrong.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser, Debug)]
#[command(name = "quadrank", version, about = "Score, flatten and evaluate bipolar debate graphs")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute QuAD acceptability degrees and gold rankings.
    Quad(QuadArgs),
    /// Write debates as numbered dialogues.
    Flatten(FlattenArgs),
    /// Run the ranking protocol against a model backend.
    Evaluate(Box<EvaluateArgs>),
    /// Quartile correlations by argument length or position for a run report.
    Bias(BiasArgs),
    /// Corpus counts and degree statistics.
    Stats(StatsArgs),
    /// Convert corpora to the JSON graph file format.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Corpus file: NoDE pair XML (.xml) or graph file (.json). Repeatable.
    #[arg(long = "corpus", required = true, value_name = "PATH")]
    pub paths: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Replace existing output.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct QuadArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Directory for scores.json and rankings.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub out_args: OutArgs,
}

#[derive(Args, Debug)]
pub struct FlattenArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// `chronological` or `toposort:<k>:<seed>`.
    #[arg(long, default_value = "chronological")]
    pub ordering: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub out_args: OutArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum MockArg {
    GoldEcho,
    Reversal,
    Noisy,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("backend").required(true).args(["mock", "replay", "backend_config"])))]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Corpus the exemplars are drawn from; none of its graphs are evaluated.
    #[arg(long, value_name = "PATH")]
    pub exemplar_corpus: Option<PathBuf>,
    /// Comma-separated exemplar graph names, or `auto` for the balanced,
    /// attack-heavy and support-heavy debates of the exemplar pool.
    #[arg(long, value_delimiter = ',')]
    pub exemplars: Vec<String>,
    /// Strategy name, comma-separated list, or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub strategy: Vec<String>,
    #[arg(long, required = true)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.7)]
    pub temperature: f64,
    #[arg(long, default_value_t = 4096)]
    pub max_tokens: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 120.0)]
    pub timeout: f64,
    /// Retries after transport or rate-limit failures.
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    /// Concurrent requests.
    #[arg(long, default_value_t = 4)]
    pub jobs: usize,
    /// Evaluate each graph once per sampled topological order (k orders).
    #[arg(long, value_name = "K")]
    pub toposort: Option<usize>,
    /// Offline backend with known answers.
    #[arg(long, value_enum)]
    pub mock: Option<MockArg>,
    /// Replay archive to answer from.
    #[arg(long, value_name = "ARCHIVE")]
    pub replay: Option<PathBuf>,
    /// HTTP adapter config (JSON).
    #[arg(long, value_name = "FILE")]
    pub backend_config: Option<PathBuf>,
    /// Append every answered request to this archive.
    #[arg(long, value_name = "ARCHIVE")]
    pub record: Option<PathBuf>,
    /// Directory with `<strategy>.txt` files overriding the built-in templates.
    #[arg(long, value_name = "DIR")]
    pub templates: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub out_args: OutArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum KeyArg {
    Length,
    Position,
}

#[derive(Args, Debug)]
pub struct BiasArgs {
    /// RunReport JSON written by `evaluate`.
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, value_enum)]
    pub key: KeyArg,
    /// CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub out_args: OutArgs,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Exemplar names (or `auto`) to leave out of the evaluation pair count.
    #[arg(long, value_delimiter = ',')]
    pub exemplars: Vec<String>,
    /// CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub out_args: OutArgs,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Graph file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub out_args: OutArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Quad(a) => commands::quad(a),
        Command::Flatten(a) => commands::flatten(a),
        Command::Evaluate(a) => commands::evaluate(*a),
        Command::Bias(a) => commands::bias(a),
        Command::Stats(a) => commands::stats(a),
        Command::Ingest(a) => commands::ingest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

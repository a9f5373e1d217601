use std::path::PathBuf;

use alter_core::analysis::{FeedbackFilter, ReportFormat};
use alter_store::Role;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Administer the rewriting store and analyse exported histories.
#[derive(Debug, Parser)]
#[command(name = "alter-admin", version)]
pub struct Cli {
    /// Work directly on a store directory.
    #[arg(long, global = true, conflicts_with = "server")]
    pub store: Option<PathBuf>,

    /// Talk to a running server instead of a store directory.
    #[arg(long, global = true, requires = "token")]
    pub server: Option<String>,

    /// Administrator token for --server.
    #[arg(long, global = true, env = "ALTER_TOKEN", hide_env_values = true)]
    pub token: Option<String>,

    /// Report layout.
    #[arg(long, global = true, default_value = "table", value_parser = parse_format)]
    pub format: ReportFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manage users.
    #[command(subcommand)]
    User(UserCommand),
    /// Manage tasks.
    #[command(subcommand)]
    Task(TaskCommand),
    /// Create one job per sentence of a task for each user.
    Assign {
        #[arg(long)]
        task: String,
        /// User ids (repeat or separate with commas).
        #[arg(long = "user", required = true, value_delimiter = ',')]
        users: Vec<String>,
    },
    /// Write revision histories as JSON lines.
    Export {
        #[arg(long)]
        user: Option<String>,
        #[arg(long)]
        task: Option<String>,
        #[arg(long, value_enum)]
        status: Option<StatusArg>,
        /// Output file (stdout by default).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Load an export file into the store.
    Import {
        #[arg(long)]
        export: PathBuf,
    },
    /// Count revisions per operation category.
    OpDistribution(ExportArg),
    /// Fraction of jobs with auxiliary operations and mean count per job.
    EngagementReport(ExportArg),
    /// Mean classifier entropy of original and final sentences.
    EntropyReport {
        #[command(flatten)]
        export: ExportArg,
        /// Classifier model file.
        #[arg(long)]
        classifier: PathBuf,
    },
    /// Revisions per job whose result is still referenced by the final sentence.
    ReferenceCount {
        #[command(flatten)]
        export: ExportArg,
        /// Keep only revisions whose feedback passes, e.g. `ED<=5`.
        #[arg(long = "filter", value_parser = parse_filter)]
        filters: Vec<FeedbackFilter>,
    },
    /// Train an n-gram language model from one sentence per line.
    TrainLm {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Train a naive Bayes classifier from `label<TAB>text` lines.
    TrainClassifier {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ExportArg {
    /// Export file to analyse.
    #[arg(long)]
    pub export: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum UserCommand {
    Create {
        #[arg(long)]
        id: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "annotator", value_parser = parse_role)]
        role: Role,
        /// Fixed token (generated when omitted).
        #[arg(long = "user-token")]
        user_token: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TaskCommand {
    Create {
        #[arg(long)]
        id: String,
        #[arg(long)]
        title: String,
        /// File with one sentence per line.
        #[arg(long, required_unless_present = "sentence")]
        sentences: Option<PathBuf>,
        /// A sentence given inline (repeatable).
        #[arg(long)]
        sentence: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        providers: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        #[arg(long)]
        target_label: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StatusArg {
    Complete,
    Incomplete,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_filter(s: &str) -> Result<FeedbackFilter, String> {
    s.parse()
}

fn parse_role(s: &str) -> Result<Role, String> {
    s.parse().map_err(|e: alter_store::StoreError| e.to_string())
}

//! `webdir`: build community web directories from proxy access logs.
//!
//! The subcommands follow the mining workflow one step at a time: `parse`
//! loads a log, `sites` lists the sites and directories it touches, `cluster`
//! runs the whole pipeline and writes one directory per user community, and
//! `taxonomy` edits the category file used for classification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use webdir_core::artificial::DEFAULT_SIGMA;
use webdir_core::community::{DEFAULT_MAX_CLIQUES, DEFAULT_MIN_SIZE, DEFAULT_TAU, DEFAULT_THETA};

mod commands;
mod io;

/// Exit codes.
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE_EMPTY: u8 = 2;
pub const EXIT_EXPLOSION: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "webdir",
    version,
    about = "Community web directories from access logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a Common Log Format file into tab-separated records.
    Parse(ParseArgs),
    /// List the sites (and optionally directories) requested in a log.
    Sites(SitesArgs),
    /// Discover user communities and write their pruned directories.
    Cluster(ClusterArgs),
    /// Show or edit a taxonomy file.
    Taxonomy {
        #[command(subcommand)]
        action: TaxonomyCommand,
    },
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Comma-separated HTTP methods to keep.
    #[arg(long, value_delimiter = ',', default_value = "GET")]
    pub policy_methods: Vec<String>,
    /// Comma-separated status classes to keep, e.g. `2,3` or `2xx`.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub policy_status: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Log file, plain or gzip-compressed.
    pub log: PathBuf,
    /// Where to write the records; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SitesArgs {
    /// Log file or records written by `webdir parse`.
    pub input: PathBuf,
    /// Also list distinct (site, directory) pairs.
    #[arg(long)]
    pub dirs: bool,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Log file or records written by `webdir parse`.
    pub input: PathBuf,
    /// Taxonomy file used to classify pages.
    #[arg(long, conflicts_with = "artificial", required_unless_present = "artificial")]
    pub taxonomy: Option<PathBuf>,
    /// Build the taxonomy by clustering the sites in the log instead.
    #[arg(long)]
    pub artificial: bool,
    /// Jaccard threshold for artificial site clustering.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Cosine similarity needed to link two users.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Minimum category score kept in a community directory.
    #[arg(long, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    /// Smallest community size reported.
    #[arg(long, default_value_t = DEFAULT_MIN_SIZE)]
    pub min_size: usize,
    /// Report users with no similar peer as one-member communities.
    #[arg(long)]
    pub keep_singletons: bool,
    /// Abort when clique enumeration finds more maximal cliques than this.
    #[arg(long, default_value_t = DEFAULT_MAX_CLIQUES)]
    pub max_cliques: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub policy: PolicyArgs,
}

#[derive(Debug, Subcommand)]
pub enum TaxonomyCommand {
    /// Print the taxonomy as an indented tree.
    Show { file: PathBuf },
    /// Add a new category (the file is created if missing).
    Add(EditArgs),
    /// Change the keywords or weight of an existing category.
    Update(EditArgs),
}

#[derive(Debug, Args)]
pub struct EditArgs {
    pub file: PathBuf,
    /// Category path, e.g. `Top/Computers/XML`.
    pub path: String,
    /// Comma-separated keywords.
    #[arg(long)]
    pub keywords: Option<String>,
    /// Informativeness weight in [0, 1].
    #[arg(long, conflicts_with = "default_weight")]
    pub weight: Option<f64>,
    /// Drop an explicit weight so the depth default applies.
    #[arg(long)]
    pub default_weight: bool,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(error: E) -> Self {
        Failure::usage(error)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Parse(args) => commands::parse(&args),
        Command::Sites(args) => commands::sites(&args),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Taxonomy { action } => commands::taxonomy(&action),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("webdir: error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

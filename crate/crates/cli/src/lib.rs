//! Command-line front end for `mmslab`: instance files, builtin
//! counterexamples, certificate files and the subcommands of the `mmslab`
//! binary.

pub mod builtins;
pub mod certificate;
pub mod commands;
pub mod format;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use mmslab_core::counterexamples::CounterexampleError;
use mmslab_core::mms::{MmsError, VerifyError};
use mmslab_core::oracle::OracleError;
use mmslab_core::protocols::ProtocolError;
use mmslab_core::{ModelError, ValuationError};
use thiserror::Error;

pub use commands::run;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_IMPOSSIBLE: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("budget refused: {0}")]
    Budget(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ValuationError> for CliError {
    fn from(e: ValuationError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CounterexampleError> for CliError {
    fn from(e: CounterexampleError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MmsError> for CliError {
    fn from(e: MmsError) -> Self {
        match e {
            MmsError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Mms(m) => m.into(),
            VerifyError::Allocation(_) => CliError::Verification(e.to_string()),
            VerifyError::Length { .. } => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Refused { .. } => CliError::Budget(e.to_string()),
            OracleError::Verify(v) => v.into(),
            OracleError::InvalidInput(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Verify(v) => v.into(),
            ProtocolError::PostconditionFailed { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// What a command produced: an exit code and its output in both formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub text: String,
    pub json: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> &str {
        match format {
            Format::Text => &self.text,
            Format::Json => &self.json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "mmslab",
    version,
    about = "Approximate maximin-share allocation toolkit"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for parallel searches.
    #[arg(long, global = true, env = "MMSLAB_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// `INSTANCE` is a JSON file path or a builtin name such as `submodular_6`,
/// `grid27`, `instance_421`, `half_cap:2,2,2`, `n_minus_1:3` or `floor_n3:6`.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximin share of one agent and a partition attaining it.
    Mms {
        instance: String,
        /// Agent number, starting at 1.
        #[arg(long)]
        agent: usize,
        /// Number of parts.
        #[arg(long)]
        d: usize,
        #[arg(long)]
        max_partitions: Option<u64>,
    },
    /// Run a protocol and print its certificate.
    Solve {
        instance: String,
        /// `uniform-half` or `one-half-half`.
        #[arg(long, default_value = "uniform-half")]
        alpha: String,
        /// Demand vector, e.g. `3,2,2`.
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<usize>>,
        /// JSON list of partitions, one per agent, each a list of item lists.
        #[arg(long)]
        partitions: Option<PathBuf>,
        /// Run this protocol directly instead of routing by demand.
        #[arg(long)]
        protocol: Option<String>,
        /// Agent types for `two_types`, e.g. `S,T,S`.
        #[arg(long, value_delimiter = ',')]
        types: Option<Vec<String>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        max_partitions: Option<u64>,
    },
    /// Re-check a certificate against an instance.
    Verify {
        instance: String,
        certificate: PathBuf,
        /// Also check against MMS values for this demand vector
        /// (defaults to the one recorded in the certificate).
        #[arg(long, value_delimiter = ',')]
        d: Option<Vec<usize>>,
        #[arg(long)]
        max_partitions: Option<u64>,
    },
    /// Audit every agent's declared valuation class.
    CheckClass { instance: String },
    /// Rebuild and check the counterexample catalogue.
    Counterexamples {
        #[arg(long)]
        all: bool,
        /// Row keys to show when `--all` is absent.
        keys: Vec<String>,
    },
    /// Exhaustive search over complete assignments.
    Oracle {
        instance: String,
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        /// Thresholds as fractions of the MMS: one value or one per agent.
        #[arg(long, conflicts_with = "best_alpha")]
        alpha: Option<String>,
        /// Largest α attainable by every agent at once.
        #[arg(long)]
        best_alpha: bool,
        #[arg(long)]
        max_assignments: Option<u64>,
    },
    /// Write a builtin instance as a JSON file.
    Export {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random instance file.
    Random {
        /// `additive`, `xos`, `budget-additive` or `coverage`.
        #[arg(long)]
        class: String,
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        items: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

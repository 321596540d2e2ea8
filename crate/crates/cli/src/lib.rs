//! The `attrlens` command line: generate an attribute schema, review its
//! caption templates, annotate a corpus and write bias reports, all driven
//! by one TOML project file.

pub mod commands;
pub mod config;
pub mod error;
pub mod lock;
pub mod services;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::ProjectConfig;
pub use error::CliError;
use lock::ProjectLock;
use services::Services;

#[derive(Debug, Parser)]
#[command(name = "attrlens", version, about = "Attribute discovery and dataset bias reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Project file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Fixture file for `mock:fixtures` backends; overrides paths.mock_fixtures.
    #[arg(long)]
    pub mock_fixtures: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ask the chat backend for attribute categories and write the schema.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Number of categories (overrides domain.n_categories).
        #[arg(long)]
        n: Option<u32>,
        /// Attributes per category (overrides domain.m_attributes).
        #[arg(long)]
        m: Option<u32>,
    },
    /// Assign caption templates to categories and mark them reviewed.
    Review {
        #[command(flatten)]
        common: Common,
        /// CATEGORY=TEMPLATE, template one of is, has, with, in, from, identity.
        #[arg(long = "assign", value_name = "CATEGORY=TEMPLATE")]
        assign: Vec<String>,
        /// TOML table of category = "template" entries.
        #[arg(long)]
        assignments: Option<PathBuf>,
    },
    /// Annotate the corpus against the reviewed schema, resuming a partial store.
    Annotate {
        #[command(flatten)]
        common: Common,
        /// Detection threshold (overrides annotator.alpha).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Write CSV and Markdown reports.
    Report {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of histograms, crosstab, diff, auc, confusion, sweep.
        #[arg(long)]
        reports: Option<String>,
        /// Recall similarity threshold for the sweep (overrides recall.beta).
        #[arg(long)]
        beta: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Generate { common, .. }
            | Command::Review { common, .. }
            | Command::Annotate { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let config = ProjectConfig::load(&common.config)?;
    let _lock = ProjectLock::acquire(&config.root)?;
    let services = Services::new(&config, common.mock_fixtures.clone());
    let result = match &cli.command {
        Command::Generate { n, m, .. } => commands::generate(&config, &services, *n, *m),
        Command::Review { assign, assignments, .. } => {
            commands::review(&config, assignments.as_deref(), assign)
        }
        Command::Annotate { alpha, .. } => commands::annotate(&config, &services, *alpha),
        Command::Report { reports, beta, .. } => {
            let which = commands::requested_reports(&config, reports.as_deref())?;
            commands::report(&config, &services, &which, *beta)
        }
    };
    if let Some(calls) = services.fixture_calls() {
        log::info!("fixture backend answered {calls} requests");
    }
    result
}

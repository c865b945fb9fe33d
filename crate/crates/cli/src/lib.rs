//! Command-line front end: parse a JSON run config, run one pipeline
//! stage, write artifacts plus a manifest into the output directory.

pub mod config;
pub mod manifest;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use culture_class::evaluate::RunOptions;
use culture_class::export::to_json;

use config::{parse_config, Overrides, RunConfig};
use manifest::{hash_input, Manifest, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(culture_class::Error),
    #[error("pipeline error: {0}")]
    Pipeline(culture_class::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Pipeline(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Corpus statistics per source and year
    Stats,
    /// Cluster countries and label events
    Label,
    /// Labeling plus per-cluster category frequencies and shared categories
    Analyze,
    /// Fit features and models on the whole filtered corpus
    Train,
    /// Train on the split's train side and score the test side
    Evaluate,
    /// Feature-count sweep over models, n-gram kinds, ranges and top_k
    Sweep,
    /// Embedding features with and without the category one-hot
    CompareEmbeddings,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Label => "label",
            Command::Analyze => "analyze",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Sweep => "sweep",
            Command::CompareEmbeddings => "compare-embeddings",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "culture-class", version, about = "Cross-cultural news event classification")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides paths.output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Leave wall-clock times out of every output
    #[arg(long)]
    pub no_timestamps: bool,
}

/// Run one subcommand; returns the written files relative to the output
/// directory (manifest last).
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let overrides = Overrides {
        output: cli
            .out
            .as_ref()
            .map(|p| std::path::absolute(p).unwrap_or_else(|_| p.clone())),
        seed: cli.seed,
    };
    let cfg = parse_config(&cli.config, &overrides)?;
    run(cli.command, &cfg, !cli.no_timestamps)
}

pub fn run(command: Command, cfg: &RunConfig, timestamps: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.paths.output).map_err(|e| {
        CliError::Config(format!(
            "cannot create output directory {}: {e}",
            cfg.paths.output.display()
        ))
    })?;
    let mut inputs = vec![
        hash_input("events", &cfg.paths.events)?,
        hash_input("hofstede", &cfg.paths.hofstede)?,
    ];
    if let Some(p) = &cfg.paths.embeddings {
        inputs.push(hash_input("embeddings", p)?);
    }

    let mut out = OutputDir::new(cfg.paths.output.clone());
    let echo = to_json(cfg).map_err(CliError::Pipeline)?;
    out.write("config.json", echo.as_bytes())?;
    let options = RunOptions { timestamps };
    match command {
        Command::Stats => pipeline::stats(cfg, &mut out)?,
        Command::Label => pipeline::label(cfg, &mut out).map(drop)?,
        Command::Analyze => pipeline::analyze(cfg, &mut out)?,
        Command::Train => pipeline::train(cfg, &mut out)?,
        Command::Evaluate => pipeline::evaluate(cfg, &mut out, options)?,
        Command::Sweep => pipeline::sweep(cfg, &mut out)?,
        Command::CompareEmbeddings => pipeline::compare(cfg, &mut out, options)?,
    }
    let manifest = Manifest {
        tool: "culture-class",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: command.name().to_string(),
        seed: cfg.seed,
        config: PathBuf::from("config.json"),
        created_at: timestamps.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        inputs,
        outputs: Vec::new(),
    };
    Ok(out.finish(manifest)?.into_iter().map(|f| f.path).collect())
}

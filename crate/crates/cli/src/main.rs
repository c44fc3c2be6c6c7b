mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idextract_core::{ClockMode, DocFormat, IngestBackend, Paradigm};

use config::{AppConfig, GatewayKind};

/// Extract (name, ID number) pairs from documents and benchmark extraction
/// methods.
#[derive(Debug, Parser)]
#[command(name = "idextract", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalFlags {
    /// TOML config file; environment (IDEXTRACT_<KEY>) and flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Language-model backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<GatewayKind>,
    /// Base URL of an OpenAI-compatible chat completion server.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true)]
    model: Option<String>,
    /// Routing policy TOML file.
    #[arg(long, global = true)]
    policy: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_clock)]
    clock: Option<ClockMode>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output root; the corpus goes to <out>/corpus, reports to <out>/report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

fn parse_clock(s: &str) -> Result<ClockMode, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic corpus and its manifest.
    Generate {
        #[arg(long)]
        docs_per_format: Option<usize>,
        #[arg(long)]
        entries_min: Option<usize>,
        #[arg(long)]
        entries_max: Option<usize>,
        /// Comma-separated formats, e.g. docx,xlsx,pdf,transcript.
        #[arg(long, value_delimiter = ',')]
        formats: Option<Vec<DocFormat>>,
    },
    /// Route one document and print its pairs and stage timings as JSON.
    Extract {
        path: PathBuf,
        /// Force a paradigm instead of following the routing policy.
        #[arg(long)]
        paradigm: Option<Paradigm>,
        /// Force an ingest backend instead of following the routing policy.
        #[arg(long)]
        ingest: Option<IngestBackend>,
    },
    /// Run the method x format matrix over a generated corpus.
    Evaluate {
        /// Corpus directory (defaults to <out>/corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Check an ID number's length, digits and check character.
    ValidateId { id: String },
}

fn overlay(cfg: &mut AppConfig, g: GlobalFlags, command: &Command) {
    macro_rules! set {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                cfg.$field = v;
            }
        };
    }
    set!(seed, g.seed);
    set!(backend, g.backend);
    set!(model, g.model);
    set!(clock, g.clock);
    set!(workers, g.workers);
    set!(out, g.out);
    if g.endpoint.is_some() {
        cfg.endpoint = g.endpoint;
    }
    if g.policy.is_some() {
        cfg.policy = g.policy;
    }
    if let Command::Generate {
        docs_per_format,
        entries_min,
        entries_max,
        formats,
    } = command
    {
        set!(docs_per_format, *docs_per_format);
        set!(entries_min, *entries_min);
        set!(entries_max, *entries_max);
        set!(formats, formats.clone());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match AppConfig::load(cli.global.config.as_deref(), std::env::vars()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_io() {
                commands::EXIT_IO
            } else {
                commands::EXIT_CONFIG
            });
        }
    };
    overlay(&mut cfg, cli.global, &cli.command);
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(commands::EXIT_CONFIG);
    }
    eprintln!("# effective config\n{}", cfg.to_toml());
    match cli.command {
        Command::Generate { .. } => commands::generate(&cfg),
        Command::Extract {
            path,
            paradigm,
            ingest,
        } => commands::extract(&cfg, &path, paradigm, ingest),
        Command::Evaluate { corpus } => commands::evaluate(&cfg, corpus),
        Command::ValidateId { id } => commands::validate_id(&id),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repoecg::config::TOKEN_ENV;
use repoecg::{exit, Config, Error, Pipeline, Target};
use repoecg_core::stg::{StgError, Window};

/// Mine repositories, compute monthly sustainability metrics, and draw
/// STG waveforms.
///
/// Exit codes: 0 ok, 1 other error, 2 usage or config, 3 authentication,
/// 4 rate limit exhausted, 5 repository not found, 6 missing or incomplete
/// dump, 7 schema mismatch, 8 missing metrics, 9 too few projects to
/// compare, 10 single-class word corpus, 11 git, 12 network.
#[derive(Parser)]
#[command(name = "repoecg", version)]
struct Cli {
    /// Configuration file.
    #[arg(short, long, global = true, default_value = "repoecg.toml")]
    config: PathBuf,
    /// Label projects P1..Pn (config order) in every output.
    #[arg(long, global = true)]
    anonymize: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Select {
    /// Repository slug (owner/name) from the config.
    slug: Option<String>,
    /// Every configured project.
    #[arg(long)]
    all: bool,
}

impl Select {
    fn target(self) -> Target {
        match self.slug {
            Some(s) if !self.all => Target::One(s),
            _ => Target::All,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Fetch API records (and commits from a configured clone) into dumps.
    Mine(Select),
    /// Aggregate a dump into monthly.csv.
    Metrics(Select),
    /// Render STG SVGs from monthly.csv.
    Stg {
        #[command(flatten)]
        select: Select,
        /// Trailing months or `all`; repeatable. Defaults to 12, 36, 60, 120 and all.
        #[arg(long = "window", value_parser = parse_window)]
        windows: Vec<Window>,
    },
    /// Compare every configured project with metrics.
    Compare {
        /// Accepted for symmetry with the other commands; comparison always
        /// covers all projects.
        #[arg(long)]
        all: bool,
    },
    /// Fighting-words analysis of review comments.
    Words(Select),
}

fn parse_window(s: &str) -> Result<Window, String> {
    s.parse().map_err(|e: StgError| e.to_string())
}

fn run(cli: Cli) -> repoecg::Result<()> {
    let config = Config::load(&cli.config)?;
    let token = std::env::var(TOKEN_ENV).ok();
    let p = Pipeline::new(config, token, cli.anonymize);
    match cli.command {
        Cmd::Mine(s) => p.mine(&s.target()).map(drop),
        Cmd::Metrics(s) => p.metrics(&s.target()).map(drop),
        Cmd::Stg { select, windows } => p.stg(&select.target(), &windows).map(drop),
        Cmd::Compare { .. } => p.compare().map(drop),
        Cmd::Words(s) => p.words(&s.target()).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, Error::SingleClass(_)) {
                eprintln!("error: {e}");
            } else {
                eprintln!("warning: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

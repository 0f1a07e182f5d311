//! `andkit`: build, profile and benchmark author name disambiguation datasets.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{ConfigError, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "andkit", about = "Build and benchmark author name disambiguation datasets")]
struct Cli {
    /// TOML configuration file; defaults apply to anything it leaves out.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set model.forest.n_trees=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Shorthand for `--set seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shorthand for `--set out_dir=DIR`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads (0 uses every core). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic registry, corpus and ground truth to the input paths.
    Synth,
    /// Join registry claims to citations and locate each author in the byline.
    Link,
    /// Group linked claims into name blocks.
    BuildBlock,
    /// Drop blocks that hold a single registry author.
    Trim,
    /// Sample labelled claim pairs within each block.
    BuildPairwise,
    /// Assign blocks to train, validation and test folds.
    Split,
    /// Block structure and last-name variation profiles.
    Profile,
    /// Per-facet distributions of the dataset and the reference corpus.
    Report,
    /// Train the pairwise random forest on the training fold.
    Train,
    /// Choose the clustering threshold on the validation fold.
    Tune,
    /// Cluster the evaluation fold.
    Cluster,
    /// Score pairwise predictions and clusters on the evaluation fold.
    Evaluate,
    /// Score an external author ID assignment against the dataset.
    AuditIds,
    /// Run every stage from `link` to `evaluate`.
    Run,
    /// Print the effective configuration as TOML.
    Config,
}

/// Exit status by error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Internal = 1,
    Config = 2,
    Io = 3,
    Data = 4,
}

impl Category {
    fn label(self) -> &'static str {
        match self {
            Category::Internal => "internal",
            Category::Config => "config",
            Category::Io => "io",
            Category::Data => "data",
        }
    }
}

fn categorize(err: &anyhow::Error) -> Category {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return Category::Config;
        }
        if let Some(e) = cause.downcast_ref::<andkit_core::Error>() {
            return match e {
                andkit_core::Error::Io { .. } => Category::Io,
                andkit_core::Error::Format { .. } | andkit_core::Error::InvalidInput(_) => Category::Data,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return Category::Io;
        }
    }
    Category::Internal
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let mut overrides = cli.overrides;
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(dir) = cli.out_dir {
        overrides.push(format!("out_dir={}", toml::Value::String(dir.display().to_string())));
    }
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| ConfigError(format!("cannot start {} threads: {e}", cli.threads)))?;
    }
    match cli.command {
        Command::Synth => commands::synth(&cfg),
        Command::Link => commands::link(&cfg),
        Command::BuildBlock => commands::build_block(&cfg),
        Command::Trim => commands::trim(&cfg),
        Command::BuildPairwise => commands::build_pairwise(&cfg),
        Command::Split => commands::split_cmd(&cfg),
        Command::Profile => commands::profile(&cfg),
        Command::Report => commands::report(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Tune => commands::tune(&cfg),
        Command::Cluster => commands::cluster(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::AuditIds => commands::audit_ids(&cfg),
        Command::Run => commands::run_all(&cfg),
        Command::Config => {
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let version = format!(
        "{} (format version {})",
        env!("CARGO_PKG_VERSION"),
        andkit_core::FORMAT_VERSION
    );
    let matches = Cli::command().version(version.leak() as &str).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let cat = categorize(&err);
            // Some causes already print their source; skip repeats.
            let mut msg = err.to_string();
            for cause in err.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error[{}]: {msg}", cat.label());
            ExitCode::from(cat as u8)
        }
    }
}

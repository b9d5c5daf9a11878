use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use intensity_attn::cli::{self, ApplyArgs, FeaturizeInput};
use intensity_attn::run_config::RunConfig;

#[derive(Parser)]
#[command(
    name = "intensity",
    version,
    about = "Tweet emotion-intensity regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a run configuration and write the output directory.
    Train {
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Seed for initialization, shuffling and dropout.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override any configuration key, e.g. `--set hidden_size=50`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write the dataset with its intensity column replaced by predictions.
    Predict {
        #[command(flatten)]
        apply: ApplyOpts,
        /// Output TSV.
        #[arg(long)]
        output: PathBuf,
    },
    /// Print Pearson/Spearman metrics (all and gold >= 0.5) for a labeled dataset.
    Eval {
        #[command(flatten)]
        apply: ApplyOpts,
    },
    /// Print token-length and embedding-coverage statistics of a dataset.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        /// Also write a `key = value` report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export per-token attention weights as JSON lines.
    Attention {
        #[command(flatten)]
        apply: ApplyOpts,
        #[arg(long)]
        output: PathBuf,
        /// Also write `id,token,weight` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print `surface <TAB> pos <TAB> flags` for every token.
    Featurize {
        #[arg(long, conflicts_with = "text", required_unless_present = "text")]
        dataset: Option<PathBuf>,
        /// POS sidecar for --dataset.
        #[arg(long, requires = "dataset")]
        pos: Option<PathBuf>,
        /// Featurize a single piece of text instead of a dataset.
        #[arg(long)]
        text: Option<String>,
    },
}

#[derive(Args)]
struct ApplyOpts {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// POS sidecar (`id <TAB> tags`); placeholder tags when absent.
    #[arg(long)]
    pos: Option<PathBuf>,
    /// Embedding file; defaults to the path stored in the checkpoint.
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

impl From<ApplyOpts> for ApplyArgs {
    fn from(o: ApplyOpts) -> Self {
        ApplyArgs {
            checkpoint: o.checkpoint,
            dataset: o.dataset,
            pos: o.pos,
            embeddings: o.embeddings,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Train {
            config,
            seed,
            out_dir,
            overrides,
        } => {
            let mut cfg = RunConfig::from_file(&config)?;
            for o in &overrides {
                cfg.apply_override(o)?;
            }
            if let Some(seed) = seed {
                cfg.set_seed(seed);
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            cli::cmd_train(&cfg, &mut out)?;
        }
        Command::Predict { apply, output } => cli::cmd_predict(&apply.into(), &output, &mut out)?,
        Command::Eval { apply } => {
            cli::cmd_eval(&apply.into(), &mut out)?;
        }
        Command::Stats {
            dataset,
            embeddings,
            report,
        } => {
            cli::cmd_stats(&dataset, &embeddings, report.as_deref(), &mut out)?;
        }
        Command::Attention { apply, output, csv } => {
            cli::cmd_attention(&apply.into(), &output, csv.as_deref(), &mut out)?
        }
        Command::Featurize { dataset, pos, text } => {
            let input = match (dataset, text) {
                (Some(path), _) => FeaturizeInput::Dataset { path, pos },
                (None, Some(text)) => FeaturizeInput::Text(text),
                (None, None) => unreachable!("clap requires one of --dataset/--text"),
            };
            cli::cmd_featurize(&input, &mut out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line front end for the cross-domain translation pipeline.
//!
//! ```text
//! d2d ingest  --ratings-a a.dat --ratings-b b.dat --out data/
//! d2d train   --config run.toml [--seed N] [--variant V] [--loss L] [--out DIR]
//! d2d eval    --checkpoint ck.d2d --data dataset.txt [--k 10,20] [--split test]
//! d2d ablate  --config run.toml [--mode variants|losses] [--seed N]
//! d2d predict --checkpoint ck.d2d --direction a2b --items id1,id2 [--k N] [--full]
//! ```

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use d2d::cli::{
    cmd_ablate, cmd_eval, cmd_ingest, cmd_predict, cmd_train, AblateArgs, AblateMode, EvalArgs,
    IngestArgs, PredictArgs, SplitChoice, TrainArgs,
};
use d2d::data::RatingFormat;
use d2d::model::{Direction, ReconLossKind};
use d2d::training::Variant;

#[derive(Parser)]
#[command(name = "d2d", version, about = "Cross-domain recommendation via translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the dual-domain click cache from raw rating files
    Ingest(IngestCli),
    /// Train a translation model from a run config
    Train(TrainCli),
    /// Score a checkpoint's rankings in both directions
    Eval(EvalCli),
    /// Train and compare loss variants or reconstruction losses
    Ablate(AblateCli),
    /// Translate one user's click history across domains
    Predict(PredictCli),
}

#[derive(Args)]
struct IngestCli {
    /// Domain-A ratings file (two-file mode)
    #[arg(long)]
    ratings_a: Option<PathBuf>,
    /// Domain-B ratings file (two-file mode)
    #[arg(long)]
    ratings_b: Option<PathBuf>,
    /// Single ratings file to split by genre (genre mode)
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Movie metadata file with `id::title::genres` lines (genre mode)
    #[arg(long)]
    movies: Option<PathBuf>,
    /// Genre whose movies become domain A
    #[arg(long)]
    genre_a: Option<String>,
    /// Genre whose movies become domain B
    #[arg(long)]
    genre_b: Option<String>,
    /// Rating file layout: `movielens` (::-separated) or `csv`
    #[arg(long, default_value = "movielens")]
    format: String,
    /// Directory for the dataset cache and manifest
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainCli {
    /// Run config file
    #[arg(long)]
    config: PathBuf,
    /// Override the config's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the loss variant: full, vae_cc, vae_gan, vae
    #[arg(long)]
    variant: Option<String>,
    /// Override the reconstruction loss: multinomial, logistic, square, l1
    #[arg(long)]
    loss: Option<String>,
    /// Output directory (overrides the config's `output.dir`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCli {
    /// Checkpoint file written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset cache written by `ingest`
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated ranking cutoffs (default 10,20,30,40,50)
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// User subset to score: all, train, valid, test
    #[arg(long)]
    split: Option<String>,
    /// Run config supplying the split fractions and split seed
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for metrics.csv and the manifest
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateCli {
    /// Run config file
    #[arg(long)]
    config: PathBuf,
    /// Sweep axis: variants (default) or losses
    #[arg(long)]
    mode: Option<String>,
    /// Override the config's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config's `output.dir`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictCli {
    /// Checkpoint file written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// Translation direction: a2b (default) or b2a
    #[arg(long)]
    direction: Option<String>,
    /// Comma-separated item ids the user clicked in the source domain
    #[arg(long, value_delimiter = ',')]
    items: Vec<String>,
    /// How many recommendations to print (default 10)
    #[arg(long)]
    k: Option<usize>,
    /// Print a score for every target-domain item
    #[arg(long)]
    full: bool,
    /// Directory for predictions.tsv and the manifest
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(name: &str) -> d2d::Result<RatingFormat> {
    match name {
        "movielens" => Ok(RatingFormat::movielens()),
        "csv" => Ok(RatingFormat::csv()),
        other => Err(d2d::Error::Parse {
            location: "format".to_string(),
            message: format!("'{other}' is not one of movielens, csv"),
        }),
    }
}

fn run(cli: Cli) -> d2d::Result<()> {
    match cli.command {
        Command::Ingest(c) => {
            cmd_ingest(&IngestArgs {
                ratings_a: c.ratings_a,
                ratings_b: c.ratings_b,
                ratings: c.ratings,
                movies: c.movies,
                genre_a: c.genre_a,
                genre_b: c.genre_b,
                format: Some(parse_format(&c.format)?),
                out: c.out,
            })?;
        }
        Command::Train(c) => {
            cmd_train(&TrainArgs {
                config: c.config,
                seed: c.seed,
                variant: c.variant.as_deref().map(Variant::from_str).transpose()?,
                loss: c.loss.as_deref().map(ReconLossKind::from_str).transpose()?,
                out: c.out,
            })?;
        }
        Command::Eval(c) => {
            cmd_eval(&EvalArgs {
                checkpoint: c.checkpoint,
                data: c.data,
                k: c.k,
                split: c.split.as_deref().map(SplitChoice::from_str).transpose()?,
                config: c.config,
                out: c.out,
            })?;
        }
        Command::Ablate(c) => {
            cmd_ablate(&AblateArgs {
                config: c.config,
                mode: c.mode.as_deref().map(AblateMode::from_str).transpose()?,
                seed: c.seed,
                out: c.out,
            })?;
        }
        Command::Predict(c) => {
            cmd_predict(&PredictArgs {
                checkpoint: c.checkpoint,
                direction: c.direction.as_deref().map(Direction::from_str).transpose()?,
                items: c.items,
                k: c.k,
                full: c.full,
                out: c.out,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! The command surface behind the `d2d` binary: dataset ingestion, training,
//! evaluation, ablation, and per-user prediction, plus the on-disk formats
//! (run config, checkpoint, metric CSV, run manifests) they share.
//!
//! Each command is a plain function over a plain argument struct so the
//! pipeline is scriptable from tests and examples without spawning a
//! process; the binary is a thin argument-parsing wrapper around these.

mod checkpoint;
mod config;
mod report_csv;

pub use checkpoint::Checkpoint;
pub use config::{ArchSection, DataSection, OutputSection, ResolvedRun, RunConfig};
pub use report_csv::{ablation_to_csv, reports_from_csv, reports_to_csv};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::data::{
    binarize, build_dual_domain, dataset_stats, load_dataset, load_ratings_file, save_dataset,
    split_users, DatasetStats, DualDomainDataset, RatingFormat, SplitSpec,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate_direction, top_k, RankingReport, DEFAULT_K_VALUES};
use crate::model::{predict_cross, Direction, ReconLossKind};
use crate::training::{run_ablation, run_loss_sweep, train, AblationRow, Variant};

/// Which user subset of a cached dataset a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitChoice {
    All,
    Train,
    Valid,
    Test,
}

impl std::fmt::Display for SplitChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplitChoice::All => "all",
            SplitChoice::Train => "train",
            SplitChoice::Valid => "valid",
            SplitChoice::Test => "test",
        })
    }
}

impl std::str::FromStr for SplitChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SplitChoice::All),
            "train" => Ok(SplitChoice::Train),
            "valid" => Ok(SplitChoice::Valid),
            "test" => Ok(SplitChoice::Test),
            other => Err(Error::Parse {
                location: "split".to_string(),
                message: format!("'{other}' is not one of all, train, valid, test"),
            }),
        }
    }
}

/// Ablation sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblateMode {
    Variants,
    Losses,
}

impl std::str::FromStr for AblateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variants" => Ok(AblateMode::Variants),
            "losses" => Ok(AblateMode::Losses),
            other => Err(Error::Parse {
                location: "mode".to_string(),
                message: format!("'{other}' is not one of variants, losses"),
            }),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn file_fingerprint(path: &Path) -> Result<u64> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(fnv1a(&bytes))
}

/// Records what a command read, what it resolved its options to, and the
/// seed it used; equal manifests imply byte-identical output files.
fn write_manifest(
    dir: &Path,
    command: &str,
    inputs: &[(&str, &Path)],
    options: serde_json::Value,
    dataset_fingerprint: Option<u64>,
    seed: Option<u64>,
) -> Result<()> {
    let mut input_map = serde_json::Map::new();
    for (role, path) in inputs {
        input_map.insert(
            role.to_string(),
            json!({
                "path": path.display().to_string(),
                "fnv64": format!("{:016x}", file_fingerprint(path)?),
            }),
        );
    }
    let manifest = json!({
        "command": command,
        "inputs": input_map,
        "options": options,
        "dataset_fingerprint": dataset_fingerprint.map(|f| format!("{f:016x}")),
        "seed": seed,
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Data(format!("manifest serialization failed: {e}")))? + "\n";
    std::fs::write(dir.join("manifest.json"), text).map_err(Error::Io)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Data(format!("cannot create {}: {e}", dir.display())))
}

fn config_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

// ---------------------------------------------------------------------------
// ingest

#[derive(Debug, Clone, Default)]
pub struct IngestArgs {
    /// Two-file mode: one ratings file per domain.
    pub ratings_a: Option<PathBuf>,
    pub ratings_b: Option<PathBuf>,
    /// Genre mode: a single ratings file plus a movie-metadata file split
    /// into domains by genre membership.
    pub ratings: Option<PathBuf>,
    pub movies: Option<PathBuf>,
    pub genre_a: Option<String>,
    pub genre_b: Option<String>,
    pub format: Option<RatingFormat>,
    pub out: PathBuf,
}

/// Parses `MovieID::Title::Genres` lines (genres `|`-separated). Metadata
/// files in the wild are Latin-1; bytes outside UTF-8 only affect titles,
/// which we do not keep, so lossy decoding is safe.
fn parse_movies(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Data(format!("cannot open movies file {}: {e}", path.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                location: format!("{} line {}", path.display(), i + 1),
                message: format!("expected 3 '::'-separated fields, found {}", fields.len()),
            });
        }
        out.push((fields[0].to_string(), fields[2].split('|').map(str::to_string).collect()));
    }
    Ok(out)
}

/// Movies carrying exactly one of the two genres go to that genre's domain;
/// movies tagged with both are ambiguous and are excluded from both.
fn genre_partition(
    movies: &[(String, Vec<String>)],
    genre_a: &str,
    genre_b: &str,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut a = BTreeSet::new();
    let mut b = BTreeSet::new();
    for (id, genres) in movies {
        let in_a = genres.iter().any(|g| g == genre_a);
        let in_b = genres.iter().any(|g| g == genre_b);
        match (in_a, in_b) {
            (true, false) => {
                a.insert(id.clone());
            }
            (false, true) => {
                b.insert(id.clone());
            }
            _ => {}
        }
    }
    (a, b)
}

/// Builds the dual-domain dataset from raw rating files, writes the cache to
/// `<out>/dataset.txt`, prints the dataset statistics row, and returns it.
pub fn cmd_ingest(args: &IngestArgs) -> Result<DatasetStats> {
    let format = args.format.clone().unwrap_or_else(RatingFormat::movielens);
    let two_file = args.ratings_a.is_some() || args.ratings_b.is_some();
    let genre_mode = args.ratings.is_some()
        || args.movies.is_some()
        || args.genre_a.is_some()
        || args.genre_b.is_some();

    let (ds, inputs, options) = if two_file && !genre_mode {
        let (path_a, path_b) = match (&args.ratings_a, &args.ratings_b) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Config(vec![
                    "two-file mode needs both --ratings-a and --ratings-b".to_string(),
                ]))
            }
        };
        let clicks_a = binarize(&load_ratings_file(path_a, &format)?);
        let clicks_b = binarize(&load_ratings_file(path_b, &format)?);
        let ds = build_dual_domain(&clicks_a, &clicks_b)?;
        let inputs = vec![("ratings_a", path_a.as_path()), ("ratings_b", path_b.as_path())];
        (ds, inputs, json!({ "mode": "two_files", "delimiter": format.delimiter }))
    } else if genre_mode && !two_file {
        let (ratings, movies, genre_a, genre_b) =
            match (&args.ratings, &args.movies, &args.genre_a, &args.genre_b) {
                (Some(r), Some(m), Some(a), Some(b)) => (r, m, a, b),
                _ => {
                    return Err(Error::Config(vec![
                        "genre mode needs --ratings, --movies, --genre-a, and --genre-b"
                            .to_string(),
                    ]))
                }
            };
        let movie_list = parse_movies(movies)?;
        let (ids_a, ids_b) = genre_partition(&movie_list, genre_a, genre_b);
        if ids_a.is_empty() {
            return Err(Error::Data(format!("no movies matched genre '{genre_a}'")));
        }
        if ids_b.is_empty() {
            return Err(Error::Data(format!("no movies matched genre '{genre_b}'")));
        }
        let pairs = binarize(&load_ratings_file(ratings, &format)?);
        let clicks_a = pairs.iter().filter(|(_, i)| ids_a.contains(i)).cloned().collect();
        let clicks_b = pairs.iter().filter(|(_, i)| ids_b.contains(i)).cloned().collect();
        let ds = build_dual_domain(&clicks_a, &clicks_b)?;
        let inputs = vec![("ratings", ratings.as_path()), ("movies", movies.as_path())];
        let options = json!({
            "mode": "genre_split",
            "delimiter": format.delimiter,
            "genre_a": genre_a,
            "genre_b": genre_b,
        });
        (ds, inputs, options)
    } else {
        return Err(Error::Config(vec![
            "pass either --ratings-a/--ratings-b or --ratings/--movies/--genre-a/--genre-b"
                .to_string(),
        ]));
    };

    ensure_dir(&args.out)?;
    save_dataset(&ds, &args.out.join("dataset.txt"))?;
    write_manifest(&args.out, "ingest", &inputs, options, Some(ds.fingerprint()), None)?;
    let stats = dataset_stats(&ds);
    println!("{stats}");
    println!("wrote {}", args.out.join("dataset.txt").display());
    Ok(stats)
}

// ---------------------------------------------------------------------------
// train

#[derive(Debug, Clone, Default)]
pub struct TrainArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub variant: Option<Variant>,
    pub loss: Option<ReconLossKind>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub out_dir: PathBuf,
    pub checkpoint_path: PathBuf,
    pub best_epoch: Option<usize>,
    pub best_selection: Option<f64>,
}

fn load_run(
    config_path: &Path,
    seed: Option<u64>,
    variant: Option<Variant>,
    loss: Option<ReconLossKind>,
    out: Option<&Path>,
) -> Result<(RunConfig, DualDomainDataset, PathBuf, PathBuf, ResolvedRun)> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.train.seed = s;
    }
    if let Some(v) = variant {
        cfg.train.variant = v;
    }
    if let Some(l) = loss {
        cfg.hyper.recon_loss_kind = l;
    }
    let dir = config_dir(config_path);
    let cache = cfg.cache_path(&dir)?;
    let out_dir = cfg.out_dir(&dir, out)?;
    let ds = load_dataset(&cache)?;
    let resolved = cfg.resolve((ds.domain_a().n_items(), ds.domain_b().n_items()))?;
    Ok((cfg, ds, cache, out_dir, resolved))
}

/// Splits the cached dataset, trains with validation-based snapshot
/// selection, and writes `checkpoint.d2d`, `train-report.jsonl` (one JSON
/// record per epoch plus a summary line), and `manifest.json`.
pub fn cmd_train(args: &TrainArgs) -> Result<TrainOutcome> {
    let (_, ds, cache, out_dir, resolved) =
        load_run(&args.config, args.seed, args.variant, args.loss, args.out.as_deref())?;
    let (ds_train, ds_valid, _) = split_users(&ds, &resolved.split)?;
    let (params, report) = train(&ds_train, &ds_valid, &resolved.arch, &resolved.hyper, &resolved.train)?;

    ensure_dir(&out_dir)?;
    let checkpoint_path = out_dir.join("checkpoint.d2d");
    Checkpoint {
        params,
        hyper: resolved.hyper,
        seed: resolved.train.seed,
        dataset_fingerprint: ds.fingerprint(),
        item_index_a: ds.domain_a().item_index().to_vec(),
        item_index_b: ds.domain_b().item_index().to_vec(),
    }
    .save(&checkpoint_path)?;

    let mut lines = String::new();
    for record in &report.epochs {
        lines += &serde_json::to_string(record)
            .map_err(|e| Error::Data(format!("report serialization failed: {e}")))?;
        lines.push('\n');
    }
    lines += &serde_json::to_string(&json!({
        "best_epoch": report.best_epoch,
        "epochs_run": report.epochs.len(),
    }))
    .map_err(|e| Error::Data(format!("report serialization failed: {e}")))?;
    lines.push('\n');
    std::fs::write(out_dir.join("train-report.jsonl"), lines).map_err(Error::Io)?;

    write_manifest(
        &out_dir,
        "train",
        &[("cache", cache.as_path())],
        serde_json::to_value(&resolved)
            .map_err(|e| Error::Data(format!("manifest serialization failed: {e}")))?,
        Some(ds.fingerprint()),
        Some(resolved.train.seed),
    )?;

    match report.best_epoch {
        Some(e) => println!(
            "trained {} epochs in {:.1}s; best epoch {e} with mean validation recall@{} {:.4}",
            report.epochs.len(),
            report.wall_time_secs,
            resolved.train.eval_k_for_selection,
            report.epochs[e].selection,
        ),
        None => println!("no epochs ran; checkpoint holds the initialized parameters"),
    }
    println!("wrote {}", checkpoint_path.display());
    Ok(TrainOutcome {
        out_dir,
        checkpoint_path,
        best_epoch: report.best_epoch,
        best_selection: report.best_selection(),
    })
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Clone, Default)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub data: PathBuf,
    /// Cutoffs; defaults to {10, 20, 30, 40, 50}.
    pub k: Option<Vec<usize>>,
    /// Which split of the cache to score; `All` uses every user.
    pub split: Option<SplitChoice>,
    /// Optional run config supplying the split fractions and seed; without
    /// it the standard 70/5/25 split with seed 0 applies.
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Scores both translation directions and prints the metric CSV; with
/// `--out`, also writes `metrics.csv` and a manifest.
pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<RankingReport>> {
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let ds = load_dataset(&args.data)?;
    for warning in ckpt.check_dataset(&ds)? {
        eprintln!("warning: {warning}");
    }

    let split_spec = match &args.config {
        Some(path) => RunConfig::load(path)?.split,
        None => SplitSpec::default(),
    };
    let choice = args.split.unwrap_or(SplitChoice::All);
    let subset = match choice {
        SplitChoice::All => ds.clone(),
        _ => {
            let (tr, va, te) = split_users(&ds, &split_spec)?;
            match choice {
                SplitChoice::Train => tr,
                SplitChoice::Valid => va,
                _ => te,
            }
        }
    };

    let k_values = args.k.clone().unwrap_or_else(|| DEFAULT_K_VALUES.to_vec());
    let reports: Vec<RankingReport> = Direction::BOTH
        .iter()
        .map(|&dir| {
            evaluate_direction(&ckpt.params, &subset, dir, &k_values, ckpt.hyper.recon_loss_kind)
        })
        .collect::<Result<_>>()?;

    let csv = reports_to_csv(&reports);
    print!("{csv}");
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        std::fs::write(out.join("metrics.csv"), &csv).map_err(Error::Io)?;
        write_manifest(
            out,
            "eval",
            &[("checkpoint", args.checkpoint.as_path()), ("cache", args.data.as_path())],
            json!({ "k": k_values, "split": choice.to_string() }),
            Some(ds.fingerprint()),
            None,
        )?;
    }
    Ok(reports)
}

// ---------------------------------------------------------------------------
// ablate

#[derive(Debug, Clone, Default)]
pub struct AblateArgs {
    pub config: PathBuf,
    pub mode: Option<AblateMode>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Trains the comparison matrix — loss variants or reconstruction-loss
/// kinds — with a shared seed, evaluates every run on the test split, and
/// writes `ablation.csv`.
pub fn cmd_ablate(args: &AblateArgs) -> Result<Vec<AblationRow>> {
    let (_, ds, cache, out_dir, resolved) =
        load_run(&args.config, args.seed, None, None, args.out.as_deref())?;
    let (ds_train, ds_valid, ds_test) = split_users(&ds, &resolved.split)?;
    let mode = args.mode.unwrap_or(AblateMode::Variants);
    let rows = match mode {
        AblateMode::Variants => run_ablation(
            &ds_train, &ds_valid, &ds_test, &resolved.arch, &resolved.hyper, &resolved.train,
        )?,
        AblateMode::Losses => run_loss_sweep(
            &ds_train, &ds_valid, &ds_test, &resolved.arch, &resolved.hyper, &resolved.train,
        )?,
    };

    let csv = ablation_to_csv(&rows);
    print!("{csv}");
    ensure_dir(&out_dir)?;
    std::fs::write(out_dir.join("ablation.csv"), &csv).map_err(Error::Io)?;
    write_manifest(
        &out_dir,
        "ablate",
        &[("cache", cache.as_path())],
        json!({
            "mode": match mode { AblateMode::Variants => "variants", AblateMode::Losses => "losses" },
            "run": serde_json::to_value(&resolved)
                .map_err(|e| Error::Data(format!("manifest serialization failed: {e}")))?,
        }),
        Some(ds.fingerprint()),
        Some(resolved.train.seed),
    )?;
    Ok(rows)
}

// ---------------------------------------------------------------------------
// predict

#[derive(Debug, Clone, Default)]
pub struct PredictArgs {
    pub checkpoint: PathBuf,
    pub direction: Option<Direction>,
    /// Item ids the user clicked in the source domain.
    pub items: Vec<String>,
    /// How many recommendations to print (ignored with `full`).
    pub k: Option<usize>,
    /// Dump scores for the whole target catalog instead of the top K.
    pub full: bool,
    pub out: Option<PathBuf>,
}

/// Translates one user's click history across domains and prints ranked
/// `item_id<TAB>score` lines, best first.
pub fn cmd_predict(args: &PredictArgs) -> Result<Vec<(String, f64)>> {
    if args.items.is_empty() {
        return Err(Error::Data("empty source history: pass at least one --items id".to_string()));
    }
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let direction = args.direction.unwrap_or(Direction::AToB);
    let (source_index, target_index) = match direction {
        Direction::AToB => (&ckpt.item_index_a, &ckpt.item_index_b),
        Direction::BToA => (&ckpt.item_index_b, &ckpt.item_index_a),
    };

    let mut x = crate::numeric::Matrix::zeros(1, source_index.len());
    let mut unknown = Vec::new();
    for id in &args.items {
        // item indices are stored sorted, so membership is a binary search
        match source_index.binary_search(id) {
            Ok(pos) => x.set(0, pos, 1.0),
            Err(_) => unknown.push(id.as_str()),
        }
    }
    if !unknown.is_empty() {
        return Err(Error::Data(format!(
            "unknown item ids in domain {}: {}",
            direction.src(),
            unknown.join(", ")
        )));
    }

    let scores = predict_cross(&ckpt.params, direction.src(), &x, ckpt.hyper.recon_loss_kind)?;
    let row = scores.row(0);
    let count = if args.full { row.len() } else { args.k.unwrap_or(10) };
    let ranked: Vec<(String, f64)> = top_k(row, count)
        .into_iter()
        .map(|i| (target_index[i].clone(), row[i]))
        .collect();

    let mut text = String::new();
    for (id, score) in &ranked {
        text.push_str(&format!("{id}\t{score:.12}\n"));
    }
    print!("{text}");
    if let Some(out) = &args.out {
        ensure_dir(out)?;
        std::fs::write(out.join("predictions.tsv"), &text).map_err(Error::Io)?;
        write_manifest(
            out,
            "predict",
            &[("checkpoint", args.checkpoint.as_path())],
            json!({
                "direction": direction.to_string(),
                "items": args.items,
                "k": count,
                "full": args.full,
            }),
            Some(ckpt.dataset_fingerprint),
            Some(ckpt.seed),
        )?;
    }
    Ok(ranked)
}

//! Minibatch min-max training: alternating discriminator and
//! encoder/generator updates, validation-driven snapshot selection, early
//! stopping, and the ablation matrix over loss variants.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::DualDomainDataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate_direction, RankingReport, DEFAULT_K_VALUES};
use crate::model::{
    gan_losses, total_objective, ArchSpec, D2DParams, Direction, HyperParams, LossBreakdown,
    ReconLossKind,
};
use crate::numeric::{optimizer_step, AdamConfig, SeededRng};

/// Which loss terms participate in training. All variants keep the two
/// variational autoencoders (and their weight sharing); the reduced ones
/// drop the adversarial stream, the cycle stream, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// VAE + cycle-consistency (no adversarial stream).
    VaeCc,
    /// VAE + adversarial stream (no cycle-consistency).
    VaeGan,
    /// VAEs alone.
    Vae,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::VaeCc, Variant::VaeGan, Variant::Vae];
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::VaeCc => "vae_cc",
            Variant::VaeGan => "vae_gan",
            Variant::Vae => "vae",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "vae_cc" => Ok(Variant::VaeCc),
            "vae_gan" => Ok(Variant::VaeGan),
            "vae" => Ok(Variant::Vae),
            other => Err(Error::Parse {
                location: "variant".to_string(),
                message: format!("'{other}' is not one of full, vae_cc, vae_gan, vae"),
            }),
        }
    }
}

/// How the two directions' validation Recall@K values combine into the
/// scalar that picks snapshots (and probe winners under multi-start).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    /// Mean of both directions; favors overall ranking quality.
    MeanRecall,
    /// Worse of the two directions; favors balanced translation, guarding
    /// against runs where only one direction aligns.
    MinRecall,
}

impl SelectionMetric {
    pub fn combine(self, recall_a2b: f64, recall_b2a: f64) -> f64 {
        match self {
            SelectionMetric::MeanRecall => (recall_a2b + recall_b2a) / 2.0,
            SelectionMetric::MinRecall => recall_a2b.min(recall_b2a),
        }
    }
}

impl std::fmt::Display for SelectionMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SelectionMetric::MeanRecall => "mean_recall",
            SelectionMetric::MinRecall => "min_recall",
        })
    }
}

impl std::str::FromStr for SelectionMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_recall" => Ok(SelectionMetric::MeanRecall),
            "min_recall" => Ok(SelectionMetric::MinRecall),
            other => Err(Error::Parse {
                location: "selection_metric".to_string(),
                message: format!("'{other}' is not one of mean_recall, min_recall"),
            }),
        }
    }
}

/// Zeroes the loss weights a variant drops; `full` is the identity.
pub fn apply_variant(hyper: &HyperParams, variant: Variant) -> HyperParams {
    let mut h = *hyper;
    match variant {
        Variant::Full => {}
        Variant::VaeCc => h.lambda0 = 0.0,
        Variant::VaeGan => {
            h.lambda3 = 0.0;
            h.lambda4 = 0.0;
        }
        Variant::Vae => {
            h.lambda0 = 0.0;
            h.lambda3 = 0.0;
            h.lambda4 = 0.0;
        }
    }
    h
}

/// Knobs of the optimization loop itself (loss weights live in
/// [`HyperParams`], network shape in [`ArchSpec`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_encgen: f64,
    pub lr_disc: f64,
    pub disc_steps_per_gen_step: usize,
    /// Input dropout rate; 0 disables. Helps on very sparse catalogs.
    pub dropout_rate: f64,
    pub seed: u64,
    pub variant: Variant,
    /// Epochs without validation improvement before stopping.
    pub early_stop_patience: usize,
    /// The K whose validation Recall selects the snapshot.
    pub eval_k_for_selection: usize,
    /// How the two directions' Recall@`eval_k_for_selection` combine.
    pub selection_metric: SelectionMetric,
    /// Independent restarts probed before the full run. The adversarial
    /// translation objective has several basins — one per way of matching
    /// the domains' latent regions — and which one a run falls into is
    /// decided by its seed early in training. Values above 1 train each
    /// restart for `probe_epochs`, then rerun the restart with the best
    /// validation selection for the full `epochs` budget. 1 disables
    /// probing.
    pub n_restarts: usize,
    /// Probe length per restart; ignored when `n_restarts` is 1.
    pub probe_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 128,
            lr_encgen: 1e-3,
            lr_disc: 1e-3,
            disc_steps_per_gen_step: 1,
            dropout_rate: 0.0,
            seed: 0,
            variant: Variant::Full,
            early_stop_patience: 20,
            eval_k_for_selection: 50,
            selection_metric: SelectionMetric::MeanRecall,
            n_restarts: 1,
            probe_epochs: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.batch_size == 0 {
            problems.push("batch_size must be at least 1".to_string());
        }
        if !(self.lr_encgen > 0.0) {
            problems.push(format!("lr_encgen must be positive, got {}", self.lr_encgen));
        }
        if !(self.lr_disc > 0.0) {
            problems.push(format!("lr_disc must be positive, got {}", self.lr_disc));
        }
        if self.disc_steps_per_gen_step == 0 {
            problems.push("disc_steps_per_gen_step must be at least 1".to_string());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            problems.push(format!("dropout_rate must be in [0, 1), got {}", self.dropout_rate));
        }
        if self.early_stop_patience == 0 {
            problems.push("early_stop_patience must be at least 1".to_string());
        }
        if self.eval_k_for_selection == 0 {
            problems.push("eval_k_for_selection must be at least 1".to_string());
        }
        if self.n_restarts == 0 {
            problems.push("n_restarts must be at least 1".to_string());
        }
        if self.n_restarts > 1 && self.probe_epochs == 0 {
            problems.push("probe_epochs must be at least 1 when n_restarts exceeds 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// One epoch's training losses (mean over batches) and validation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: LossBreakdown,
    pub valid_recall_a2b: f64,
    pub valid_recall_b2a: f64,
    pub valid_ndcg_a2b: f64,
    pub valid_ndcg_b2a: f64,
    /// The two directions' Recall at the selection K, combined per the
    /// configured [`SelectionMetric`].
    pub selection: f64,
}

/// Full history of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose snapshot was returned; `None` when no epoch ran.
    pub best_epoch: Option<usize>,
    /// Best validation selection each restart reached during its probe;
    /// empty for single-start runs. `epochs` holds only the winner's full
    /// run.
    #[serde(default)]
    pub probe_selections: Vec<f64>,
    /// Wall-clock seconds; excluded from serialization so that artifacts
    /// from identical runs stay byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrainReport {
    pub fn best_selection(&self) -> Option<f64> {
        self.best_epoch.map(|e| self.epochs[e].selection)
    }

    /// Index of the restart whose probe won (first on ties); `None` for
    /// single-start runs.
    pub fn chosen_restart(&self) -> Option<usize> {
        let mut winner = None;
        for (r, &s) in self.probe_selections.iter().enumerate() {
            if winner.map_or(true, |(_, best): (usize, f64)| s > best) {
                winner = Some((r, s));
            }
        }
        winner.map(|(r, _)| r)
    }
}

fn check_dims(ds: &DualDomainDataset, arch: &ArchSpec, what: &str) -> Result<()> {
    let got = (ds.domain_a().n_items(), ds.domain_b().n_items());
    if got != arch.input_dims {
        return Err(Error::Config(vec![format!(
            "{what} has item counts {got:?} but the architecture expects {:?}",
            arch.input_dims
        )]));
    }
    Ok(())
}

fn scale_breakdown(sum: LossBreakdown, n: usize) -> LossBreakdown {
    let s = 1.0 / n.max(1) as f64;
    LossBreakdown {
        vae_a: sum.vae_a * s,
        vae_b: sum.vae_b * s,
        gan_a: sum.gan_a * s,
        gan_b: sum.gan_b * s,
        cc_a: sum.cc_a * s,
        cc_b: sum.cc_b * s,
        total_encgen: sum.total_encgen * s,
        total_disc: sum.total_disc * s,
    }
}

fn add_breakdown(acc: &mut LossBreakdown, b: &LossBreakdown) {
    acc.vae_a += b.vae_a;
    acc.vae_b += b.vae_b;
    acc.gan_a += b.gan_a;
    acc.gan_b += b.gan_b;
    acc.cc_a += b.cc_a;
    acc.cc_b += b.cc_b;
    acc.total_encgen += b.total_encgen;
    acc.total_disc += b.total_disc;
}

/// Trains on `ds_train`, selecting the parameter snapshot with the best
/// validation Recall@`eval_k_for_selection` (both directions combined per
/// `selection_metric`).
///
/// Each minibatch pairs the same users' rows from both domains. Per batch:
/// first `disc_steps_per_gen_step` discriminator updates on both translation
/// streams (skipped when the variant zeroes the adversarial weight), then
/// one encoder/generator update on the joint objective. Stops early after
/// `early_stop_patience` epochs without improvement.
///
/// With `n_restarts > 1`, each restart seed first trains for `probe_epochs`
/// and the best-probing restart is rerun for the full budget; everything is
/// a pure function of `cfg.seed`, so repeated calls stay bit-identical.
pub fn train(
    ds_train: &DualDomainDataset,
    ds_valid: &DualDomainDataset,
    arch: &ArchSpec,
    hyper: &HyperParams,
    cfg: &TrainConfig,
) -> Result<(D2DParams, TrainReport)> {
    arch.validate()?;
    hyper.validate()?;
    cfg.validate()?;
    check_dims(ds_train, arch, "training split")?;
    check_dims(ds_valid, arch, "validation split")?;
    if ds_train.domain_a().item_index() != ds_valid.domain_a().item_index()
        || ds_train.domain_b().item_index() != ds_valid.domain_b().item_index()
    {
        return Err(Error::Data(
            "training and validation splits index different items".to_string(),
        ));
    }
    if cfg.n_restarts <= 1 {
        return train_single(ds_train, ds_valid, arch, hyper, cfg);
    }

    let started = Instant::now();
    let mut probes = Vec::with_capacity(cfg.n_restarts);
    for restart in 0..cfg.n_restarts {
        let probe_cfg = TrainConfig {
            epochs: cfg.probe_epochs,
            seed: restart_seed(cfg.seed, restart),
            ..*cfg
        };
        let (_, probe) = train_single(ds_train, ds_valid, arch, hyper, &probe_cfg)?;
        probes.push(probe.best_selection().unwrap_or(f64::NEG_INFINITY));
    }
    let winner = probes
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (r, &s)| if s > acc.1 { (r, s) } else { acc })
        .0;
    let full_cfg = TrainConfig { seed: restart_seed(cfg.seed, winner), ..*cfg };
    let (params, mut report) = train_single(ds_train, ds_valid, arch, hyper, &full_cfg)?;
    report.probe_selections = probes;
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((params, report))
}

/// The seed a restart trains under; restart 0 keeps the configured seed.
fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn train_single(
    ds_train: &DualDomainDataset,
    ds_valid: &DualDomainDataset,
    arch: &ArchSpec,
    hyper: &HyperParams,
    cfg: &TrainConfig,
) -> Result<(D2DParams, TrainReport)> {
    let started = Instant::now();
    let hyper = apply_variant(hyper, cfg.variant);
    let kind = hyper.recon_loss_kind;
    let mut rng = SeededRng::new(cfg.seed);
    let mut params = D2DParams::init(arch, &mut rng)?;
    let encgen_ix = params.encgen_indices();
    let disc_ix = params.disc_indices();
    let adam_encgen = AdamConfig::with_lr(cfg.lr_encgen);
    let adam_disc = AdamConfig::with_lr(cfg.lr_disc);

    let mut best = params.clone();
    let mut best_metric = f64::NEG_INFINITY;
    let mut best_epoch = None;
    let mut stale_epochs = 0;
    let mut history = Vec::new();
    let n_users = ds_train.users().len();
    let selection_k = [cfg.eval_k_for_selection];

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n_users).collect();
        rng.shuffle(&mut order);
        let mut loss_sum = LossBreakdown::default();
        let mut n_batches = 0;

        for (batch_no, batch) in order.chunks(cfg.batch_size).enumerate() {
            let at = |e: Error| {
                Error::NonFinite(format!("epoch {epoch}, batch {batch_no}: {e}"))
            };
            let x_a = ds_train.domain_a().dense_rows(batch);
            let x_b = ds_train.domain_b().dense_rows(batch);

            if hyper.lambda0 > 0.0 {
                for _ in 0..cfg.disc_steps_per_gen_step {
                    gan_losses(
                        &mut params, Direction::BToA, &x_b, &x_a, &hyper, &mut rng,
                        cfg.dropout_rate, true, false,
                    )?;
                    gan_losses(
                        &mut params, Direction::AToB, &x_a, &x_b, &hyper, &mut rng,
                        cfg.dropout_rate, true, false,
                    )?;
                    optimizer_step(params.blocks_mut(), &disc_ix, &adam_disc).map_err(at)?;
                }
            }

            let breakdown = total_objective(
                &mut params, &x_a, &x_b, &hyper, &mut rng, cfg.dropout_rate, true,
            )?;
            if !breakdown.is_finite() {
                return Err(at(Error::NonFinite("loss diverged".to_string())));
            }
            optimizer_step(params.blocks_mut(), &encgen_ix, &adam_encgen).map_err(at)?;
            add_breakdown(&mut loss_sum, &breakdown);
            n_batches += 1;
        }

        let a2b = evaluate_direction(&params, ds_valid, Direction::AToB, &selection_k, kind)?;
        let b2a = evaluate_direction(&params, ds_valid, Direction::BToA, &selection_k, kind)?;
        let selection = cfg.selection_metric.combine(a2b.recall[0], b2a.recall[0]);
        history.push(EpochRecord {
            epoch,
            train_loss: scale_breakdown(loss_sum, n_batches),
            valid_recall_a2b: a2b.recall[0],
            valid_recall_b2a: b2a.recall[0],
            valid_ndcg_a2b: a2b.ndcg[0],
            valid_ndcg_b2a: b2a.ndcg[0],
            selection,
        });

        if selection > best_metric {
            best_metric = selection;
            best = params.clone();
            best_epoch = Some(epoch);
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= cfg.early_stop_patience {
                break;
            }
        }
    }

    let report = TrainReport {
        epochs: history,
        best_epoch,
        probe_selections: Vec::new(),
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok((best, report))
}

/// One trained configuration's test-set metrics in a comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationRow {
    /// Variant or reconstruction-loss name this row was trained with.
    pub label: String,
    pub report: RankingReport,
}

fn test_rows(
    label: &str,
    params: &D2DParams,
    ds_test: &DualDomainDataset,
    kind: ReconLossKind,
) -> Result<Vec<AblationRow>> {
    Direction::BOTH
        .iter()
        .map(|&dir| {
            let report = evaluate_direction(params, ds_test, dir, &DEFAULT_K_VALUES, kind)?;
            Ok(AblationRow { label: label.to_string(), report })
        })
        .collect()
}

/// Trains all four loss variants with identical seed and architecture and
/// evaluates each on the test split (two rows per variant, one per
/// direction).
pub fn run_ablation(
    ds_train: &DualDomainDataset,
    ds_valid: &DualDomainDataset,
    ds_test: &DualDomainDataset,
    arch: &ArchSpec,
    hyper: &HyperParams,
    cfg: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for variant in Variant::ALL {
        let run_cfg = TrainConfig { variant, ..*cfg };
        let (params, _) = train(ds_train, ds_valid, arch, hyper, &run_cfg)?;
        rows.extend(test_rows(&variant.to_string(), &params, ds_test, hyper.recon_loss_kind)?);
    }
    Ok(rows)
}

/// Trains one run per reconstruction-loss family (variant and seed fixed)
/// and evaluates each on the test split.
pub fn run_loss_sweep(
    ds_train: &DualDomainDataset,
    ds_valid: &DualDomainDataset,
    ds_test: &DualDomainDataset,
    arch: &ArchSpec,
    hyper: &HyperParams,
    cfg: &TrainConfig,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for kind in ReconLossKind::ALL {
        let run_hyper = HyperParams { recon_loss_kind: kind, ..*hyper };
        let (params, _) = train(ds_train, ds_valid, arch, &run_hyper, cfg)?;
        rows.extend(test_rows(&kind.to_string(), &params, ds_test, kind)?);
    }
    Ok(rows)
}

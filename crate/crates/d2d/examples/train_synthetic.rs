//! Trains the full model on a synthetic clustered dataset and compares its
//! ranking quality against the popularity baseline.
//!
//! ```sh
//! cargo run --release --example train_synthetic
//! ```

use d2d::data::{split_users, synthetic_clusters, SplitSpec, SyntheticSpec};
use d2d::eval::{evaluate_direction, popularity_scores, report_from_scores, DEFAULT_K_VALUES};
use d2d::model::{ArchSpec, Direction, HyperParams};
use d2d::training::{train, TrainConfig};

fn main() -> d2d::Result<()> {
    // five hundred users in four taste clusters, fifty items per domain
    let ds = synthetic_clusters(&SyntheticSpec {
        n_users: 500,
        n_clusters: 4,
        n_items_a: 50,
        n_items_b: 50,
        clicks_per_user: 10,
        click_step: 0,
        noise: 0.1,
        cluster_skew: 0.0,
        seed: 1,
    });
    let (ds_train, ds_valid, ds_test) = split_users(&ds, &SplitSpec::default())?;
    println!(
        "users: {} train / {} valid / {} test\n",
        ds_train.n_users(),
        ds_valid.n_users(),
        ds_test.n_users()
    );

    let arch = ArchSpec::small(50, 50);
    let hyper = HyperParams::default();
    // translation structure emerges slowly on this task; disable early
    // stopping and let the validation snapshot pick the best epoch
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 50,
        eval_k_for_selection: 10,
        early_stop_patience: 200,
        ..TrainConfig::default()
    };
    let (params, report) = train(&ds_train, &ds_valid, &arch, &hyper, &cfg)?;

    println!("{:>5}  {:>10}  {:>12}  {:>12}", "epoch", "train loss", "recall a2b", "recall b2a");
    for r in report.epochs.iter().step_by(20) {
        println!(
            "{:>5}  {:>10.3}  {:>12.4}  {:>12.4}",
            r.epoch, r.train_loss.total_encgen, r.valid_recall_a2b, r.valid_recall_b2a
        );
    }
    if let Some(best) = report.best_epoch {
        println!("\nbest epoch {best} (mean validation recall@{})", cfg.eval_k_for_selection);
    }

    let k_values = DEFAULT_K_VALUES.to_vec();
    println!("\n{:>9}  {:>4}  {:>14}  {:>14}", "direction", "K", "model recall", "popularity");
    for direction in Direction::BOTH {
        let model = evaluate_direction(&params, &ds_test, direction, &k_values, hyper.recon_loss_kind)?;
        let target = match direction {
            Direction::AToB => (ds_train.domain_b(), ds_test.domain_b()),
            Direction::BToA => (ds_train.domain_a(), ds_test.domain_a()),
        };
        let pop_scores = popularity_scores(target.0, ds_test.n_users());
        let pop = report_from_scores(direction, &pop_scores, target.1, &k_values);
        for (i, &k) in k_values.iter().enumerate() {
            println!(
                "{:>9}  {k:>4}  {:>14.4}  {:>14.4}",
                direction.to_string(),
                model.recall[i],
                pop.recall[i]
            );
        }
    }
    Ok(())
}

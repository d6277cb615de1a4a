//! Reruns training with each adversarial / cycle-consistency term removed
//! and prints the resulting test metrics side by side, then does the same
//! across the four reconstruction losses.
//!
//! ```sh
//! cargo run --release --example ablation_study
//! ```

use d2d::data::{split_users, synthetic_clusters, SplitSpec, SyntheticSpec};
use d2d::model::{ArchSpec, HyperParams};
use d2d::training::{run_ablation, run_loss_sweep, TrainConfig};

fn main() -> d2d::Result<()> {
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

    let arch = ArchSpec::small(50, 50);
    let hyper = HyperParams::default();
    // adversarial training pays off late on this task; give every variant
    // the full epoch budget so the comparison is fair
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 50,
        eval_k_for_selection: 10,
        early_stop_patience: 200,
        ..TrainConfig::default()
    };

    println!("== loss-term ablation (recall@10 on the test split) ==");
    println!("{:>10}  {:>9}  {:>10}  {:>10}", "variant", "direction", "recall@10", "ndcg@10");
    for row in run_ablation(&ds_train, &ds_valid, &ds_test, &arch, &hyper, &cfg)? {
        println!(
            "{:>10}  {:>9}  {:>10.4}  {:>10.4}",
            row.label,
            row.report.direction.to_string(),
            row.report.recall_at(10).unwrap(),
            row.report.ndcg_at(10).unwrap(),
        );
    }

    println!("\n== reconstruction-loss sweep ==");
    println!("{:>12}  {:>9}  {:>10}  {:>10}", "recon loss", "direction", "recall@10", "ndcg@10");
    for row in run_loss_sweep(&ds_train, &ds_valid, &ds_test, &arch, &hyper, &cfg)? {
        println!(
            "{:>12}  {:>9}  {:>10.4}  {:>10.4}",
            row.label,
            row.report.direction.to_string(),
            row.report.recall_at(10).unwrap(),
            row.report.ndcg_at(10).unwrap(),
        );
    }
    Ok(())
}

//! Ranking metrics for cross-domain recommendation: Recall@K and NDCG@K per
//! translation direction, averaged uniformly over test users.
//!
//! Because the two domains' item sets are disjoint, there is no seen-item
//! masking: every target-domain item is a candidate, and the ground truth
//! for a user is their full click set in the target domain.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::data::{ClickMatrix, DualDomainDataset};
use crate::error::Result;
use crate::model::{predict_cross, D2DParams, Direction, ReconLossKind};
use crate::numeric::Matrix;

/// Default cutoff grid for metric curves.
pub const DEFAULT_K_VALUES: [usize; 5] = [10, 20, 30, 40, 50];

/// Averaged ranking metrics for one translation direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub direction: Direction,
    pub k_values: Vec<usize>,
    /// Mean Recall@K per entry of `k_values`.
    pub recall: Vec<f64>,
    /// Mean NDCG@K per entry of `k_values`.
    pub ndcg: Vec<f64>,
    /// Number of users averaged over.
    pub n_users: usize,
}

impl RankingReport {
    /// Metric value for a specific K, if it was evaluated.
    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.k_values.iter().position(|&kv| kv == k).map(|i| self.recall[i])
    }

    pub fn ndcg_at(&self, k: usize) -> Option<f64> {
        self.k_values.iter().position(|&kv| kv == k).map(|i| self.ndcg[i])
    }
}

/// Indices of the `k` largest scores, descending; numerically equal scores
/// (including -0.0 vs 0.0) break ties by ascending index so rankings are
/// deterministic, and NaN sorts last. With `k` past the item count the full
/// ranking comes back.
pub fn top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&i, &j| match scores[j].partial_cmp(&scores[i]) {
        Some(o) => o.then(i.cmp(&j)),
        None => scores[i].is_nan().cmp(&scores[j].is_nan()).then(i.cmp(&j)),
    });
    order.truncate(k);
    order
}

/// Fraction of the user's liked items that appear in the recommended list:
/// `|topk ∩ truth| / |truth|`.
pub fn recall_at_k(topk: &[usize], truth: &BTreeSet<usize>) -> f64 {
    if truth.is_empty() {
        return 0.0; // callers exclude such users; keep the metric total
    }
    let hits = topk.iter().filter(|i| truth.contains(i)).count();
    hits as f64 / truth.len() as f64
}

/// Binary-relevance NDCG: `DCG = Σ 1/log₂(i+1)` over 1-based positions `i`
/// where the recommended item is liked, normalized by the ideal DCG with
/// `min(|truth|, k)` relevant items packed at the top.
pub fn ndcg_at_k(topk: &[usize], truth: &BTreeSet<usize>, k: usize) -> f64 {
    let ideal_hits = truth.len().min(k);
    if ideal_hits == 0 {
        return 0.0;
    }
    let dcg: f64 = topk
        .iter()
        .enumerate()
        .filter(|(_, item)| truth.contains(item))
        .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    let idcg: f64 = (1..=ideal_hits).map(|i| 1.0 / ((i + 1) as f64).log2()).sum();
    dcg / idcg
}

/// Builds a report from an explicit score matrix (one row per user of
/// `truth`). This is the shared core behind model evaluation and
/// non-model baselines such as ranking by popularity.
pub fn report_from_scores(
    direction: Direction,
    scores: &Matrix,
    truth: &ClickMatrix,
    k_values: &[usize],
) -> RankingReport {
    assert_eq!(scores.rows(), truth.n_users(), "one score row per user");
    assert_eq!(scores.cols(), truth.n_items(), "one score per target item");
    let n_users = scores.rows();
    let max_k = k_values.iter().copied().max().unwrap_or(0);
    let mut recall = vec![0.0; k_values.len()];
    let mut ndcg = vec![0.0; k_values.len()];
    for u in 0..n_users {
        let truth_set: BTreeSet<usize> = truth.row_items(u).iter().map(|&i| i as usize).collect();
        let ranked = top_k(scores.row(u), max_k);
        for (slot, &k) in k_values.iter().enumerate() {
            let cut = &ranked[..k.min(ranked.len())];
            recall[slot] += recall_at_k(cut, &truth_set);
            ndcg[slot] += ndcg_at_k(cut, &truth_set, k);
        }
    }
    if n_users > 0 {
        for v in recall.iter_mut().chain(ndcg.iter_mut()) {
            *v /= n_users as f64;
        }
    }
    RankingReport {
        direction,
        k_values: k_values.to_vec(),
        recall,
        ndcg,
        n_users,
    }
}

/// Evaluates one direction on a test split: every user's full source-domain
/// click vector is translated with [`predict_cross`] and the resulting
/// scores are ranked against their full target-domain click set.
pub fn evaluate_direction(
    params: &D2DParams,
    ds_test: &DualDomainDataset,
    direction: Direction,
    k_values: &[usize],
    kind: ReconLossKind,
) -> Result<RankingReport> {
    let (src, dst) = match direction {
        Direction::AToB => (ds_test.domain_a(), ds_test.domain_b()),
        Direction::BToA => (ds_test.domain_b(), ds_test.domain_a()),
    };
    let all: Vec<usize> = (0..src.n_users()).collect();
    let x = src.dense_rows(&all);
    let scores = predict_cross(params, direction.src(), &x, kind)?;
    Ok(report_from_scores(direction, &scores, dst, k_values))
}

/// Popularity baseline: every user gets the same score row, the per-item
/// click counts of the *training* split's target domain.
pub fn popularity_scores(train_target: &ClickMatrix, n_users: usize) -> Matrix {
    let counts = train_target.column_counts();
    let row: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mut m = Matrix::zeros(n_users, row.len());
    for u in 0..n_users {
        m.row_mut(u).copy_from_slice(&row);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArchSpec;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn top_k_orders_by_score_then_index() {
        assert_eq!(top_k(&[0.1, 0.9, 0.5], 2), vec![1, 2]);
        assert_eq!(top_k(&[0.7, 0.7, 0.7], 2), vec![0, 1]);
        assert_eq!(top_k(&[0.1, 0.9, 0.5], 10), vec![1, 2, 0]);
    }

    #[test]
    fn recall_examples() {
        assert!((recall_at_k(&[1, 2, 9, 8], &set(&[1, 2, 3])) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(recall_at_k(&[3, 1, 2], &set(&[1, 2])), 1.0);
        assert_eq!(recall_at_k(&[4, 5], &set(&[1, 2])), 0.0);
    }

    #[test]
    fn ndcg_examples() {
        assert_eq!(ndcg_at_k(&[7, 3], &set(&[7]), 2), 1.0);
        let second = ndcg_at_k(&[3, 7], &set(&[7]), 2);
        assert!((second - 1.0 / 3.0_f64.log2()).abs() < 1e-12, "{second}");
        assert_eq!(ndcg_at_k(&[3, 4], &set(&[7]), 2), 0.0);
    }

    #[test]
    fn ndcg_is_one_for_ideal_prefix() {
        // relevant items fill the top-min(|truth|, k) positions
        assert_eq!(ndcg_at_k(&[2, 5, 9, 0], &set(&[2, 5, 9]), 4), 1.0);
        assert_eq!(ndcg_at_k(&[2, 5], &set(&[2, 5, 9]), 2), 1.0);
    }

    fn toy_truth(rows: Vec<Vec<u32>>, n_items: usize) -> ClickMatrix {
        let users = (0..rows.len()).map(|u| format!("u{u}")).collect();
        let items = (0..n_items).map(|i| format!("i{i}")).collect();
        ClickMatrix::new(users, items, rows).unwrap()
    }

    #[test]
    fn perfect_oracle_scores_hit_the_formulas() {
        // scores = truth indicator → ideal ranking
        let truth = toy_truth(vec![vec![1, 3, 4]], 6);
        let scores = Matrix::from_rows(&[&[0.0, 1.0, 0.0, 1.0, 1.0, 0.0]]);
        let report = report_from_scores(Direction::AToB, &scores, &truth, &[2, 3, 6]);
        assert!((report.recall[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(report.recall[1], 1.0);
        assert_eq!(report.recall[2], 1.0);
        assert_eq!(report.ndcg[1], 1.0);
        assert_eq!(report.ndcg[2], 1.0);
    }

    #[test]
    fn report_averages_over_users() {
        // user 0 ranked its item first, user 1 missed entirely at K=1
        let truth = toy_truth(vec![vec![0], vec![2]], 3);
        let scores = Matrix::from_rows(&[&[0.9, 0.1, 0.0], &[0.9, 0.1, 0.0]]);
        let report = report_from_scores(Direction::BToA, &scores, &truth, &[1]);
        assert_eq!(report.recall, vec![0.5]);
        assert_eq!(report.n_users, 2);
    }

    #[test]
    fn uniform_model_recall_follows_index_tie_break() {
        // zeroed parameters emit identical logits, so the ranking is plain
        // index order and Recall@K for a single liked item is 1 iff its
        // index is below K
        let arch = ArchSpec {
            input_dims: (4, 6),
            encoder_layer_sizes: vec![3, 3],
            latent_dim: 2,
            generator_layer_sizes: vec![3, 3],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![3],
        };
        let params = D2DParams::zeroed(&arch).unwrap();
        let ds = DualDomainDataset::new(
            toy_truth(vec![vec![0, 2]], 4),
            toy_truth(vec![vec![3]], 6),
        )
        .unwrap();
        let report = evaluate_direction(
            &params,
            &ds,
            Direction::AToB,
            &[2, 4],
            ReconLossKind::Multinomial,
        )
        .unwrap();
        assert_eq!(report.recall, vec![0.0, 1.0]); // item 3 enters at K=4
    }

    #[test]
    fn popularity_rows_are_column_counts() {
        let train = toy_truth(vec![vec![0, 1], vec![1], vec![1, 2]], 4);
        let scores = popularity_scores(&train, 2);
        assert_eq!(scores.row(0), &[1.0, 3.0, 1.0, 0.0]);
        assert_eq!(scores.row(0), scores.row(1));
    }

    #[test]
    fn metrics_are_monotone_in_k() {
        let truth = toy_truth(vec![vec![1, 5], vec![0, 3, 6]], 8);
        let scores = Matrix::from_rows(&[
            &[0.3, 0.1, 0.9, 0.2, 0.8, 0.5, 0.4, 0.0],
            &[0.2, 0.9, 0.1, 0.3, 0.0, 0.8, 0.7, 0.6],
        ]);
        let ks: Vec<usize> = (1..=8).collect();
        let report = report_from_scores(Direction::AToB, &scores, &truth, &ks);
        for w in report.recall.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in report.ndcg.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }
}

//! A worked Recall@K / NDCG@K example on hand-checkable numbers.
//!
//! ```sh
//! cargo run --example rank_metrics
//! ```

use std::collections::BTreeSet;

use d2d::eval::{ndcg_at_k, recall_at_k, top_k};

fn main() {
    // model scores for six items; the user actually liked items 1, 4, and 5
    let scores = [0.10, 0.80, 0.05, 0.30, 0.75, 0.20];
    let truth: BTreeSet<usize> = [1, 4, 5].into_iter().collect();

    println!("scores: {scores:?}");
    println!("liked:  {:?}\n", truth);

    let full = top_k(&scores, scores.len());
    println!("ranking (best first): {full:?}\n");

    println!("{:>3}  {:>8}  {:>8}  top-k", "K", "recall", "ndcg");
    for k in 1..=scores.len() {
        let ranked = top_k(&scores, k);
        println!(
            "{k:>3}  {:>8.4}  {:>8.4}  {ranked:?}",
            recall_at_k(&ranked, &truth),
            ndcg_at_k(&ranked, &truth, k),
        );
    }

    // NDCG credits early hits: a hit at rank 1 vs the same hit at rank 3
    let hit_first = top_k(&[9.0, 1.0, 2.0], 3);
    let hit_third = top_k(&[2.0, 9.0, 1.0], 3); // truth item 0 now ranks third
    let truth0: BTreeSet<usize> = [0].into_iter().collect();
    println!("\nsame single hit, different positions:");
    println!("  rank 1 -> ndcg {:.4}", ndcg_at_k(&hit_first, &truth0, 3));
    println!("  rank 3 -> ndcg {:.4}  (1/log2(4))", ndcg_at_k(&hit_third, &truth0, 3));

    // equal scores rank by index, so output order never depends on memory layout
    let tied = top_k(&[0.5, 0.5, 0.5, 0.5], 4);
    println!("\nall-tied scores rank by index: {tied:?}");
}

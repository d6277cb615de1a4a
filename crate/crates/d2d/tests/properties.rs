//! Randomized invariant checks over the data pipeline and ranking metrics.

use std::collections::BTreeSet;

use proptest::prelude::*;

use d2d::data::{binarize, build_dual_domain, split_users, DualDomainDataset, RatingRecord, SplitSpec};
use d2d::eval::{ndcg_at_k, recall_at_k, top_k};

fn dual_users_dataset(n: usize) -> DualDomainDataset {
    let mut a = BTreeSet::new();
    let mut b = BTreeSet::new();
    for u in 0..n {
        a.insert((format!("u{u:03}"), format!("a{}", u % 5)));
        b.insert((format!("u{u:03}"), format!("b{}", u % 4)));
    }
    build_dual_domain(&a, &b).unwrap()
}

fn clicks() -> impl Strategy<Value = BTreeSet<(String, String)>> {
    prop::collection::btree_set((0u8..12, 0u8..8), 0..50)
        .prop_map(|s| s.into_iter().map(|(u, i)| (format!("u{u}"), format!("i{i}"))).collect())
}

/// Score vector plus a ground-truth subset of its indices.
fn scored_instance() -> impl Strategy<Value = (Vec<f64>, BTreeSet<usize>)> {
    (1usize..25).prop_flat_map(|n| {
        (prop::collection::vec(-1000.0f64..1000.0, n), prop::collection::btree_set(0..n, 0..=n))
    })
}

fn naive_top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap().then(i.cmp(&j)));
    idx.truncate(k.min(scores.len()));
    idx
}

proptest! {
    #[test]
    fn split_partitions_users_and_is_deterministic(n in 3usize..120, seed in any::<u64>()) {
        let ds = dual_users_dataset(n);
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let (tr, va, te) = split_users(&ds, &spec).unwrap();
        prop_assert_eq!(tr.n_users() + va.n_users() + te.n_users(), n);

        let mut seen: Vec<&str> =
            tr.users().iter().chain(va.users()).chain(te.users()).map(String::as_str).collect();
        seen.sort_unstable();
        let mut dedup = seen.clone();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), seen.len(), "splits must be disjoint");
        let all: Vec<&str> = ds.users().iter().map(String::as_str).collect();
        prop_assert_eq!(seen, all, "splits must cover every user");

        let (tr2, va2, te2) = split_users(&ds, &spec).unwrap();
        prop_assert_eq!(tr.users(), tr2.users());
        prop_assert_eq!(va.users(), va2.users());
        prop_assert_eq!(te.users(), te2.users());
    }

    #[test]
    fn dual_domain_keeps_exactly_the_users_active_in_both(a in clicks(), b in clicks()) {
        let users_a: BTreeSet<&String> = a.iter().map(|(u, _)| u).collect();
        let users_b: BTreeSet<&String> = b.iter().map(|(u, _)| u).collect();
        let expected: Vec<&String> = users_a.intersection(&users_b).copied().collect();

        match build_dual_domain(&a, &b) {
            Err(_) => prop_assert!(expected.is_empty()),
            Ok(ds) => {
                let got: Vec<&String> = ds.users().iter().collect();
                prop_assert_eq!(got, expected);
                for u in 0..ds.n_users() {
                    prop_assert!(!ds.domain_a().row_items(u).is_empty());
                    prop_assert!(!ds.domain_b().row_items(u).is_empty());
                }
                // item indices are sorted, unique, and every item has a click
                for dom in [ds.domain_a(), ds.domain_b()] {
                    prop_assert!(dom.item_index().windows(2).all(|w| w[0] < w[1]));
                    prop_assert!(dom.column_counts().iter().all(|&c| c > 0));
                }
            }
        }
    }

    #[test]
    fn binarize_is_an_order_insensitive_pair_set(
        raw in prop::collection::vec((0u8..6, 0u8..6, 0u8..6), 0..30),
    ) {
        let records: Vec<RatingRecord> = raw
            .iter()
            .map(|&(u, i, r)| RatingRecord {
                user_id: format!("u{u}"),
                item_id: format!("i{i}"),
                rating: r as f64,
                timestamp: None,
            })
            .collect();
        let expected: BTreeSet<(String, String)> =
            raw.iter().map(|&(u, i, _)| (format!("u{u}"), format!("i{i}"))).collect();
        prop_assert_eq!(binarize(&records), expected.clone());

        let reversed: Vec<RatingRecord> = records.into_iter().rev().collect();
        prop_assert_eq!(binarize(&reversed), expected);
    }

    #[test]
    fn top_k_matches_a_naive_sort((scores, _) in scored_instance(), k in 0usize..30) {
        prop_assert_eq!(top_k(&scores, k), naive_top_k(&scores, k));
    }

    #[test]
    fn top_k_breaks_ties_by_index((scores, _) in scored_instance(), k in 1usize..30) {
        // quantize so ties actually occur
        let coarse: Vec<f64> = scores.iter().map(|s| (s / 250.0).round()).collect();
        prop_assert_eq!(top_k(&coarse, k), naive_top_k(&coarse, k));
    }

    #[test]
    fn metrics_are_bounded_and_recall_grows_with_k(
        (scores, truth) in scored_instance(),
        k1 in 1usize..25,
        k2 in 1usize..25,
    ) {
        let (lo, hi) = (k1.min(k2), k1.max(k2));
        let top_lo = top_k(&scores, lo);
        let top_hi = top_k(&scores, hi);
        for (ranked, k) in [(&top_lo, lo), (&top_hi, hi)] {
            let r = recall_at_k(ranked, &truth);
            let n = ndcg_at_k(ranked, &truth, k);
            prop_assert!((0.0..=1.0).contains(&r), "recall {r}");
            prop_assert!((0.0..=1.0).contains(&n), "ndcg {n}");
        }
        prop_assert!(recall_at_k(&top_lo, &truth) <= recall_at_k(&top_hi, &truth) + 1e-12);
    }

    #[test]
    fn ranking_is_invariant_under_increasing_affine_maps(
        (scores, _) in scored_instance(),
        k in 1usize..25,
        scale in 0.01f64..50.0,
        shift in -100.0f64..100.0,
    ) {
        let mapped: Vec<f64> = scores.iter().map(|s| scale * s + shift).collect();
        prop_assert_eq!(top_k(&mapped, k), top_k(&scores, k));
    }
}

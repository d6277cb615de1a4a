//! Rating ingestion, click matrices, dual-domain alignment, and user splits.
//!
//! The pipeline is: parse rating files into [`RatingRecord`]s, [`binarize`]
//! them into click pairs, align the two domains over their common users with
//! [`build_dual_domain`], and carve reproducible train/validation/test user
//! partitions with [`split_users`].

mod cache;
mod load;
mod synthetic;

pub use cache::{load_dataset, save_dataset};
pub use load::{load_ratings, load_ratings_file, RatingFormat};
pub use synthetic::{synthetic_clusters, SyntheticSpec};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Matrix, SeededRng};

/// One raw interaction line: who clicked what, with the original rating kept
/// around for inspection even though downstream treatment is binary.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user_id: String,
    pub item_id: String,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

/// A binary user-by-item interaction matrix, stored sparsely as sorted item
/// positions per user row.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickMatrix {
    user_index: Vec<String>,
    item_index: Vec<String>,
    rows: Vec<Vec<u32>>,
}

impl ClickMatrix {
    /// Builds a matrix, checking that every row is non-empty, sorted, unique,
    /// and in range. Column coverage is *not* checked here: a split of a
    /// larger dataset legitimately contains all-zero columns.
    pub fn new(user_index: Vec<String>, item_index: Vec<String>, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() != user_index.len() {
            return Err(Error::Data(format!(
                "row count {} does not match user count {}",
                rows.len(),
                user_index.len()
            )));
        }
        let n_items = item_index.len() as u32;
        for (u, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::Data(format!(
                    "user '{}' has no clicks in this domain",
                    user_index[u]
                )));
            }
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Data(format!(
                        "row for user '{}' is not sorted and unique",
                        user_index[u]
                    )));
                }
            }
            if *row.last().unwrap() >= n_items {
                return Err(Error::Data(format!(
                    "row for user '{}' references item position {} of {}",
                    user_index[u],
                    row.last().unwrap(),
                    n_items
                )));
            }
        }
        Ok(ClickMatrix {
            user_index,
            item_index,
            rows,
        })
    }

    pub fn n_users(&self) -> usize {
        self.user_index.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_index.len()
    }

    pub fn user_index(&self) -> &[String] {
        &self.user_index
    }

    pub fn item_index(&self) -> &[String] {
        &self.item_index
    }

    /// Sorted item positions clicked by user row `u`.
    pub fn row_items(&self, u: usize) -> &[u32] {
        &self.rows[u]
    }

    pub fn has(&self, u: usize, item_pos: u32) -> bool {
        self.rows[u].binary_search(&item_pos).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Percentage of filled cells, `100 * nnz / (users * items)`.
    pub fn density_percent(&self) -> f64 {
        100.0 * self.nnz() as f64 / (self.n_users() * self.n_items()) as f64
    }

    /// Number of clicks per item column (the popularity profile).
    pub fn column_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_items()];
        for row in &self.rows {
            for &i in row {
                counts[i as usize] += 1;
            }
        }
        counts
    }

    /// Dense 0/1 rows for the given user positions, in the given order.
    pub fn dense_rows(&self, users: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(users.len(), self.n_items());
        for (r, &u) in users.iter().enumerate() {
            let row = m.row_mut(r);
            for &i in &self.rows[u] {
                row[i as usize] = 1.0;
            }
        }
        m
    }

    /// True when every item column has at least one click.
    pub fn all_columns_nonzero(&self) -> bool {
        self.column_counts().iter().all(|&c| c > 0)
    }

    fn subset_rows(&self, users: &[usize]) -> ClickMatrix {
        ClickMatrix {
            user_index: users.iter().map(|&u| self.user_index[u].clone()).collect(),
            item_index: self.item_index.clone(),
            rows: users.iter().map(|&u| self.rows[u].clone()).collect(),
        }
    }
}

/// Two click matrices over one shared, identically ordered user list.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDomainDataset {
    users: Vec<String>,
    domain_a: ClickMatrix,
    domain_b: ClickMatrix,
}

impl DualDomainDataset {
    pub fn new(domain_a: ClickMatrix, domain_b: ClickMatrix) -> Result<Self> {
        if domain_a.user_index != domain_b.user_index {
            return Err(Error::Data(
                "the two domains do not share an identical user list".to_string(),
            ));
        }
        Ok(DualDomainDataset {
            users: domain_a.user_index.clone(),
            domain_a,
            domain_b,
        })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn domain_a(&self) -> &ClickMatrix {
        &self.domain_a
    }

    pub fn domain_b(&self) -> &ClickMatrix {
        &self.domain_b
    }

    /// New dataset keeping only the users at the given row positions
    /// (item indices are inherited unchanged).
    pub fn subset(&self, users: &[usize]) -> Result<DualDomainDataset> {
        DualDomainDataset::new(self.domain_a.subset_rows(users), self.domain_b.subset_rows(users))
    }

    /// FNV-1a hash over the user list and both item lists; identifies which
    /// dataset a trained model belongs to.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for id in self.users.iter().chain(&self.domain_a.item_index).chain(&self.domain_b.item_index) {
            eat(id.as_bytes());
            eat(&[0xff]);
        }
        for domain in [&self.domain_a, &self.domain_b] {
            for u in 0..domain.n_users() {
                for &item in domain.row_items(u) {
                    eat(&item.to_le_bytes());
                }
                eat(&[0xfe]);
            }
        }
        h
    }
}

/// Train/validation/test fractions plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.70,
            valid_frac: 0.05,
            test_frac: 0.25,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, f) in [
            ("train_frac", self.train_frac),
            ("valid_frac", self.valid_frac),
            ("test_frac", self.test_frac),
        ] {
            if !(f > 0.0) {
                problems.push(format!("{name} must be positive, got {f}"));
            }
        }
        let sum = self.train_frac + self.valid_frac + self.test_frac;
        if (sum - 1.0).abs() > 1e-9 {
            problems.push(format!("split fractions must sum to 1, got {sum}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Collapses rating records to distinct `(user_id, item_id)` click pairs;
/// any rating value counts as a click.
pub fn binarize(records: &[RatingRecord]) -> BTreeSet<(String, String)> {
    records
        .iter()
        .map(|r| (r.user_id.clone(), r.item_id.clone()))
        .collect()
}

/// Aligns two domains over their common users: keeps exactly the users that
/// clicked in both, and in each domain exactly the items clicked by at least
/// one kept user. User and item orderings are lexicographic.
pub fn build_dual_domain(
    clicks_a: &BTreeSet<(String, String)>,
    clicks_b: &BTreeSet<(String, String)>,
) -> Result<DualDomainDataset> {
    let users_a: BTreeSet<&str> = clicks_a.iter().map(|(u, _)| u.as_str()).collect();
    let users_b: BTreeSet<&str> = clicks_b.iter().map(|(u, _)| u.as_str()).collect();
    let users: Vec<String> = users_a.intersection(&users_b).map(|u| u.to_string()).collect();
    if users.is_empty() {
        return Err(Error::Data("no overlapping users between the two domains".to_string()));
    }
    let domain_a = build_domain(clicks_a, &users)?;
    let domain_b = build_domain(clicks_b, &users)?;
    DualDomainDataset::new(domain_a, domain_b)
}

fn build_domain(clicks: &BTreeSet<(String, String)>, users: &[String]) -> Result<ClickMatrix> {
    let kept: BTreeSet<&str> = users.iter().map(String::as_str).collect();
    let items: BTreeSet<&str> = clicks
        .iter()
        .filter(|(u, _)| kept.contains(u.as_str()))
        .map(|(_, i)| i.as_str())
        .collect();
    let item_index: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    let item_pos: std::collections::BTreeMap<&str, u32> =
        items.iter().enumerate().map(|(p, &i)| (i, p as u32)).collect();

    // clicks iterate in (user, item) lexicographic order, so each row comes
    // out sorted without an extra pass.
    let user_pos: std::collections::BTreeMap<&str, usize> =
        users.iter().enumerate().map(|(p, u)| (u.as_str(), p)).collect();
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); users.len()];
    for (u, i) in clicks {
        if let Some(&p) = user_pos.get(u.as_str()) {
            rows[p].push(item_pos[i.as_str()]);
        }
    }
    for row in &mut rows {
        row.sort_unstable();
    }
    ClickMatrix::new(users.to_vec(), item_index, rows)
}

/// Partitions users by a seeded shuffle into train/validation/test datasets.
/// Sizes are `floor(train_frac * U)`, `floor(valid_frac * U)`, and the
/// remainder; each split keeps the parent item indices unchanged.
pub fn split_users(
    ds: &DualDomainDataset,
    spec: &SplitSpec,
) -> Result<(DualDomainDataset, DualDomainDataset, DualDomainDataset)> {
    spec.validate()?;
    let n = ds.n_users();
    if n < 3 {
        return Err(Error::Data(format!("need at least 3 users to split, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(spec.seed).shuffle(&mut order);
    let n_train = (spec.train_frac * n as f64).floor() as usize;
    let n_valid = (spec.valid_frac * n as f64).floor() as usize;

    let take = |lo: usize, hi: usize| -> Result<DualDomainDataset> {
        let mut part: Vec<usize> = order[lo..hi].to_vec();
        part.sort_unstable();
        ds.subset(&part)
    };
    let train = take(0, n_train)?;
    let valid = take(n_train, n_train + n_valid)?;
    let test = take(n_train + n_valid, n)?;
    Ok((train, valid, test))
}

/// Corpus-level shape summary, as printed by the ingestion command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub n_users: usize,
    pub n_items_a: usize,
    pub n_items_b: usize,
    pub density_a: f64,
    pub density_b: f64,
}

pub fn dataset_stats(ds: &DualDomainDataset) -> DatasetStats {
    DatasetStats {
        n_users: ds.n_users(),
        n_items_a: ds.domain_a().n_items(),
        n_items_b: ds.domain_b().n_items(),
        density_a: ds.domain_a().density_percent(),
        density_b: ds.domain_b().density_percent(),
    }
}

impl std::fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "#user    #item_A  #item_B  %dens_A  %dens_B")?;
        write!(
            f,
            "{:<8} {:<8} {:<8} {:<8.2} {:<8.2}",
            self.n_users, self.n_items_a, self.n_items_b, self.density_a, self.density_b
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(u: &str, i: &str) -> (String, String) {
        (u.to_string(), i.to_string())
    }

    fn rec(u: &str, i: &str, r: f64) -> RatingRecord {
        RatingRecord {
            user_id: u.to_string(),
            item_id: i.to_string(),
            rating: r,
            timestamp: None,
        }
    }

    #[test]
    fn binarize_collapses_duplicates_and_ignores_rating() {
        let set = binarize(&[rec("u", "i", 5.0), rec("u", "i", 1.0), rec("u", "j", 0.5)]);
        assert_eq!(set.len(), 2);
        assert!(set.contains(&pair("u", "i")));
        assert!(set.contains(&pair("u", "j")));
        assert!(binarize(&[]).is_empty());
    }

    #[test]
    fn build_keeps_only_overlapping_users() {
        let a: BTreeSet<_> = [pair("u1", "x"), pair("u2", "y")].into();
        let b: BTreeSet<_> = [pair("u1", "z")].into();
        let ds = build_dual_domain(&a, &b).unwrap();
        assert_eq!(ds.users(), &["u1".to_string()]);
        assert_eq!(ds.domain_a().item_index(), &["x".to_string()]);
        assert_eq!(ds.domain_b().item_index(), &["z".to_string()]);
    }

    #[test]
    fn build_rejects_disjoint_user_sets() {
        let a: BTreeSet<_> = [pair("u1", "x")].into();
        let b: BTreeSet<_> = [pair("u2", "y")].into();
        let err = build_dual_domain(&a, &b).unwrap_err();
        assert!(err.to_string().contains("no overlapping users"));
    }

    #[test]
    fn build_drops_items_clicked_only_by_dropped_users() {
        // u3 only appears in domain A, so it is dropped; item "solo" was
        // clicked exclusively by u3 and must disappear with it.
        let a: BTreeSet<_> = [pair("u1", "x"), pair("u2", "x"), pair("u3", "solo")].into();
        let b: BTreeSet<_> = [pair("u1", "z"), pair("u2", "w")].into();
        let ds = build_dual_domain(&a, &b).unwrap();
        assert_eq!(ds.users(), &["u1".to_string(), "u2".to_string()]);
        assert_eq!(ds.domain_a().item_index(), &["x".to_string()]);
        assert!(ds.domain_a().all_columns_nonzero());
        assert!(ds.domain_b().all_columns_nonzero());
    }

    #[test]
    fn build_ordering_is_lexicographic() {
        let a: BTreeSet<_> = [pair("u2", "b"), pair("u2", "a"), pair("u1", "c")].into();
        let b: BTreeSet<_> = [pair("u1", "q"), pair("u2", "p")].into();
        let ds = build_dual_domain(&a, &b).unwrap();
        assert_eq!(ds.users(), &["u1".to_string(), "u2".to_string()]);
        assert_eq!(
            ds.domain_a().item_index(),
            &["a".to_string(), "b".to_string(), "c".to_string()]
        );
        assert_eq!(ds.domain_a().row_items(0), &[2]); // u1 clicked c
        assert_eq!(ds.domain_a().row_items(1), &[0, 1]); // u2 clicked a, b
    }

    fn toy_dataset(n_users: usize) -> DualDomainDataset {
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        for u in 0..n_users {
            let uid = format!("u{u:04}");
            a.insert((uid.clone(), format!("a{:03}", u % 7)));
            b.insert((uid, format!("b{:03}", u % 5)));
        }
        build_dual_domain(&a, &b).unwrap()
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        let ds = toy_dataset(100);
        let spec = SplitSpec::default();
        let (tr, va, te) = split_users(&ds, &spec).unwrap();
        assert_eq!((tr.n_users(), va.n_users(), te.n_users()), (70, 5, 25));
        // item widths inherited unchanged
        assert_eq!(tr.domain_a().n_items(), ds.domain_a().n_items());
        assert_eq!(va.domain_b().n_items(), ds.domain_b().n_items());
    }

    #[test]
    fn split_is_a_deterministic_partition() {
        let ds = toy_dataset(53);
        let spec = SplitSpec {
            seed: 7,
            ..SplitSpec::default()
        };
        let (tr1, va1, te1) = split_users(&ds, &spec).unwrap();
        let (tr2, va2, te2) = split_users(&ds, &spec).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(va1, va2);
        assert_eq!(te1, te2);

        let mut all: Vec<&String> = tr1.users().iter().chain(va1.users()).chain(te1.users()).collect();
        assert_eq!(all.len(), 53);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 53, "splits overlap or drop users");
    }

    #[test]
    fn split_requires_three_users() {
        let ds = toy_dataset(2);
        let err = split_users(&ds, &SplitSpec::default()).unwrap_err();
        assert!(err.to_string().contains("at least 3"));
    }

    #[test]
    fn stats_density_examples() {
        // 2 users x 2 items per domain, 1 click each in A rows -> need full
        // column coverage, so arrange 2 clicks hitting both columns once.
        let a: BTreeSet<_> = [pair("u1", "x"), pair("u2", "y")].into();
        let b: BTreeSet<_> = [
            pair("u1", "p"),
            pair("u1", "q"),
            pair("u2", "p"),
            pair("u2", "q"),
        ]
        .into();
        let ds = build_dual_domain(&a, &b).unwrap();
        let stats = dataset_stats(&ds);
        assert_eq!(stats.n_users, 2);
        assert_eq!(stats.density_a, 50.0); // 2 clicks / 4 cells
        assert_eq!(stats.density_b, 100.0);
    }

    #[test]
    fn fingerprint_distinguishes_index_changes() {
        let ds1 = toy_dataset(10);
        let ds2 = toy_dataset(11);
        assert_ne!(ds1.fingerprint(), ds2.fingerprint());
        assert_eq!(ds1.fingerprint(), toy_dataset(10).fingerprint());
    }

    #[test]
    fn fingerprint_distinguishes_click_changes() {
        // same users and item vocabulary, one extra interaction
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        for u in 0..6 {
            a.insert((format!("u{u}"), format!("a{}", u % 3)));
            b.insert((format!("u{u}"), format!("b{}", u % 3)));
        }
        let ds1 = build_dual_domain(&a, &b).unwrap();
        a.insert(("u0".to_string(), "a1".to_string()));
        let ds2 = build_dual_domain(&a, &b).unwrap();
        assert_eq!(ds1.users(), ds2.users());
        assert_eq!(ds1.domain_a().item_index(), ds2.domain_a().item_index());
        assert_ne!(ds1.fingerprint(), ds2.fingerprint());
    }
}

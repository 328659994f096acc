// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::Transaction;
use crate::par::{map_slice, Parallelism};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MiningError {
    #[error("min_support must be in (0, 1], got {0}")]
    Support(f64),
    #[error("min_confidence must be in [0, 1], got {0}")]
    Confidence(f64),
    #[error("min_lift must be non-negative, got {0}")]
    Lift(f64),
    #[error("support denominator {denominator} is smaller than the {transactions} transactions")]
    Denominator { denominator: u64, transactions: usize },
}

/// Sorted, duplicate-free list of items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Itemset(Vec<String>);

impl Itemset {
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = items.into_iter().map(Into::into).collect();
        Itemset(set.into_iter().collect())
    }

    pub fn items(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: &str) -> bool {
        self.0.binary_search_by(|i| i.as_str().cmp(item)).is_ok()
    }

    pub fn is_disjoint(&self, other: &Itemset) -> bool {
        !self.0.iter().any(|i| other.contains(i))
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        Itemset::new(self.0.iter().chain(&other.0).cloned())
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "'{item}'")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Itemset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// What itemset counts are divided by to get supports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Denominator {
    /// The number of transactions mined.
    #[default]
    Transactions,
    /// A fixed count, e.g. every cleaned issue including ones without forwards.
    Fixed(u64),
}

/// Frequent itemsets with their transaction counts.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequentItemsets {
    counts: BTreeMap<Itemset, u64>,
    denominator: u64,
    transactions: usize,
    min_support: f64,
}

impl FrequentItemsets {
    /// Builds a table from precomputed counts. The caller vouches that it is
    /// closed under subsets.
    pub fn from_counts(counts: BTreeMap<Itemset, u64>, denominator: u64, min_support: f64) -> Self {
        FrequentItemsets { counts, denominator, transactions: denominator as usize, min_support }
    }

    pub fn count(&self, itemset: &Itemset) -> Option<u64> {
        self.counts.get(itemset).copied()
    }

    pub fn support(&self, itemset: &Itemset) -> Option<f64> {
        self.count(itemset).map(|c| c as f64 / self.denominator as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Itemset, u64)> + '_ {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn transaction_count(&self) -> usize {
        self.transactions
    }

    pub fn min_support(&self) -> f64 {
        self.min_support
    }

    /// Longest frequent itemset size.
    pub fn max_len(&self) -> usize {
        self.counts.keys().map(Itemset::len).max().unwrap_or(0)
    }
}

/// Smallest count `c` with `c / denom >= min_support` in floating point.
fn min_count(min_support: f64, denom: u64) -> u64 {
    let d = denom as f64;
    let mut c = (min_support * d).floor().max(1.0) as u64;
    while c > 1 && (c - 1) as f64 / d >= min_support {
        c -= 1;
    }
    while (c as f64 / d) < min_support {
        c += 1;
    }
    c
}

/// Transaction-id bitset.
#[derive(Clone)]
struct TidSet(Vec<u64>);

impl TidSet {
    fn and(&self, other: &TidSet) -> TidSet {
        TidSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
}

pub fn apriori_frequent(transactions: &[Transaction], min_support: f64) -> Result<FrequentItemsets, MiningError> {
    apriori_frequent_with(transactions, min_support, Denominator::Transactions, Parallelism::default())
}

/// Level-wise Apriori. Candidates of size k join two frequent (k-1)-itemsets
/// sharing their first k-2 items and are dropped unless every (k-1)-subset is
/// frequent; survivors are counted by intersecting transaction bitsets.
pub fn apriori_frequent_with(
    transactions: &[Transaction],
    min_support: f64,
    denominator: Denominator,
    par: Parallelism,
) -> Result<FrequentItemsets, MiningError> {
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(MiningError::Support(min_support));
    }
    let denom = match denominator {
        Denominator::Transactions => transactions.len() as u64,
        Denominator::Fixed(n) => n,
    };
    if denom < transactions.len() as u64 {
        return Err(MiningError::Denominator { denominator: denom, transactions: transactions.len() });
    }
    let mut counts = BTreeMap::new();
    let done = |counts| FrequentItemsets { counts, denominator: denom, transactions: transactions.len(), min_support };
    if transactions.is_empty() {
        return Ok(done(counts));
    }
    let threshold = min_count(min_support, denom);

    let catalog: Vec<&str> =
        transactions.iter().flat_map(|t| t.items.iter().map(String::as_str)).collect::<BTreeSet<_>>().into_iter().collect();
    let words = transactions.len().div_ceil(64);
    let mut item_tids = vec![TidSet(vec![0; words]); catalog.len()];
    for (t, tx) in transactions.iter().enumerate() {
        for item in &tx.items {
            let i = catalog.binary_search(&item.as_str()).expect("item in catalog");
            item_tids[i].0[t / 64] |= 1 << (t % 64);
        }
    }

    // Current level: sorted item-index lists with their tidsets, in lexicographic order.
    let mut level: Vec<(Vec<u32>, TidSet)> = item_tids
        .iter()
        .enumerate()
        .filter(|(_, tids)| tids.count() >= threshold)
        .map(|(i, tids)| (vec![i as u32], tids.clone()))
        .collect();

    while !level.is_empty() {
        for (items, tids) in &level {
            counts.insert(Itemset(items.iter().map(|&i| catalog[i as usize].to_string()).collect()), tids.count());
        }
        let known: HashSet<&[u32]> = level.iter().map(|(items, _)| items.as_slice()).collect();
        let mut candidates: Vec<(usize, Vec<u32>)> = Vec::new();
        for (a, (left, _)) in level.iter().enumerate() {
            let prefix = &left[..left.len() - 1];
            for (right, _) in &level[a + 1..] {
                if &right[..right.len() - 1] != prefix {
                    break;
                }
                let mut cand = left.clone();
                cand.push(*right.last().unwrap());
                let closed = (0..cand.len() - 2).all(|skip| {
                    let sub: Vec<u32> = cand.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                    known.contains(sub.as_slice())
                });
                if closed {
                    candidates.push((a, cand));
                }
            }
        }
        let counted = map_slice(&candidates, par, |(parent, cand)| {
            let tids = level[*parent].1.and(&item_tids[*cand.last().unwrap() as usize]);
            let n = tids.count();
            (n >= threshold).then_some(tids)
        });
        level = candidates.into_iter().zip(counted).filter_map(|((_, cand), tids)| tids.map(|t| (cand, t))).collect();
    }
    Ok(done(counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::IssueId;

    fn db(rows: &[&[&str]]) -> Vec<Transaction> {
        rows.iter().enumerate().map(|(i, r)| Transaction::new(IssueId(i as u64), r.iter().copied())).collect()
    }

    fn set(items: &[&str]) -> Itemset {
        Itemset::new(items.iter().copied())
    }

    #[test]
    fn small_database() {
        let tx = db(&[&["a", "b"], &["a", "b"], &["a", "c"], &["b"]]);
        let f = apriori_frequent(&tx, 0.5).unwrap();
        let got: Vec<(String, f64)> = f.iter().map(|(s, _)| (s.to_string(), f.support(s).unwrap())).collect();
        assert_eq!(got, vec![("{'a'}".into(), 0.75), ("{'a', 'b'}".into(), 0.5), ("{'b'}".into(), 0.75)]);
    }

    #[test]
    fn threshold_above_every_item() {
        let tx = db(&[&["a", "b"], &["a", "b"], &["a", "c"], &["b"]]);
        assert!(apriori_frequent(&tx, 0.76).unwrap().is_empty());
    }

    #[test]
    fn single_transaction_full_support() {
        let f = apriori_frequent(&db(&[&["x"]]), 1.0).unwrap();
        assert_eq!(f.support(&set(&["x"])), Some(1.0));
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn empty_database_and_bad_support() {
        assert!(apriori_frequent(&[], 0.1).unwrap().is_empty());
        assert_eq!(apriori_frequent(&[], 0.0), Err(MiningError::Support(0.0)));
        assert!(apriori_frequent(&[], 1.5).is_err());
        assert!(apriori_frequent(&[], f64::NAN).is_err());
    }

    #[test]
    fn fixed_denominator() {
        let tx = db(&[&["a"], &["a"], &["b"]]);
        let f = apriori_frequent_with(&tx, 0.5, Denominator::Fixed(4), Parallelism::Sequential).unwrap();
        assert_eq!(f.support(&set(&["a"])), Some(0.5));
        assert_eq!(f.count(&set(&["b"])), None);
        assert!(apriori_frequent_with(&tx, 0.5, Denominator::Fixed(2), Parallelism::Sequential).is_err());
    }

    #[test]
    fn deep_itemsets_and_pruning() {
        let tx = db(&[&["a", "b", "c", "d"], &["a", "b", "c", "d"], &["a", "b", "c"], &["a", "d"], &["b", "d"]]);
        let f = apriori_frequent(&tx, 0.4).unwrap();
        assert_eq!(f.count(&set(&["a", "b", "c", "d"])), Some(2));
        assert_eq!(f.count(&set(&["a", "b", "c"])), Some(3));
        assert_eq!(f.count(&set(&["b", "d"])), Some(3));
        assert_eq!(f.max_len(), 4);
        let seq = apriori_frequent_with(&tx, 0.4, Denominator::Transactions, Parallelism::Sequential).unwrap();
        assert_eq!(seq, f);
    }

    #[test]
    fn min_count_matches_float_comparison() {
        for denom in [1u64, 3, 7, 100, 7248, 7250] {
            for s in [0.001, 0.008, 0.014, 0.1, 1.0 / 3.0, 0.5, 1.0, 60.0 / 7248.0, 100.0 / 7250.0] {
                let c = min_count(s, denom);
                assert!(c as f64 / denom as f64 >= s || c > denom);
                assert!(c == 1 || ((c - 1) as f64 / denom as f64) < s);
            }
        }
    }

    #[test]
    fn itemset_display_and_ops() {
        let a = set(&["b", "a", "b"]);
        assert_eq!(a.to_string(), "{'a', 'b'}");
        assert_eq!(a.len(), 2);
        assert!(a.is_disjoint(&set(&["c"])));
        assert_eq!(a.union(&set(&["c", "a"])), set(&["a", "b", "c"]));
    }
}

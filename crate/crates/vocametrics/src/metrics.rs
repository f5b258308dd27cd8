//! Structural statistics over an [`IndexingSystem`]: descriptors per record,
//! records per descriptor, broader terms per term, descriptor levels, plus
//! coverage and raw co-occurrence counts.
//!
//! Everything here is a pure function of an immutable system. Ties are
//! always broken lexicographically by label so results are deterministic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DescriptorId, IndexingSystem, LevelMap, ModelError};

/// Integer-keyed count map. `total` is the sum of all counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: BTreeMap<u32, u64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_counts<I: IntoIterator<Item = (u32, u64)>>(counts: I) -> Histogram {
        let mut bins = BTreeMap::new();
        for (k, c) in counts {
            if c > 0 {
                *bins.entry(k).or_insert(0) += c;
            }
        }
        let total = bins.values().sum();
        Histogram { bins, total }
    }

    fn bump(&mut self, key: u32) {
        *self.bins.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn count(&self, key: u32) -> u64 {
        self.bins.get(&key).copied().unwrap_or(0)
    }
}

/// Descending (descriptor, count) list with deterministic tie order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub entries: Vec<RankEntry>,
    /// The cutoff the table was truncated to, if any.
    pub truncation: Option<usize>,
    /// Descriptors with zero records, excluded from the entries.
    pub unused_descriptor_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub key: String,
    pub label: String,
    pub count: u64,
}

/// Level histogram; the level-0 bin contains both the top terms and any
/// descriptors with no path to a top, the latter counted separately.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelHistogram {
    pub bins: BTreeMap<u32, u64>,
    pub total: u64,
    pub unreachable_in_level0: u64,
}

/// Record coverage. `ratio` is `None` for a system without records.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub total_records: u64,
    pub categorized_records: u64,
    pub ratio: Option<f64>,
    pub descriptor_count: u64,
}

/// A co-occurring descriptor pair, presented in label order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub first: String,
    pub second: String,
    pub count: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("system has no {0}")]
    EmptySystem(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Metric knobs. `resolve_use` folds non-preferred descriptors into their
/// preferred targets before counting; off by default because source data
/// rarely documents how redirects were treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub resolve_use: bool,
}

/// The descriptor set of a record, optionally USE-resolved and deduplicated.
fn record_descriptors(
    system: &IndexingSystem,
    record: &crate::model::Record,
    opts: &MetricsOptions,
) -> Result<Vec<DescriptorId>, MetricsError> {
    if !opts.resolve_use {
        return Ok(record.descriptors.iter().copied().collect());
    }
    let mut out: Vec<DescriptorId> = Vec::with_capacity(record.descriptors.len());
    for &d in &record.descriptors {
        let r = system.resolve(d)?;
        if !out.contains(&r) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Distribution of the number of descriptors per record; the zero bin is
/// included even though fits usually exclude it.
pub fn tags_per_record(
    system: &IndexingSystem,
    opts: &MetricsOptions,
) -> Result<Histogram, MetricsError> {
    if system.record_count() == 0 {
        return Err(MetricsError::EmptySystem("records"));
    }
    let mut hist = Histogram::default();
    for record in system.records() {
        let n = record_descriptors(system, record, opts)?.len() as u32;
        hist.bump(n);
    }
    Ok(hist)
}

fn usage_counts(
    system: &IndexingSystem,
    opts: &MetricsOptions,
) -> Result<Vec<u64>, MetricsError> {
    let mut counts = vec![0u64; system.descriptor_count()];
    for record in system.records() {
        for d in record_descriptors(system, record, opts)? {
            counts[d.index()] += 1;
        }
    }
    Ok(counts)
}

/// Is `d` part of the countable descriptor population under `opts`?
/// With USE resolution on, non-preferred descriptors fold away.
fn in_population(system: &IndexingSystem, d: DescriptorId, opts: &MetricsOptions) -> bool {
    !opts.resolve_use || system.descriptor(d).preferred
}

/// Popularity table: records per descriptor, descending, optionally
/// truncated to the top `k`.
pub fn records_per_tag(
    system: &IndexingSystem,
    k: Option<usize>,
    opts: &MetricsOptions,
) -> Result<RankTable, MetricsError> {
    let counts = usage_counts(system, opts)?;
    if counts.iter().all(|&c| c == 0) {
        return Err(MetricsError::EmptySystem("assignments"));
    }
    let mut entries: Vec<RankEntry> = Vec::new();
    let mut unused = 0u64;
    for desc in system.descriptors() {
        if !in_population(system, desc.id, opts) {
            continue;
        }
        let c = counts[desc.id.index()];
        if c == 0 {
            unused += 1;
        } else {
            entries.push(RankEntry {
                key: desc.key.clone(),
                label: desc.label.clone(),
                count: c,
            });
        }
    }
    entries.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.label.cmp(&b.label))
            .then_with(|| a.key.cmp(&b.key))
    });
    if let Some(k) = k {
        entries.truncate(k);
    }
    Ok(RankTable {
        entries,
        truncation: k,
        unused_descriptor_count: unused,
    })
}

/// The other side of popularity: how many descriptors are used by exactly
/// `k` records, for `k >= 1`. Unused descriptors are reported separately.
pub fn tag_size_histogram(
    system: &IndexingSystem,
    opts: &MetricsOptions,
) -> Result<(Histogram, u64), MetricsError> {
    let counts = usage_counts(system, opts)?;
    if counts.iter().all(|&c| c == 0) {
        return Err(MetricsError::EmptySystem("assignments"));
    }
    let mut hist = Histogram::default();
    let mut unused = 0u64;
    for desc in system.descriptors() {
        if !in_population(system, desc.id, opts) {
            continue;
        }
        let c = counts[desc.id.index()];
        if c == 0 {
            unused += 1;
        } else {
            hist.bump(c.min(u32::MAX as u64) as u32);
        }
    }
    Ok((hist, unused))
}

/// Distribution of broader terms per descriptor, zero bin included.
pub fn broader_terms_per_term(
    system: &IndexingSystem,
    opts: &MetricsOptions,
) -> Result<Histogram, MetricsError> {
    if system.descriptor_count() == 0 {
        return Err(MetricsError::EmptySystem("descriptors"));
    }
    let mut hist = Histogram::default();
    for desc in system.descriptors() {
        if !in_population(system, desc.id, opts) {
            continue;
        }
        let b = system.broader(desc.id)?.len() as u32;
        hist.bump(b);
    }
    Ok(hist)
}

/// Descriptor levels as a histogram; delegates to [`IndexingSystem::levels`].
pub fn level_histogram(
    system: &IndexingSystem,
    tops: &std::collections::BTreeSet<DescriptorId>,
) -> Result<LevelHistogram, MetricsError> {
    let map: LevelMap = system.levels(tops)?;
    let mut bins: BTreeMap<u32, u64> = BTreeMap::new();
    let mut unreachable = 0u64;
    for (_, level, is_unreachable) in map.iter() {
        *bins.entry(level).or_insert(0) += 1;
        if is_unreachable {
            unreachable += 1;
        }
    }
    let total = bins.values().sum();
    Ok(LevelHistogram {
        bins,
        total,
        unreachable_in_level0: unreachable,
    })
}

/// Record coverage statistics; total counts plus categorized ratio.
pub fn coverage(system: &IndexingSystem) -> Coverage {
    let total = system.record_count() as u64;
    let categorized = system
        .records()
        .filter(|r| !r.descriptors.is_empty())
        .count() as u64;
    Coverage {
        total_records: total,
        categorized_records: categorized,
        ratio: if total == 0 {
            None
        } else {
            Some(categorized as f64 / total as f64)
        },
        descriptor_count: system.descriptor_count() as u64,
    }
}

/// Top `m` unordered descriptor pairs co-assigned to the same record.
pub fn cooccurrence_top(
    system: &IndexingSystem,
    m: usize,
    opts: &MetricsOptions,
) -> Result<Vec<Cooccurrence>, MetricsError> {
    if system.record_count() == 0 {
        return Err(MetricsError::EmptySystem("records"));
    }
    let mut pairs: BTreeMap<(DescriptorId, DescriptorId), u64> = BTreeMap::new();
    for record in system.records() {
        let ds = record_descriptors(system, record, opts)?;
        for i in 0..ds.len() {
            for j in (i + 1)..ds.len() {
                let (a, b) = (ds[i].min(ds[j]), ds[i].max(ds[j]));
                *pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<Cooccurrence> = pairs
        .into_iter()
        .map(|((a, b), count)| {
            let da = system.descriptor(a);
            let db = system.descriptor(b);
            let (first, second) = if (&da.label, &da.key) <= (&db.label, &db.key) {
                (da, db)
            } else {
                (db, da)
            };
            Cooccurrence {
                first: first.label.clone(),
                second: second.label.clone(),
                count,
            }
        })
        .collect();
    out.sort_by(|x, y| {
        y.count
            .cmp(&x.count)
            .then_with(|| x.first.cmp(&y.first))
            .then_with(|| x.second.cmp(&y.second))
    });
    out.truncate(m);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemBuilder;

    fn opts() -> MetricsOptions {
        MetricsOptions::default()
    }

    fn tagged_system() -> IndexingSystem {
        let mut b = SystemBuilder::new("tags");
        b.add_assignment("r1", "blog").unwrap();
        b.add_assignment("r2", "blog").unwrap();
        b.add_assignment("r2", "software").unwrap();
        b.add_assignment("r3", "blog").unwrap();
        b.add_assignment("r3", "software").unwrap();
        b.add_assignment("r3", "design").unwrap();
        b.add_record("r4").unwrap();
        b.build().system
    }

    #[test]
    fn tags_per_record_counts_zero_bin() {
        let sys = tagged_system();
        let h = tags_per_record(&sys, &opts()).unwrap();
        assert_eq!(h.count(0), 1);
        assert_eq!(h.count(1), 1);
        assert_eq!(h.count(2), 1);
        assert_eq!(h.count(3), 1);
        assert_eq!(h.total, 4);
    }

    #[test]
    fn two_records_one_tag_each() {
        let mut b = SystemBuilder::new("t");
        b.add_assignment("a", "x").unwrap();
        b.add_assignment("b", "y").unwrap();
        let sys = b.build().system;
        let h = tags_per_record(&sys, &opts()).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(1, 2)]));
        assert_eq!(h.total, 2);
    }

    #[test]
    fn records_per_tag_descending_with_tie_break() {
        let sys = tagged_system();
        let t = records_per_tag(&sys, None, &opts()).unwrap();
        let got: Vec<(&str, u64)> = t
            .entries
            .iter()
            .map(|e| (e.label.as_str(), e.count))
            .collect();
        assert_eq!(got, vec![("blog", 3), ("software", 2), ("design", 1)]);

        // tie case: equal counts order lexicographically
        let mut b = SystemBuilder::new("tie");
        for r in ["r1", "r2", "r3", "r4", "r5"] {
            b.add_assignment(r, "zebra").unwrap();
            b.add_assignment(r, "aardvark").unwrap();
        }
        let sys = b.build().system;
        let t = records_per_tag(&sys, None, &opts()).unwrap();
        assert_eq!(t.entries[0].label, "aardvark");
        assert_eq!(t.entries[1].label, "zebra");
        assert_eq!(t.entries[0].count, 5);
    }

    #[test]
    fn records_per_tag_truncates() {
        let sys = tagged_system();
        let t = records_per_tag(&sys, Some(1), &opts()).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.truncation, Some(1));
        assert_eq!(t.entries[0].label, "blog");
    }

    #[test]
    fn tag_sizes_group_by_usage() {
        // tags with usage counts {5, 5, 2} -> {5: 2, 2: 1}
        let mut b = SystemBuilder::new("sizes");
        for i in 0..5 {
            b.add_assignment(&format!("r{i}"), "t1").unwrap();
            b.add_assignment(&format!("r{i}"), "t2").unwrap();
        }
        b.add_assignment("r0", "t3").unwrap();
        b.add_assignment("r1", "t3").unwrap();
        b.declare_descriptor("never-used", None).unwrap();
        let sys = b.build().system;
        let (h, unused) = tag_size_histogram(&sys, &opts()).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(2, 1), (5, 2)]));
        assert_eq!(unused, 1);
    }

    #[test]
    fn single_descriptor_on_n_records() {
        let mut b = SystemBuilder::new("one");
        for i in 0..7 {
            b.add_assignment(&format!("r{i}"), "only").unwrap();
        }
        let sys = b.build().system;
        let (h, _) = tag_size_histogram(&sys, &opts()).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(7, 1)]));
    }

    #[test]
    fn broader_terms_histogram_tree_and_diamond() {
        // perfect tree: {0: 1, 1: n-1}
        let mut b = SystemBuilder::new("tree");
        for (c, p) in [("b", "a"), ("c", "a"), ("d", "b"), ("e", "b")] {
            b.add_bt(c, p).unwrap();
        }
        let sys = b.build().system;
        let h = broader_terms_per_term(&sys, &opts()).unwrap();
        assert_eq!(h.bins, BTreeMap::from([(0, 1), (1, 4)]));

        // diamond: D has two broader terms
        let mut b = SystemBuilder::new("diamond");
        b.add_bt("B", "A").unwrap();
        b.add_bt("C", "A").unwrap();
        b.add_bt("D", "B").unwrap();
        b.add_bt("D", "C").unwrap();
        let sys = b.build().system;
        let h = broader_terms_per_term(&sys, &opts()).unwrap();
        assert!(h.count(2) >= 1);
    }

    #[test]
    fn level_histogram_chain() {
        let mut b = SystemBuilder::new("chain");
        b.add_bt("X", "top").unwrap();
        b.add_bt("Y", "X").unwrap();
        b.add_top_term("top").unwrap();
        let sys = b.build().system;
        let tops = sys.top_terms().clone();
        let lh = level_histogram(&sys, &tops).unwrap();
        assert_eq!(lh.bins, BTreeMap::from([(0, 1), (1, 1), (2, 1)]));
        assert_eq!(lh.total, 3);
        assert_eq!(lh.unreachable_in_level0, 0);
    }

    #[test]
    fn coverage_ratios() {
        let sys = tagged_system();
        let c = coverage(&sys);
        assert_eq!(c.total_records, 4);
        assert_eq!(c.categorized_records, 3);
        assert!((c.ratio.unwrap() - 0.75).abs() < 1e-12);

        let empty = SystemBuilder::new("empty").build().system;
        let c = coverage(&empty);
        assert_eq!(c.total_records, 0);
        assert!(c.ratio.is_none());
    }

    #[test]
    fn cooccurrence_counts_pairs() {
        let mut b = SystemBuilder::new("co");
        b.add_assignment("Apple", "Agriculture").unwrap();
        b.add_assignment("Apple", "Apples").unwrap();
        let sys = b.build().system;
        let top = cooccurrence_top(&sys, 10, &opts()).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].first, "Agriculture");
        assert_eq!(top[0].second, "Apples");
        assert_eq!(top[0].count, 1);

        // three records each tagged {X, Y} -> (X, Y) count 3
        let mut b = SystemBuilder::new("co3");
        for r in ["r1", "r2", "r3"] {
            b.add_assignment(r, "X").unwrap();
            b.add_assignment(r, "Y").unwrap();
        }
        let sys = b.build().system;
        let top = cooccurrence_top(&sys, 1, &opts()).unwrap();
        assert_eq!(top[0].count, 3);
    }

    #[test]
    fn resolve_use_folds_aliases() {
        let mut b = SystemBuilder::new("use");
        b.add_use("Carcinoma", "Neoplasms").unwrap();
        b.add_assignment("article", "Carcinoma").unwrap();
        b.add_assignment("article", "Neoplasms").unwrap();
        let sys = b.build().system;

        let plain = tags_per_record(&sys, &MetricsOptions { resolve_use: false }).unwrap();
        assert_eq!(plain.count(2), 1);
        let folded = tags_per_record(&sys, &MetricsOptions { resolve_use: true }).unwrap();
        assert_eq!(folded.count(1), 1);

        let t = records_per_tag(&sys, None, &MetricsOptions { resolve_use: true }).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert_eq!(t.entries[0].label, "Neoplasms");
        assert_eq!(t.entries[0].count, 1);
    }

    #[test]
    fn empty_system_errors() {
        let sys = SystemBuilder::new("empty").build().system;
        assert!(tags_per_record(&sys, &opts()).is_err());
        assert!(records_per_tag(&sys, None, &opts()).is_err());
        assert!(broader_terms_per_term(&sys, &opts()).is_err());
    }

    /// Naive quadratic recomputation of every metric on a small system.
    #[test]
    fn metrics_match_naive_recomputation() {
        let mut b = SystemBuilder::new("naive");
        for i in 0..60u32 {
            for j in 0..(i % 5) {
                b.add_assignment(&format!("rec{i}"), &format!("tag{}", (i + j) % 13))
                    .unwrap();
            }
        }
        let sys = b.build().system;
        let h = tags_per_record(&sys, &opts()).unwrap();

        // per-record recount
        let mut naive: BTreeMap<u32, u64> = BTreeMap::new();
        for r in sys.records() {
            *naive.entry(r.descriptors.len() as u32).or_insert(0) += 1;
        }
        assert_eq!(h.bins, naive);

        // double-counting identity: sum n * bins[n] == total assignments
        let assignments: u64 = sys.records().map(|r| r.descriptors.len() as u64).sum();
        let weighted: u64 = h.bins.iter().map(|(&n, &c)| n as u64 * c).sum();
        assert_eq!(weighted, assignments);

        let table = records_per_tag(&sys, None, &opts()).unwrap();
        let table_total: u64 = table.entries.iter().map(|e| e.count).sum();
        assert_eq!(table_total, assignments);

        let (sizes, _) = tag_size_histogram(&sys, &opts()).unwrap();
        let sizes_total: u64 = sizes.bins.iter().map(|(&k, &c)| k as u64 * c).sum();
        assert_eq!(sizes_total, assignments);

        // pair counts by brute force
        let co = cooccurrence_top(&sys, usize::MAX, &opts()).unwrap();
        let mut brute: BTreeMap<(String, String), u64> = BTreeMap::new();
        for r in sys.records() {
            let labels: Vec<&str> = r
                .descriptors
                .iter()
                .map(|&d| sys.descriptor(d).label.as_str())
                .collect();
            for i in 0..labels.len() {
                for j in (i + 1)..labels.len() {
                    let (a, b) = if labels[i] <= labels[j] {
                        (labels[i], labels[j])
                    } else {
                        (labels[j], labels[i])
                    };
                    *brute.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(co.len(), brute.len());
        for entry in &co {
            assert_eq!(
                brute[&(entry.first.clone(), entry.second.clone())],
                entry.count
            );
        }
    }

    #[test]
    fn broader_terms_weighted_sum_equals_edge_count() {
        let mut b = SystemBuilder::new("edges");
        for (c, p) in [("a", "x"), ("a", "y"), ("b", "x"), ("c", "a"), ("c", "b")] {
            b.add_bt(c, p).unwrap();
        }
        let sys = b.build().system;
        let h = broader_terms_per_term(&sys, &opts()).unwrap();
        let weighted: u64 = h.bins.iter().map(|(&b, &c)| b as u64 * c).sum();
        assert_eq!(weighted, sys.bt_edge_count());
        assert_eq!(h.total, sys.descriptor_count() as u64);
    }
}

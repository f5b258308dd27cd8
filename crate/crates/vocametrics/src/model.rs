//! The normalized subject-indexing data model.
//!
//! An [`IndexingSystem`] holds records (indexed items), descriptors (the
//! vocabulary) and three kinds of typed relations between descriptors:
//!
//! * BT/NT — the hierarchical broader/narrower-term relation, stored as a
//!   child-to-parents edge map with a derived inverse index,
//! * RT — the symmetric related-term relation, stored as unordered pairs,
//! * USE — the equivalence relation mapping non-preferred terms to their
//!   preferred target.
//!
//! Systems are immutable once built; construction goes through
//! [`SystemBuilder`], which interns labels, drops self-loops and keeps the
//! NT index consistent with BT. All graph operations are pure reads.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Key given to the synthetic top term when a virtual root is requested.
pub const VIRTUAL_ROOT_KEY: &str = "*TOP*";

/// Maximum number of USE hops [`IndexingSystem::resolve`] will follow.
pub const USE_CHAIN_CAP: usize = 16;

/// Handle to a descriptor inside one [`IndexingSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DescriptorId(u32);

impl DescriptorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a record inside one [`IndexingSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordId(u32);

impl RecordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A term in the controlled vocabulary.
///
/// `key` is the interned identity (unique within a system); `label` is the
/// display form and usually equals `key`. Classification schemes keep the
/// notation as key and the caption as label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub id: DescriptorId,
    pub key: String,
    pub label: String,
    /// False for non-preferred terms (synonyms, redirects).
    pub preferred: bool,
    /// Set if and only if `preferred` is false.
    pub use_target: Option<DescriptorId>,
    /// True when the descriptor was created by reference only, never declared.
    pub implicit: bool,
}

/// An indexed item carrying a set of descriptors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: RecordId,
    pub label: String,
    pub descriptors: BTreeSet<DescriptorId>,
}

/// Exact ratio, kept unreduced for display alongside its float value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Structural health counts for a system. Reporting, not rejection: dirty
/// graphs (cycles, orphans) are surfaced here and never refused.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dangling_reference_count: u64,
    /// Descriptors lying on at least one BT cycle.
    pub bt_cycle_descriptor_count: u64,
    /// Descriptors with no BT path to any top term.
    pub unreachable_descriptor_count: u64,
    pub uncategorized_record_count: u64,
}

/// Per-descriptor minimal hop counts from the top terms.
///
/// Descriptors with no path from any top carry level 0 and an unreachable
/// flag, mirroring how real category dumps tabulate their level-0 bucket.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelMap {
    levels: Vec<u32>,
    unreachable: Vec<bool>,
}

impl LevelMap {
    pub fn level(&self, d: DescriptorId) -> u32 {
        self.levels[d.index()]
    }

    pub fn is_unreachable(&self, d: DescriptorId) -> bool {
        self.unreachable[d.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DescriptorId, u32, bool)> + '_ {
        self.levels
            .iter()
            .zip(self.unreachable.iter())
            .enumerate()
            .map(|(i, (&l, &u))| (DescriptorId(i as u32), l, u))
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown descriptor: {0}")]
    UnknownDescriptor(String),
    #[error("equivalence (USE) cycle at descriptor '{0}'")]
    EquivalenceCycle(String),
    #[error("descriptor '{0}' has no hierarchical path to a top term")]
    Unreachable(String),
    #[error("system has no descriptors")]
    EmptySystem,
    #[error("no top terms given")]
    NoTopTerms,
}

/// Collapse internal whitespace runs to single spaces and trim the ends.
///
/// This is the label normalization applied before interning. Case is kept
/// as-is: titles are case-sensitive beyond namespace handling, which lives
/// in the ingest layer.
pub fn normalize_label(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut last_space = true;
    for ch in raw.chars() {
        if ch.is_whitespace() {
            if !last_space {
                out.push(' ');
                last_space = true;
            }
        } else {
            out.push(ch);
            last_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Counters for everything the builder silently repaired or collapsed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub duplicate_assignments: u64,
    pub duplicate_bt_edges: u64,
    pub bt_self_loops_dropped: u64,
    pub rt_self_loops_dropped: u64,
    pub equivalence_self_loops_dropped: u64,
    pub redirect_conflicts: u64,
}

/// Records, descriptors and typed relations over one dataset.
#[derive(Clone, Debug)]
pub struct IndexingSystem {
    name: String,
    descriptors: Vec<Descriptor>,
    records: Vec<Record>,
    /// child -> parents (Broader Term).
    bt: Vec<BTreeSet<DescriptorId>>,
    /// parent -> children (Narrower Term), inverse of `bt`.
    nt: Vec<BTreeSet<DescriptorId>>,
    /// Unordered related-term pairs, stored with the smaller id first.
    rt: BTreeSet<(DescriptorId, DescriptorId)>,
    top_terms: BTreeSet<DescriptorId>,
    virtual_root: bool,
    key_index: HashMap<String, DescriptorId>,
    record_index: HashMap<String, RecordId>,
}

impl IndexingSystem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor_count(&self) -> usize {
        self.descriptors.len()
    }

    pub fn record_count(&self) -> usize {
        self.records.len()
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &Descriptor> {
        self.descriptors.iter()
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.records.iter()
    }

    pub fn descriptor(&self, id: DescriptorId) -> &Descriptor {
        &self.descriptors[id.index()]
    }

    pub fn record(&self, id: RecordId) -> &Record {
        &self.records[id.index()]
    }

    /// Look a descriptor up by its key (label normalization applied).
    pub fn lookup(&self, key: &str) -> Option<DescriptorId> {
        self.key_index.get(&normalize_label(key)).copied()
    }

    pub fn lookup_record(&self, label: &str) -> Option<RecordId> {
        self.record_index.get(&normalize_label(label)).copied()
    }

    pub fn top_terms(&self) -> &BTreeSet<DescriptorId> {
        &self.top_terms
    }

    pub fn has_virtual_root(&self) -> bool {
        self.virtual_root
    }

    pub fn bt_edge_count(&self) -> u64 {
        self.bt.iter().map(|p| p.len() as u64).sum()
    }

    pub fn rt_pair_count(&self) -> u64 {
        self.rt.len() as u64
    }

    pub fn use_link_count(&self) -> u64 {
        self.descriptors.iter().filter(|d| !d.preferred).count() as u64
    }

    pub fn bt_edges(&self) -> impl Iterator<Item = (DescriptorId, DescriptorId)> + '_ {
        self.bt.iter().enumerate().flat_map(|(child, parents)| {
            parents
                .iter()
                .map(move |&p| (DescriptorId(child as u32), p))
        })
    }

    pub fn rt_pairs(&self) -> impl Iterator<Item = (DescriptorId, DescriptorId)> + '_ {
        self.rt.iter().copied()
    }

    fn check(&self, d: DescriptorId) -> Result<(), ModelError> {
        if d.index() < self.descriptors.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownDescriptor(format!("#{}", d.index())))
        }
    }

    /// Broader terms (parents) of `d`. Possibly empty.
    pub fn broader(&self, d: DescriptorId) -> Result<&BTreeSet<DescriptorId>, ModelError> {
        self.check(d)?;
        Ok(&self.bt[d.index()])
    }

    /// Narrower terms (children) of `d`. Possibly empty.
    pub fn narrower(&self, d: DescriptorId) -> Result<&BTreeSet<DescriptorId>, ModelError> {
        self.check(d)?;
        Ok(&self.nt[d.index()])
    }

    /// Follow USE links from `d` until a preferred descriptor is reached.
    ///
    /// Chains are capped at [`USE_CHAIN_CAP`] hops; revisiting a descriptor
    /// or exceeding the cap is an [`ModelError::EquivalenceCycle`].
    pub fn resolve(&self, d: DescriptorId) -> Result<DescriptorId, ModelError> {
        self.check(d)?;
        let mut cur = d;
        let mut seen = BTreeSet::new();
        for _ in 0..=USE_CHAIN_CAP {
            let desc = &self.descriptors[cur.index()];
            match desc.use_target {
                None => return Ok(cur),
                Some(next) => {
                    if !seen.insert(cur) {
                        return Err(ModelError::EquivalenceCycle(desc.key.clone()));
                    }
                    cur = next;
                }
            }
        }
        Err(ModelError::EquivalenceCycle(
            self.descriptors[d.index()].key.clone(),
        ))
    }

    /// Transitive closure of the BT relation, excluding `d` itself.
    /// Visited-set traversal, so cyclic graphs terminate.
    pub fn ancestors(&self, d: DescriptorId) -> Result<BTreeSet<DescriptorId>, ModelError> {
        self.check(d)?;
        let mut seen: BTreeSet<DescriptorId> = BTreeSet::new();
        let mut queue: VecDeque<DescriptorId> = self.bt[d.index()].iter().copied().collect();
        while let Some(cur) = queue.pop_front() {
            if cur != d && seen.insert(cur) {
                for &p in &self.bt[cur.index()] {
                    if p != d && !seen.contains(&p) {
                        queue.push_back(p);
                    }
                }
            }
        }
        Ok(seen)
    }

    /// Minimal hop count from any of `tops` for every descriptor, via a
    /// multi-source breadth-first traversal downward along NT.
    ///
    /// Tops are level 0. Descriptors without a path from any top get level 0
    /// and the unreachable flag.
    pub fn levels(&self, tops: &BTreeSet<DescriptorId>) -> Result<LevelMap, ModelError> {
        if tops.is_empty() {
            return Err(ModelError::NoTopTerms);
        }
        for &t in tops {
            self.check(t)?;
        }
        let n = self.descriptors.len();
        let mut levels = vec![0u32; n];
        let mut reached = vec![false; n];
        let mut queue = VecDeque::new();
        for &t in tops {
            if !reached[t.index()] {
                reached[t.index()] = true;
                queue.push_back(t);
            }
        }
        while let Some(cur) = queue.pop_front() {
            let next_level = levels[cur.index()] + 1;
            for &child in &self.nt[cur.index()] {
                if !reached[child.index()] {
                    reached[child.index()] = true;
                    levels[child.index()] = next_level;
                    queue.push_back(child);
                }
            }
        }
        let unreachable = reached.iter().map(|&r| !r).collect();
        Ok(LevelMap {
            levels,
            unreachable,
        })
    }

    /// One minimal-length BT path from `d` to a top term, inclusive on both
    /// ends. Among equal-length paths the lexicographically smallest label
    /// sequence wins, so output is deterministic.
    pub fn shortest_path_to_top(
        &self,
        d: DescriptorId,
        tops: &BTreeSet<DescriptorId>,
    ) -> Result<Vec<DescriptorId>, ModelError> {
        self.check(d)?;
        let levels = self.levels(tops)?;
        if levels.is_unreachable(d) {
            return Err(ModelError::Unreachable(
                self.descriptors[d.index()].key.clone(),
            ));
        }
        let mut path = vec![d];
        let mut cur = d;
        while !tops.contains(&cur) {
            let want = levels.level(cur) - 1;
            let next = self.bt[cur.index()]
                .iter()
                .copied()
                .filter(|&p| !levels.is_unreachable(p) && levels.level(p) == want)
                .min_by(|&a, &b| {
                    let da = &self.descriptors[a.index()];
                    let db = &self.descriptors[b.index()];
                    (&da.label, &da.key).cmp(&(&db.label, &db.key))
                })
                .expect("reachable non-top descriptor must have a parent one level up");
            path.push(next);
            cur = next;
        }
        Ok(path)
    }

    /// (BT edges + RT pairs + USE links) per descriptor. Close to one for a
    /// classification, zero for a flat tag list, higher for thesauri.
    pub fn relations_per_descriptor(&self) -> Result<Ratio, ModelError> {
        if self.descriptors.is_empty() {
            return Err(ModelError::EmptySystem);
        }
        Ok(Ratio {
            numerator: self.bt_edge_count() + self.rt_pair_count() + self.use_link_count(),
            denominator: self.descriptors.len() as u64,
        })
    }

    /// Full-scan structural health counts. Never rejects; see
    /// [`ValidationReport`].
    pub fn validate(&self) -> ValidationReport {
        let dangling = self.count_dangling();
        let cyclic = self.count_bt_cycle_members();
        let unreachable = if self.top_terms.is_empty() {
            self.descriptors.len() as u64
        } else {
            match self.levels(&self.top_terms) {
                Ok(map) => map.iter().filter(|&(_, _, u)| u).count() as u64,
                Err(_) => self.descriptors.len() as u64,
            }
        };
        let uncategorized = self
            .records
            .iter()
            .filter(|r| r.descriptors.is_empty())
            .count() as u64;
        ValidationReport {
            dangling_reference_count: dangling,
            bt_cycle_descriptor_count: cyclic,
            unreachable_descriptor_count: unreachable,
            uncategorized_record_count: uncategorized,
        }
    }

    fn count_dangling(&self) -> u64 {
        let n = self.descriptors.len();
        let mut dangling = 0u64;
        for r in &self.records {
            dangling += r.descriptors.iter().filter(|d| d.index() >= n).count() as u64;
        }
        for parents in &self.bt {
            dangling += parents.iter().filter(|d| d.index() >= n).count() as u64;
        }
        for &(a, b) in &self.rt {
            dangling += u64::from(a.index() >= n) + u64::from(b.index() >= n);
        }
        for d in &self.descriptors {
            if let Some(t) = d.use_target {
                dangling += u64::from(t.index() >= n);
            }
        }
        dangling
    }

    /// Descriptors on at least one BT cycle: members of strongly connected
    /// components of size >= 2, plus self-loop survivors. Iterative Tarjan.
    fn count_bt_cycle_members(&self) -> u64 {
        let n = self.descriptors.len();
        let mut index = vec![u32::MAX; n];
        let mut lowlink = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut next_index = 0u32;
        let mut cyclic = 0u64;

        // frame: (node, iterator position into its parent set)
        let mut call: Vec<(u32, usize)> = Vec::new();
        for start in 0..n as u32 {
            if index[start as usize] != u32::MAX {
                continue;
            }
            call.push((start, 0));
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                let vi = v as usize;
                if *pos == 0 {
                    index[vi] = next_index;
                    lowlink[vi] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[vi] = true;
                }
                let parents: Vec<u32> = self.bt[vi].iter().map(|p| p.0).collect();
                if *pos < parents.len() {
                    let w = parents[*pos];
                    *pos += 1;
                    let wi = w as usize;
                    if index[wi] == u32::MAX {
                        call.push((w, 0));
                    } else if on_stack[wi] {
                        lowlink[vi] = lowlink[vi].min(index[wi]);
                    }
                } else {
                    if lowlink[vi] == index[vi] {
                        let mut size = 0u64;
                        let mut has_self_loop = false;
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w as usize] = false;
                            size += 1;
                            if self.bt[w as usize].contains(&DescriptorId(w)) {
                                has_self_loop = true;
                            }
                            if w == v {
                                break;
                            }
                        }
                        if size >= 2 || has_self_loop {
                            cyclic += size;
                        }
                    }
                    call.pop();
                    if let Some(&mut (parent, _)) = call.last_mut() {
                        let pi = parent as usize;
                        lowlink[pi] = lowlink[pi].min(lowlink[vi]);
                    }
                }
            }
        }
        cyclic
    }
}

/// Single-writer constructor for [`IndexingSystem`].
///
/// Interns labels, keeps BT/NT inverse indices consistent, drops self-loops
/// with a counter, and materializes the virtual root when requested.
#[derive(Debug, Default)]
pub struct SystemBuilder {
    name: String,
    keys: Vec<String>,
    labels: Vec<String>,
    implicit: Vec<bool>,
    use_target: Vec<Option<u32>>,
    key_index: HashMap<String, u32>,
    records: Vec<(String, BTreeSet<u32>)>,
    record_index: HashMap<String, u32>,
    bt: Vec<BTreeSet<u32>>,
    rt: BTreeSet<(u32, u32)>,
    declared_tops: Vec<u32>,
    virtual_root: bool,
    stats: BuildStats,
}

impl SystemBuilder {
    pub fn new(name: &str) -> Self {
        SystemBuilder {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn set_virtual_root(&mut self, enabled: bool) {
        self.virtual_root = enabled;
    }

    pub fn stats(&self) -> &BuildStats {
        &self.stats
    }

    fn intern(&mut self, key: &str, implicit: bool) -> u32 {
        let norm = normalize_label(key);
        if let Some(&id) = self.key_index.get(&norm) {
            if !implicit {
                self.implicit[id as usize] = false;
            }
            return id;
        }
        let id = self.keys.len() as u32;
        self.key_index.insert(norm.clone(), id);
        self.labels.push(norm.clone());
        self.keys.push(norm);
        self.implicit.push(implicit);
        self.use_target.push(None);
        self.bt.push(BTreeSet::new());
        id
    }

    /// Create or promote a descriptor that is explicitly declared.
    pub fn declare_descriptor(&mut self, key: &str, label: Option<&str>) -> Result<(), BuildError> {
        let norm = normalize_label(key);
        if norm.is_empty() {
            return Err(BuildError::EmptyLabel);
        }
        let id = self.intern(&norm, false);
        if let Some(l) = label {
            let norm_label = normalize_label(l);
            if !norm_label.is_empty() {
                self.labels[id as usize] = norm_label;
            }
        }
        Ok(())
    }

    pub fn descriptor_exists(&self, key: &str) -> bool {
        self.key_index.contains_key(&normalize_label(key))
    }

    /// Reference a descriptor, creating it implicitly if new.
    pub fn descriptor(&mut self, key: &str) -> Result<u32, BuildError> {
        let norm = normalize_label(key);
        if norm.is_empty() {
            return Err(BuildError::EmptyLabel);
        }
        Ok(self.intern(&norm, true))
    }

    pub fn add_assignment(&mut self, record_label: &str, descriptor_key: &str) -> Result<(), BuildError> {
        let norm_rec = normalize_label(record_label);
        if norm_rec.is_empty() {
            return Err(BuildError::EmptyLabel);
        }
        let did = self.descriptor(descriptor_key)?;
        let rid = match self.record_index.get(&norm_rec) {
            Some(&r) => r,
            None => {
                let r = self.records.len() as u32;
                self.record_index.insert(norm_rec.clone(), r);
                self.records.push((norm_rec, BTreeSet::new()));
                r
            }
        };
        if !self.records[rid as usize].1.insert(did) {
            self.stats.duplicate_assignments += 1;
        }
        Ok(())
    }

    /// Ensure a record exists even if it carries no descriptors.
    pub fn add_record(&mut self, record_label: &str) -> Result<(), BuildError> {
        let norm = normalize_label(record_label);
        if norm.is_empty() {
            return Err(BuildError::EmptyLabel);
        }
        if !self.record_index.contains_key(&norm) {
            let r = self.records.len() as u32;
            self.record_index.insert(norm.clone(), r);
            self.records.push((norm, BTreeSet::new()));
        }
        Ok(())
    }

    pub fn add_bt(&mut self, child_key: &str, parent_key: &str) -> Result<(), BuildError> {
        let child = self.descriptor(child_key)?;
        let parent = self.descriptor(parent_key)?;
        if child == parent {
            self.stats.bt_self_loops_dropped += 1;
            return Ok(());
        }
        if !self.bt[child as usize].insert(parent) {
            self.stats.duplicate_bt_edges += 1;
        }
        Ok(())
    }

    pub fn add_rt(&mut self, a_key: &str, b_key: &str) -> Result<(), BuildError> {
        let a = self.descriptor(a_key)?;
        let b = self.descriptor(b_key)?;
        if a == b {
            self.stats.rt_self_loops_dropped += 1;
            return Ok(());
        }
        self.rt.insert((a.min(b), a.max(b)));
        Ok(())
    }

    /// Mark `from` as a non-preferred term whose preferred target is `to`.
    pub fn add_use(&mut self, from_key: &str, to_key: &str) -> Result<(), BuildError> {
        let from = self.descriptor(from_key)?;
        let to = self.descriptor(to_key)?;
        if from == to {
            self.stats.equivalence_self_loops_dropped += 1;
            return Ok(());
        }
        match self.use_target[from as usize] {
            None => self.use_target[from as usize] = Some(to),
            Some(existing) if existing == to => {}
            Some(_) => self.stats.redirect_conflicts += 1,
        }
        Ok(())
    }

    pub fn add_top_term(&mut self, key: &str) -> Result<(), BuildError> {
        let id = self.descriptor(key)?;
        if !self.declared_tops.contains(&id) {
            self.declared_tops.push(id);
        }
        Ok(())
    }

    /// Finish construction: build the NT index, pick top terms (declared, or
    /// the preferred parentless descriptors), materialize the virtual root
    /// when requested and more than one root exists, and run validation.
    pub fn build(mut self) -> BuiltSystem {
        if self.virtual_root {
            let roots: Vec<u32> = (0..self.keys.len() as u32)
                .filter(|&d| {
                    self.bt[d as usize].is_empty() && self.use_target[d as usize].is_none()
                })
                .collect();
            if roots.len() >= 2 {
                let root = self.intern(VIRTUAL_ROOT_KEY, false);
                for r in roots {
                    self.bt[r as usize].insert(root);
                }
                self.declared_tops = vec![root];
            }
        }

        let n = self.keys.len();
        let tops: BTreeSet<DescriptorId> = if self.declared_tops.is_empty() {
            (0..n as u32)
                .filter(|&d| {
                    self.bt[d as usize].is_empty() && self.use_target[d as usize].is_none()
                })
                .map(DescriptorId)
                .collect()
        } else {
            self.declared_tops
                .iter()
                .map(|&d| DescriptorId(d))
                .collect()
        };

        let mut nt: Vec<BTreeSet<DescriptorId>> = vec![BTreeSet::new(); n];
        let bt: Vec<BTreeSet<DescriptorId>> = self
            .bt
            .iter()
            .map(|parents| parents.iter().map(|&p| DescriptorId(p)).collect())
            .collect();
        for (child, parents) in bt.iter().enumerate() {
            for &p in parents {
                nt[p.index()].insert(DescriptorId(child as u32));
            }
        }

        let descriptors: Vec<Descriptor> = (0..n)
            .map(|i| Descriptor {
                id: DescriptorId(i as u32),
                key: self.keys[i].clone(),
                label: self.labels[i].clone(),
                preferred: self.use_target[i].is_none(),
                use_target: self.use_target[i].map(DescriptorId),
                implicit: self.implicit[i],
            })
            .collect();
        let records: Vec<Record> = self
            .records
            .iter()
            .enumerate()
            .map(|(i, (label, set))| Record {
                id: RecordId(i as u32),
                label: label.clone(),
                descriptors: set.iter().map(|&d| DescriptorId(d)).collect(),
            })
            .collect();

        let key_index: HashMap<String, DescriptorId> = self
            .key_index
            .iter()
            .map(|(k, &v)| (k.clone(), DescriptorId(v)))
            .collect();
        let record_index: HashMap<String, RecordId> = self
            .record_index
            .iter()
            .map(|(k, &v)| (k.clone(), RecordId(v)))
            .collect();

        let system = IndexingSystem {
            name: self.name,
            descriptors,
            records,
            bt,
            nt,
            rt: self
                .rt
                .iter()
                .map(|&(a, b)| (DescriptorId(a), DescriptorId(b)))
                .collect(),
            top_terms: tops,
            virtual_root: self.virtual_root,
            key_index,
            record_index,
        };
        let validation = system.validate();
        BuiltSystem {
            system,
            validation,
            stats: self.stats,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("empty label after whitespace trimming")]
    EmptyLabel,
}

/// A finished system together with its validation report and build counters.
#[derive(Debug)]
pub struct BuiltSystem {
    pub system: IndexingSystem,
    pub validation: ValidationReport,
    pub stats: BuildStats,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_abc() -> IndexingSystem {
        // A -> B -> C, top = C
        let mut b = SystemBuilder::new("chain");
        b.add_bt("A", "B").unwrap();
        b.add_bt("B", "C").unwrap();
        b.add_top_term("C").unwrap();
        b.build().system
    }

    #[test]
    fn normalize_collapses_whitespace() {
        assert_eq!(normalize_label("  Earth's   moon \t"), "Earth's moon");
        assert_eq!(normalize_label("Moon"), "Moon");
        assert_eq!(normalize_label("   "), "");
    }

    #[test]
    fn validate_acyclic_chain() {
        let sys = chain_abc();
        let v = sys.validate();
        assert_eq!(v.bt_cycle_descriptor_count, 0);
        assert_eq!(v.unreachable_descriptor_count, 0);
        assert_eq!(v.dangling_reference_count, 0);
    }

    #[test]
    fn validate_two_cycle_with_separate_top() {
        // A BT B and B BT A, top = separate node T
        let mut b = SystemBuilder::new("cyc");
        b.add_bt("A", "B").unwrap();
        b.add_bt("B", "A").unwrap();
        b.declare_descriptor("T", None).unwrap();
        b.add_top_term("T").unwrap();
        let sys = b.build().system;
        let v = sys.validate();
        assert_eq!(v.bt_cycle_descriptor_count, 2);
        assert_eq!(v.unreachable_descriptor_count, 2);
    }

    #[test]
    fn resolve_identity_and_chain() {
        let mut b = SystemBuilder::new("use");
        b.add_use("Carcinoma", "Neoplasms").unwrap();
        let sys = b.build().system;
        let car = sys.lookup("Carcinoma").unwrap();
        let neo = sys.lookup("Neoplasms").unwrap();
        assert_eq!(sys.resolve(car).unwrap(), neo);
        assert_eq!(sys.resolve(neo).unwrap(), neo);
    }

    #[test]
    fn resolve_two_cycle_errors() {
        let mut b = SystemBuilder::new("use-cycle");
        b.add_use("A", "B").unwrap();
        b.add_use("B", "A").unwrap();
        let sys = b.build().system;
        let a = sys.lookup("A").unwrap();
        assert!(matches!(
            sys.resolve(a),
            Err(ModelError::EquivalenceCycle(_))
        ));
    }

    #[test]
    fn resolve_is_idempotent() {
        let mut b = SystemBuilder::new("use");
        b.add_use("x", "y").unwrap();
        b.add_use("y", "z").unwrap();
        let sys = b.build().system;
        for d in sys.descriptors() {
            let once = sys.resolve(d.id).unwrap();
            assert_eq!(sys.resolve(once).unwrap(), once);
        }
    }

    #[test]
    fn broader_narrower_diamond() {
        // A -> {B, C}, B -> D, C -> D
        let mut b = SystemBuilder::new("diamond");
        b.add_bt("A", "B").unwrap();
        b.add_bt("A", "C").unwrap();
        b.add_bt("B", "D").unwrap();
        b.add_bt("C", "D").unwrap();
        let sys = b.build().system;
        let a = sys.lookup("A").unwrap();
        let bid = sys.lookup("B").unwrap();
        let c = sys.lookup("C").unwrap();
        let d = sys.lookup("D").unwrap();
        assert_eq!(
            sys.broader(a).unwrap().iter().copied().collect::<Vec<_>>(),
            vec![bid, c]
        );
        let narrower_d: Vec<_> = sys.narrower(d).unwrap().iter().copied().collect();
        assert_eq!(narrower_d, vec![bid, c]);
        assert!(sys.broader(d).unwrap().is_empty());
    }

    #[test]
    fn ancestors_chain_and_cycle() {
        let sys = chain_abc();
        let a = sys.lookup("A").unwrap();
        let anc = sys.ancestors(a).unwrap();
        let labels: Vec<&str> = anc.iter().map(|&d| sys.descriptor(d).key.as_str()).collect();
        assert_eq!(labels, vec!["B", "C"]);

        // 2-cycle B <-> C with A -> B: ancestors(A) = {B, C}, terminates
        let mut b = SystemBuilder::new("cyc");
        b.add_bt("A", "B").unwrap();
        b.add_bt("B", "C").unwrap();
        b.add_bt("C", "B").unwrap();
        let sys = b.build().system;
        let a = sys.lookup("A").unwrap();
        let anc = sys.ancestors(a).unwrap();
        assert_eq!(anc.len(), 2);
    }

    #[test]
    fn levels_chain_and_diamond() {
        let sys = chain_abc();
        let tops: BTreeSet<_> = [sys.lookup("C").unwrap()].into_iter().collect();
        let lv = sys.levels(&tops).unwrap();
        assert_eq!(lv.level(sys.lookup("C").unwrap()), 0);
        assert_eq!(lv.level(sys.lookup("B").unwrap()), 1);
        assert_eq!(lv.level(sys.lookup("A").unwrap()), 2);

        // diamond: top -> {B, C}, B -> D, C -> D, plus top -> E -> F -> D
        // (BT edges point child -> parent)
        let mut b = SystemBuilder::new("diamond");
        for (child, parent) in [
            ("B", "top"),
            ("C", "top"),
            ("D", "B"),
            ("D", "C"),
            ("E", "top"),
            ("F", "E"),
            ("D", "F"),
        ] {
            b.add_bt(child, parent).unwrap();
        }
        b.add_top_term("top").unwrap();
        let sys = b.build().system;
        let tops: BTreeSet<_> = [sys.lookup("top").unwrap()].into_iter().collect();
        let lv = sys.levels(&tops).unwrap();
        assert_eq!(lv.level(sys.lookup("D").unwrap()), 2);
    }

    #[test]
    fn levels_unreachable_flagged_as_level_zero() {
        let mut b = SystemBuilder::new("orphan");
        b.add_bt("A", "B").unwrap();
        b.declare_descriptor("Orphan", None).unwrap();
        b.add_top_term("B").unwrap();
        let sys = b.build().system;
        let tops: BTreeSet<_> = [sys.lookup("B").unwrap()].into_iter().collect();
        let lv = sys.levels(&tops).unwrap();
        let orphan = sys.lookup("Orphan").unwrap();
        assert_eq!(lv.level(orphan), 0);
        assert!(lv.is_unreachable(orphan));
    }

    #[test]
    fn shortest_path_single_node_and_tie_break() {
        let sys = chain_abc();
        let tops: BTreeSet<_> = [sys.lookup("C").unwrap()].into_iter().collect();
        // top itself -> single-element path
        let p = sys
            .shortest_path_to_top(sys.lookup("C").unwrap(), &tops)
            .unwrap();
        assert_eq!(p.len(), 1);

        // two equal-length paths via B and C -> path through B
        let mut b = SystemBuilder::new("tie");
        b.add_bt("A", "C").unwrap();
        b.add_bt("A", "B").unwrap();
        b.add_bt("B", "T").unwrap();
        b.add_bt("C", "T").unwrap();
        b.add_top_term("T").unwrap();
        let sys = b.build().system;
        let tops: BTreeSet<_> = [sys.lookup("T").unwrap()].into_iter().collect();
        let p = sys
            .shortest_path_to_top(sys.lookup("A").unwrap(), &tops)
            .unwrap();
        let labels: Vec<&str> = p.iter().map(|&d| sys.descriptor(d).label.as_str()).collect();
        assert_eq!(labels, vec!["A", "B", "T"]);
    }

    #[test]
    fn shortest_path_unreachable_errors() {
        let mut b = SystemBuilder::new("orphan");
        b.add_bt("A", "B").unwrap();
        b.declare_descriptor("X", None).unwrap();
        b.add_top_term("B").unwrap();
        let sys = b.build().system;
        let tops: BTreeSet<_> = [sys.lookup("B").unwrap()].into_iter().collect();
        assert!(matches!(
            sys.shortest_path_to_top(sys.lookup("X").unwrap(), &tops),
            Err(ModelError::Unreachable(_))
        ));
    }

    #[test]
    fn relations_per_descriptor_tree_and_flat() {
        // perfect binary tree of 7 nodes: 6 BT edges / 7 descriptors
        let mut b = SystemBuilder::new("tree7");
        for (child, parent) in [
            ("n2", "n1"),
            ("n3", "n1"),
            ("n4", "n2"),
            ("n5", "n2"),
            ("n6", "n3"),
            ("n7", "n3"),
        ] {
            b.add_bt(child, parent).unwrap();
        }
        let sys = b.build().system;
        let r = sys.relations_per_descriptor().unwrap();
        assert_eq!((r.numerator, r.denominator), (6, 7));
        assert!((r.to_f64() - 6.0 / 7.0).abs() < 1e-12);

        let mut b = SystemBuilder::new("flat");
        b.add_assignment("post1", "blog").unwrap();
        let sys = b.build().system;
        let r = sys.relations_per_descriptor().unwrap();
        assert_eq!(r.numerator, 0);
    }

    #[test]
    fn relations_per_descriptor_empty_system_errors() {
        let sys = SystemBuilder::new("empty").build().system;
        assert_eq!(
            sys.relations_per_descriptor(),
            Err(ModelError::EmptySystem)
        );
    }

    #[test]
    fn nt_is_exact_inverse_of_bt() {
        let mut b = SystemBuilder::new("audit");
        for (c, p) in [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("d", "e")] {
            b.add_bt(c, p).unwrap();
        }
        let sys = b.build().system;
        for d in sys.descriptors() {
            for &p in sys.broader(d.id).unwrap() {
                assert!(sys.narrower(p).unwrap().contains(&d.id));
            }
            for &c in sys.narrower(d.id).unwrap() {
                assert!(sys.broader(c).unwrap().contains(&d.id));
            }
        }
    }

    #[test]
    fn builder_drops_self_loops_and_counts_duplicates() {
        let mut b = SystemBuilder::new("dirty");
        b.add_bt("X", "X").unwrap();
        b.add_bt("X", "Y").unwrap();
        b.add_bt("X", "Y").unwrap();
        b.add_assignment("r", "t").unwrap();
        b.add_assignment("r", "t").unwrap();
        let built = b.build();
        assert_eq!(built.stats.bt_self_loops_dropped, 1);
        assert_eq!(built.stats.duplicate_bt_edges, 1);
        assert_eq!(built.stats.duplicate_assignments, 1);
        assert!(built.system.broader(built.system.lookup("X").unwrap())
            .unwrap()
            .len() == 1);
    }

    #[test]
    fn virtual_root_gathers_multiple_roots() {
        let mut b = SystemBuilder::new("forest");
        b.add_bt("a1", "r1").unwrap();
        b.add_bt("a2", "r2").unwrap();
        b.set_virtual_root(true);
        let built = b.build();
        let sys = &built.system;
        let root = sys.lookup(VIRTUAL_ROOT_KEY).unwrap();
        assert_eq!(sys.top_terms().len(), 1);
        assert!(sys.top_terms().contains(&root));
        let tops = sys.top_terms().clone();
        let lv = sys.levels(&tops).unwrap();
        assert_eq!(lv.level(sys.lookup("r1").unwrap()), 1);
        assert_eq!(lv.level(sys.lookup("a1").unwrap()), 2);
    }
}

//! Streaming parsers for the TSV input families and the bundle loader.
//!
//! Three source shapes feed one [`crate::model::IndexingSystem`]:
//!
//! * flat assignments (`record<TAB>descriptor`),
//! * wiki page/category links plus redirects (`pagecats.tsv`,
//!   `redirects.tsv`),
//! * classification trees (`classes.tsv` with
//!   `notation<TAB>caption<TAB>parent`).
//!
//! A bundle directory holds any subset of those files plus `meta.tsv`
//! (`name`, repeatable `top_term`, `virtual_root`), and optionally the
//! terminology files the export writes back (`descriptors.tsv`,
//! `relations.tsv`), so an exported system re-ingests losslessly.
//!
//! All files are strict UTF-8 with LF or CRLF endings; `#` starts a comment
//! line and blank lines are skipped. Invalid UTF-8 is a hard error.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

use crate::model::{
    normalize_label, BuildError, BuildStats, BuiltSystem, SystemBuilder,
};

/// Namespaces recognized when splitting wiki titles. Matching folds the
/// first letter of the candidate prefix only; the remainder of a title
/// stays case-sensitive.
#[derive(Clone, Debug)]
pub struct NamespaceSet {
    known: BTreeSet<String>,
    category: String,
}

impl Default for NamespaceSet {
    fn default() -> Self {
        NamespaceSet {
            known: ["Category", "Discussion"]
                .into_iter()
                .map(String::from)
                .collect(),
            category: "Category".to_string(),
        }
    }
}

impl NamespaceSet {
    pub fn with_namespaces<I: IntoIterator<Item = String>>(names: I) -> Self {
        let mut ns = NamespaceSet::default();
        ns.known.extend(names);
        ns
    }

    pub fn category_namespace(&self) -> &str {
        &self.category
    }

    fn canonical(&self, prefix: &str) -> Option<&str> {
        let folded = fold_first_letter(prefix);
        self.known.get(&folded).map(String::as_str)
    }
}

fn fold_first_letter(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// A wiki page title split into namespace and remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WikiTitle {
    /// Empty string means the main namespace.
    pub namespace: String,
    pub rest: String,
}

impl WikiTitle {
    /// The canonical full title: `namespace:rest`, or just `rest` in the
    /// main namespace.
    pub fn full(&self) -> String {
        if self.namespace.is_empty() {
            self.rest.clone()
        } else {
            format!("{}:{}", self.namespace, self.rest)
        }
    }

    pub fn is_main(&self) -> bool {
        self.namespace.is_empty()
    }
}

/// One `record<TAB>descriptor` line from an assignments file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentLine {
    pub record_label: String,
    pub descriptor_label: String,
    pub source_line: u64,
}

/// One `notation<TAB>caption<TAB>parent` line from a classification file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassLine {
    pub notation: String,
    pub caption: String,
    pub parent_notation: Option<String>,
}

/// Line bookkeeping for one parsed stream; the counts always reconcile:
/// `lines_read == data_lines + skipped_lines`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub lines_read: u64,
    pub data_lines: u64,
    /// Comment and blank lines.
    pub skipped_lines: u64,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: invalid UTF-8")]
    Utf8 { file: String, line: u64 },
    #[error("{file}:{line}: malformed line: {reason}")]
    MalformedLine {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("empty title")]
    EmptyTitle,
    #[error("notation '{notation}' repeated with a different parent")]
    MultipleParents { notation: String },
    #[error("unknown parent notation '{0}'")]
    UnknownParent(String),
    #[error("classification contains a parent cycle through '{0}'")]
    ClassificationCycle(String),
    #[error("unknown relation '{0}' (expected BT, RT or USE)")]
    UnknownRelation(String),
    #[error("top term '{0}' does not name a descriptor")]
    UnknownTopTerm(String),
    #[error("meta.tsv: invalid value for {key}: '{value}'")]
    InvalidMeta { key: String, value: String },
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Split a raw (optionally `[[...]]`-wrapped) title into namespace and rest.
///
/// The prefix before the first colon is treated as a namespace only when it
/// is in `namespaces`; anything else keeps the colon in the remainder.
pub fn parse_wiki_title(raw: &str, namespaces: &NamespaceSet) -> Result<WikiTitle, IngestError> {
    let mut s = raw.trim();
    if let Some(stripped) = s.strip_prefix("[[").and_then(|t| t.strip_suffix("]]")) {
        s = stripped.trim();
    }
    if s.is_empty() {
        return Err(IngestError::EmptyTitle);
    }
    if let Some(colon) = s.find(':') {
        let prefix = s[..colon].trim();
        let rest = s[colon + 1..].trim();
        if let Some(canon) = namespaces.canonical(prefix) {
            if rest.is_empty() {
                return Err(IngestError::EmptyTitle);
            }
            return Ok(WikiTitle {
                namespace: canon.to_string(),
                rest: rest.to_string(),
            });
        }
    }
    Ok(WikiTitle {
        namespace: String::new(),
        rest: s.to_string(),
    })
}

/// Iterate the data lines of a TSV stream, validating UTF-8 per line and
/// skipping comments and blanks.
fn for_each_line<R: Read>(
    reader: R,
    file: &str,
    stats: &mut ParseStats,
    mut f: impl FnMut(u64, &str) -> Result<(), IngestError>,
) -> Result<(), IngestError> {
    let mut buf = BufReader::new(reader);
    let mut bytes: Vec<u8> = Vec::new();
    let mut line_no = 0u64;
    loop {
        bytes.clear();
        let n = buf.read_until(b'\n', &mut bytes).map_err(|e| IngestError::Io {
            file: file.to_string(),
            source: e,
        })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        stats.lines_read += 1;
        if bytes.last() == Some(&b'\n') {
            bytes.pop();
        }
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
        let line = std::str::from_utf8(&bytes).map_err(|_| IngestError::Utf8 {
            file: file.to_string(),
            line: line_no,
        })?;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            stats.skipped_lines += 1;
            continue;
        }
        stats.data_lines += 1;
        f(line_no, line)?;
    }
    Ok(())
}

fn split_tab<'a>(
    line: &'a str,
    want: usize,
    file: &str,
    line_no: u64,
) -> Result<Vec<&'a str>, IngestError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != want {
        return Err(IngestError::MalformedLine {
            file: file.to_string(),
            line: line_no,
            reason: format!("expected {} tab-separated fields, found {}", want, fields.len()),
        });
    }
    Ok(fields)
}

fn non_empty<'a>(
    field: &'a str,
    what: &str,
    file: &str,
    line_no: u64,
) -> Result<&'a str, IngestError> {
    let t = field.trim();
    if t.is_empty() {
        return Err(IngestError::MalformedLine {
            file: file.to_string(),
            line: line_no,
            reason: format!("empty {}", what),
        });
    }
    Ok(t)
}

/// Parse a flat assignments stream (`record<TAB>descriptor`).
pub fn parse_assignments<R: Read>(
    reader: R,
    file: &str,
) -> Result<(Vec<AssignmentLine>, ParseStats), IngestError> {
    let mut out = Vec::new();
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 2, file, line_no)?;
        let record = non_empty(fields[0], "record", file, line_no)?;
        let descriptor = non_empty(fields[1], "descriptor", file, line_no)?;
        out.push(AssignmentLine {
            record_label: record.to_string(),
            descriptor_label: descriptor.to_string(),
            source_line: line_no,
        });
        Ok(())
    })?;
    Ok((out, stats))
}

/// One interpreted line of a `pagecats.tsv` stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PagecatLine {
    /// A page outside the category namespace tagged with a category.
    Assignment {
        record_label: String,
        main_namespace: bool,
        descriptor: String,
    },
    /// A category page tagged with a category: a BT edge, child to parent.
    BtEdge { child: String, parent: String },
}

/// Parse a `page_title<TAB>category_name` stream. Category pages produce BT
/// edges; everything else produces record assignments.
pub fn parse_pagecats<R: Read>(
    reader: R,
    file: &str,
    namespaces: &NamespaceSet,
) -> Result<(Vec<PagecatLine>, ParseStats), IngestError> {
    let mut out = Vec::new();
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 2, file, line_no)?;
        let raw_title = non_empty(fields[0], "page title", file, line_no)?;
        let category = non_empty(fields[1], "category name", file, line_no)?;
        let title = parse_wiki_title(raw_title, namespaces).map_err(|_| {
            IngestError::MalformedLine {
                file: file.to_string(),
                line: line_no,
                reason: "empty page title".to_string(),
            }
        })?;
        if title.namespace == namespaces.category_namespace() {
            out.push(PagecatLine::BtEdge {
                child: title.rest,
                parent: category.to_string(),
            });
        } else {
            out.push(PagecatLine::Assignment {
                main_namespace: title.is_main(),
                record_label: title.full(),
                descriptor: category.to_string(),
            });
        }
        Ok(())
    })?;
    Ok((out, stats))
}

/// A redirect interpreted as an equivalence link when both ends are
/// category pages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UseLink {
    pub from: String,
    pub to: String,
}

/// Parse a `from_title<TAB>to_title` redirect stream. Redirects outside the
/// category namespace are counted and ignored.
pub fn parse_redirects<R: Read>(
    reader: R,
    file: &str,
    namespaces: &NamespaceSet,
) -> Result<(Vec<UseLink>, u64, ParseStats), IngestError> {
    let mut out = Vec::new();
    let mut ignored = 0u64;
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 2, file, line_no)?;
        let from = parse_wiki_title(
            non_empty(fields[0], "redirect source", file, line_no)?,
            namespaces,
        );
        let to = parse_wiki_title(
            non_empty(fields[1], "redirect target", file, line_no)?,
            namespaces,
        );
        match (from, to) {
            (Ok(f), Ok(t))
                if f.namespace == namespaces.category_namespace()
                    && t.namespace == namespaces.category_namespace() =>
            {
                out.push(UseLink {
                    from: f.rest,
                    to: t.rest,
                });
            }
            _ => ignored += 1,
        }
        Ok(())
    })?;
    Ok((out, ignored, stats))
}

/// Parse a classification stream (`notation<TAB>caption<TAB>parent`).
///
/// The result is guaranteed to be a forest: at most one parent per
/// notation, every parent declared, no parent cycles.
pub fn parse_classification<R: Read>(
    reader: R,
    file: &str,
) -> Result<(Vec<ClassLine>, ParseStats), IngestError> {
    let mut out: Vec<ClassLine> = Vec::new();
    let mut stats = ParseStats::default();
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 3, file, line_no)?;
        let notation = normalize_label(non_empty(fields[0], "notation", file, line_no)?);
        let caption = normalize_label(fields[1].trim());
        let parent = normalize_label(fields[2].trim());
        let parent = if parent.is_empty() { None } else { Some(parent) };
        if let Some(&idx) = seen.get(&notation) {
            if out[idx].parent_notation != parent {
                return Err(IngestError::MultipleParents { notation });
            }
            return Ok(());
        }
        seen.insert(notation.clone(), out.len());
        out.push(ClassLine {
            notation,
            caption,
            parent_notation: parent,
        });
        Ok(())
    })?;

    for class in &out {
        if let Some(p) = &class.parent_notation {
            if !seen.contains_key(p) {
                return Err(IngestError::UnknownParent(p.clone()));
            }
        }
    }
    // Parent pointers with all parents declared can still loop; walk each
    // chain with a step budget of the class count.
    for class in &out {
        let mut hops = 0usize;
        let mut cur = class;
        while let Some(p) = &cur.parent_notation {
            hops += 1;
            if hops > out.len() {
                return Err(IngestError::ClassificationCycle(class.notation.clone()));
            }
            cur = &out[seen[p]];
        }
    }
    Ok((out, stats))
}

/// A `subject<TAB>relation<TAB>object` line from a terminology file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationLine {
    pub subject: String,
    pub relation: Relation,
    pub object: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Bt,
    Rt,
    Use,
}

/// Parse a terminology relations stream (the format the export writes).
pub fn parse_relations<R: Read>(
    reader: R,
    file: &str,
) -> Result<(Vec<RelationLine>, ParseStats), IngestError> {
    let mut out = Vec::new();
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 3, file, line_no)?;
        let subject = non_empty(fields[0], "subject", file, line_no)?;
        let rel = non_empty(fields[1], "relation", file, line_no)?;
        let object = non_empty(fields[2], "object", file, line_no)?;
        let relation = match rel {
            "BT" => Relation::Bt,
            "RT" => Relation::Rt,
            "USE" => Relation::Use,
            other => return Err(IngestError::UnknownRelation(other.to_string())),
        };
        out.push(RelationLine {
            subject: subject.to_string(),
            relation,
            object: object.to_string(),
        });
        Ok(())
    })?;
    Ok((out, stats))
}

/// Parse a `key<TAB>label` descriptor declaration stream.
pub fn parse_descriptors<R: Read>(
    reader: R,
    file: &str,
) -> Result<(Vec<(String, String)>, ParseStats), IngestError> {
    let mut out = Vec::new();
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 2, file, line_no)?;
        let key = non_empty(fields[0], "key", file, line_no)?;
        let label = non_empty(fields[1], "label", file, line_no)?;
        out.push((key.to_string(), label.to_string()));
        Ok(())
    })?;
    Ok((out, stats))
}

/// Bundle metadata from `meta.tsv`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BundleMeta {
    pub name: Option<String>,
    pub top_terms: Vec<String>,
    pub virtual_root: Option<bool>,
}

pub fn parse_meta<R: Read>(reader: R, file: &str) -> Result<(BundleMeta, ParseStats), IngestError> {
    let mut meta = BundleMeta::default();
    let mut stats = ParseStats::default();
    for_each_line(reader, file, &mut stats, |line_no, line| {
        let fields = split_tab(line, 2, file, line_no)?;
        let key = non_empty(fields[0], "key", file, line_no)?;
        let value = non_empty(fields[1], "value", file, line_no)?;
        match key {
            "name" => meta.name = Some(value.to_string()),
            "top_term" => meta.top_terms.push(value.to_string()),
            "virtual_root" => {
                meta.virtual_root = Some(match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(IngestError::InvalidMeta {
                            key: "virtual_root".to_string(),
                            value: other.to_string(),
                        })
                    }
                })
            }
            other => {
                return Err(IngestError::InvalidMeta {
                    key: other.to_string(),
                    value: value.to_string(),
                })
            }
        }
        Ok(())
    })?;
    Ok((meta, stats))
}

/// Knobs for assembling parsed fragments into a system.
#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// System name; overrides `meta.tsv`.
    pub name: Option<String>,
    /// Top-term overrides; replace `meta.tsv` declarations when non-empty.
    pub top_terms: Vec<String>,
    /// Virtual-root override; `None` defers to `meta.tsv` (default false).
    pub virtual_root: Option<bool>,
    /// Keep only main-namespace pages as records.
    pub main_namespace_only: bool,
    pub namespaces: NamespaceSet,
}

/// Ingest counters across all files of one build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines_read: u64,
    pub data_lines: u64,
    pub skipped_lines: u64,
    pub ignored_redirects: u64,
    pub skipped_non_main_records: u64,
    pub build: BuildStats,
}

impl IngestStats {
    fn absorb(&mut self, s: ParseStats) {
        self.lines_read += s.lines_read;
        self.data_lines += s.data_lines;
        self.skipped_lines += s.skipped_lines;
    }
}

/// Parsed fragments waiting to be assembled.
#[derive(Clone, Debug, Default)]
pub struct Fragments {
    pub assignments: Vec<AssignmentLine>,
    pub pagecats: Vec<PagecatLine>,
    pub redirects: Vec<UseLink>,
    pub classes: Vec<ClassLine>,
    pub relations: Vec<RelationLine>,
    pub descriptors: Vec<(String, String)>,
    pub meta: BundleMeta,
}

/// Assemble fragments into a built system: labels interned, duplicates
/// collapsed with counters, NT index built, validation run.
pub fn build_system(
    fragments: &Fragments,
    options: &IngestOptions,
    stats: &mut IngestStats,
) -> Result<BuiltSystem, IngestError> {
    let name = options
        .name
        .clone()
        .or_else(|| fragments.meta.name.clone())
        .unwrap_or_else(|| "unnamed".to_string());
    let mut b = SystemBuilder::new(&name);

    for (key, label) in &fragments.descriptors {
        b.declare_descriptor(key, Some(label))?;
    }
    for class in &fragments.classes {
        let label = if class.caption.is_empty() {
            None
        } else {
            Some(class.caption.as_str())
        };
        b.declare_descriptor(&class.notation, label)?;
        if let Some(parent) = &class.parent_notation {
            b.add_bt(&class.notation, parent)?;
        }
    }
    for line in &fragments.pagecats {
        match line {
            PagecatLine::BtEdge { child, parent } => {
                b.declare_descriptor(child, None)?;
                b.add_bt(child, parent)?;
            }
            PagecatLine::Assignment {
                record_label,
                main_namespace,
                descriptor,
            } => {
                if options.main_namespace_only && !main_namespace {
                    stats.skipped_non_main_records += 1;
                } else {
                    b.add_assignment(record_label, descriptor)?;
                }
            }
        }
    }
    for link in &fragments.redirects {
        b.declare_descriptor(&link.from, None)?;
        b.add_use(&link.from, &link.to)?;
    }
    for a in &fragments.assignments {
        b.add_assignment(&a.record_label, &a.descriptor_label)?;
    }
    for r in &fragments.relations {
        match r.relation {
            Relation::Bt => b.add_bt(&r.subject, &r.object)?,
            Relation::Rt => b.add_rt(&r.subject, &r.object)?,
            Relation::Use => b.add_use(&r.subject, &r.object)?,
        }
    }

    let tops: &[String] = if options.top_terms.is_empty() {
        &fragments.meta.top_terms
    } else {
        &options.top_terms
    };
    for t in tops {
        // Declared tops must already exist; a typo here should not
        // silently create an empty descriptor.
        if b.descriptor_exists(t) {
            b.add_top_term(t)?;
        } else {
            return Err(IngestError::UnknownTopTerm(t.clone()));
        }
    }
    let virtual_root = options
        .virtual_root
        .or(fragments.meta.virtual_root)
        .unwrap_or(false);
    b.set_virtual_root(virtual_root);

    let built = b.build();
    stats.build = built.stats;
    Ok(built)
}

/// File names recognized inside a bundle directory.
pub const BUNDLE_FILES: &[&str] = &[
    "meta.tsv",
    "descriptors.tsv",
    "classes.tsv",
    "pagecats.tsv",
    "redirects.tsv",
    "assignments.tsv",
    "relations.tsv",
];

/// Load a bundle directory (any subset of the known files) into a system.
pub fn load_bundle(
    dir: &Path,
    options: &IngestOptions,
) -> Result<(BuiltSystem, IngestStats), IngestError> {
    let mut stats = IngestStats::default();
    let mut fragments = Fragments::default();

    let open = |name: &str| -> Result<Option<fs::File>, IngestError> {
        let path = dir.join(name);
        if path.is_file() {
            fs::File::open(&path)
                .map(Some)
                .map_err(|e| IngestError::Io {
                    file: path.display().to_string(),
                    source: e,
                })
        } else {
            Ok(None)
        }
    };

    if let Some(f) = open("meta.tsv")? {
        let (meta, s) = parse_meta(f, "meta.tsv")?;
        fragments.meta = meta;
        stats.absorb(s);
    }
    if let Some(f) = open("descriptors.tsv")? {
        let (d, s) = parse_descriptors(f, "descriptors.tsv")?;
        fragments.descriptors = d;
        stats.absorb(s);
    }
    if let Some(f) = open("classes.tsv")? {
        let (c, s) = parse_classification(f, "classes.tsv")?;
        fragments.classes = c;
        stats.absorb(s);
    }
    if let Some(f) = open("pagecats.tsv")? {
        let (p, s) = parse_pagecats(f, "pagecats.tsv", &options.namespaces)?;
        fragments.pagecats = p;
        stats.absorb(s);
    }
    if let Some(f) = open("redirects.tsv")? {
        let (r, ignored, s) = parse_redirects(f, "redirects.tsv", &options.namespaces)?;
        fragments.redirects = r;
        stats.ignored_redirects = ignored;
        stats.absorb(s);
    }
    if let Some(f) = open("assignments.tsv")? {
        let (a, s) = parse_assignments(f, "assignments.tsv")?;
        fragments.assignments = a;
        stats.absorb(s);
    }
    if let Some(f) = open("relations.tsv")? {
        let (r, s) = parse_relations(f, "relations.tsv")?;
        fragments.relations = r;
        stats.absorb(s);
    }

    let built = build_system(&fragments, options, &mut stats)?;
    Ok((built, stats))
}

/// A standalone statistics table: `x<TAB>count` or `x<TAB>label<TAB>count`
/// rows, with an optional trailing `total<TAB>N` line carrying the source
/// population when the table shows only part of it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TableFile {
    pub rows: Vec<TableRow>,
    pub declared_total: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub x: u32,
    pub label: Option<String>,
    pub count: u64,
}

impl TableFile {
    pub fn counts(&self) -> Vec<(u32, u64)> {
        self.rows.iter().map(|r| (r.x, r.count)).collect()
    }

    /// Total population behind the table: the declared total when present,
    /// otherwise the sum of the rows.
    pub fn population(&self) -> u64 {
        self.declared_total
            .unwrap_or_else(|| self.rows.iter().map(|r| r.count).sum())
    }
}

/// Load a statistics table from a TSV file.
pub fn load_table(path: &Path) -> Result<TableFile, IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::Io {
        file: path.display().to_string(),
        source: e,
    })?;
    let name = path.display().to_string();
    let mut table = TableFile::default();
    let mut stats = ParseStats::default();
    for_each_line(file, &name, &mut stats, |line_no, line| {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() == 2 && fields[0].trim() == "total" {
            let value = fields[1].trim();
            table.declared_total =
                Some(value.parse::<u64>().map_err(|_| IngestError::MalformedLine {
                    file: name.clone(),
                    line: line_no,
                    reason: format!("invalid total '{}'", value),
                })?);
            return Ok(());
        }
        let (x_str, label, count_str) = match fields.len() {
            2 => (fields[0], None, fields[1]),
            3 => (fields[0], Some(fields[1].trim().to_string()), fields[2]),
            n => {
                return Err(IngestError::MalformedLine {
                    file: name.clone(),
                    line: line_no,
                    reason: format!("expected 2 or 3 tab-separated fields, found {}", n),
                })
            }
        };
        let x = x_str
            .trim()
            .parse::<u32>()
            .map_err(|_| IngestError::MalformedLine {
                file: name.clone(),
                line: line_no,
                reason: format!("invalid integer '{}'", x_str.trim()),
            })?;
        let count = count_str
            .trim()
            .parse::<u64>()
            .map_err(|_| IngestError::MalformedLine {
                file: name.clone(),
                line: line_no,
                reason: format!("invalid count '{}'", count_str.trim()),
            })?;
        table.rows.push(TableRow { x, label, count });
        Ok(())
    })?;
    Ok(table)
}

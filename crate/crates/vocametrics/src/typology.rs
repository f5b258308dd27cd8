//! System typology and reporting: classify a system as classification,
//! flat tagging or thesaurus; assemble the full [`SystemReport`]; render it
//! as text, JSON or CSV; export ancestor graphs (DOT), terminologies (TSV)
//! and plot-ready series.
//!
//! Rendering is byte-deterministic: stable orderings everywhere, fit
//! parameters at four significant digits, integer percentages rounded half
//! up, and no timestamps (provenance is carried by input digests).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distfit::{
    fit_exponential, fit_normal, fit_power_law_ranks, fit_power_law_tail, normal_pdf,
    ExponentialFit, NormalFit, PowerLawFit,
};
use crate::metrics::{
    broader_terms_per_term, coverage, level_histogram, records_per_tag, tag_size_histogram,
    tags_per_record, Coverage, Histogram, LevelHistogram, MetricsOptions, RankTable,
};
use crate::model::{DescriptorId, IndexingSystem, Ratio, ValidationReport};

/// The three indexing-system families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexingKind {
    Classification,
    FlatTagging,
    Thesaurus,
}

impl IndexingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexingKind::Classification => "classification",
            IndexingKind::FlatTagging => "flat tagging",
            IndexingKind::Thesaurus => "thesaurus",
        }
    }
}

/// Verdict plus the structural facts it was decided on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemKind {
    pub kind: IndexingKind,
    pub evidence: KindEvidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindEvidence {
    pub has_hierarchy: bool,
    /// Single-parent and acyclic.
    pub is_forest: bool,
    pub single_parent_everywhere: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypologyError {
    #[error("system has no descriptors")]
    EmptySystem,
    #[error("unknown descriptor '{0}'")]
    UnknownDescriptor(String),
    #[error("report has no tables to plot")]
    MissingTable,
}

/// Classify a system by structure alone: no hierarchy is flat tagging, a
/// single-parent acyclic hierarchy is a classification, anything else is a
/// thesaurus. Fits describe, rules decide.
pub fn classify(system: &IndexingSystem) -> Result<SystemKind, TypologyError> {
    if system.descriptor_count() == 0 {
        return Err(TypologyError::EmptySystem);
    }
    let has_hierarchy = system.bt_edge_count() > 0;
    let single_parent_everywhere = system
        .descriptors()
        .all(|d| system.broader(d.id).map(|p| p.len() <= 1).unwrap_or(true));
    let acyclic = system.validate().bt_cycle_descriptor_count == 0;
    let is_forest = single_parent_everywhere && acyclic;
    let kind = if !has_hierarchy {
        IndexingKind::FlatTagging
    } else if is_forest {
        IndexingKind::Classification
    } else {
        IndexingKind::Thesaurus
    };
    Ok(SystemKind {
        kind,
        evidence: KindEvidence {
            has_hierarchy,
            is_forest,
            single_parent_everywhere,
        },
    })
}

/// Tag-size histogram together with the unused-descriptor count that was
/// excluded from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagSizes {
    pub histogram: Histogram,
    pub unused_descriptor_count: u64,
}

/// Every fit the report carries; absent when the data could not support it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFits {
    pub tags_exponential: Option<ExponentialFit>,
    pub tags_tail_power_law: Option<PowerLawFit>,
    pub broader_terms_exponential: Option<ExponentialFit>,
    pub rank_power_law: Option<PowerLawFit>,
    pub level_normal: Option<NormalFit>,
}

/// Self-contained analysis result: metrics, fits, typology verdict and
/// provenance. Renderable without the system it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system_name: String,
    pub tool_version: String,
    /// file name -> fnv1a64 content digest.
    pub input_digests: BTreeMap<String, String>,
    /// Every knob that shaped this report, including defaults.
    pub options: BTreeMap<String, String>,
    pub coverage: Coverage,
    pub validation: ValidationReport,
    pub kind: Option<SystemKind>,
    pub relations_per_descriptor: Option<Ratio>,
    pub tags_per_record: Option<Histogram>,
    pub records_per_tag: Option<RankTable>,
    pub tag_sizes: Option<TagSizes>,
    pub broader_terms: Option<Histogram>,
    pub levels: Option<LevelHistogram>,
    pub fits: ReportFits,
    pub notes: Vec<String>,
}

/// Knobs for report assembly; every field is echoed into the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub metrics: MetricsOptions,
    /// Drop the level-0 bucket before the normal fit. Reproducing published
    /// level statistics requires excluding roots and unreachable stragglers.
    pub exclude_level0: bool,
    pub exp_range: (u32, u32),
    pub rank_kmax: usize,
    pub tail_nmin: u32,
    pub tail_count_floor: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            metrics: MetricsOptions::default(),
            exclude_level0: true,
            exp_range: (1, 9),
            rank_kmax: 25,
            tail_nmin: 10,
            tail_count_floor: 5,
        }
    }
}

const LILLIEFORS_CAVEAT: &str = "KS p-value uses the classical asymptotic distribution \
although the normal parameters were fitted from the same sample (a Lilliefors setting); \
treat p as optimistic.";

/// Compute metrics and fits for a system and assemble the report.
/// Metrics that the system cannot support (no records, no hierarchy) are
/// simply absent; fit failures are noted rather than fatal.
pub fn build_report(system: &IndexingSystem, opts: &ReportOptions) -> SystemReport {
    let mut notes: Vec<String> = Vec::new();
    let mut fits = ReportFits::default();

    let tags = tags_per_record(system, &opts.metrics).ok();
    if let Some(h) = &tags {
        match fit_exponential(h, opts.exp_range.0, opts.exp_range.1) {
            Ok(f) => fits.tags_exponential = Some(f),
            Err(e) => notes.push(format!("tags-per-record exponential fit skipped: {e}")),
        }
        match fit_power_law_tail(h, opts.tail_nmin, opts.tail_count_floor) {
            Ok(f) => fits.tags_tail_power_law = Some(f),
            Err(e) => notes.push(format!("tags-per-record tail fit skipped: {e}")),
        }
    }

    let ranks = records_per_tag(system, Some(opts.rank_kmax), &opts.metrics).ok();
    if let Some(t) = &ranks {
        match fit_power_law_ranks(t, opts.rank_kmax) {
            Ok(f) => fits.rank_power_law = Some(f),
            Err(e) => notes.push(format!("rank power-law fit skipped: {e}")),
        }
    }

    let tag_sizes = tag_size_histogram(system, &opts.metrics)
        .ok()
        .map(|(histogram, unused_descriptor_count)| TagSizes {
            histogram,
            unused_descriptor_count,
        });

    let broader = broader_terms_per_term(system, &opts.metrics).ok();
    if let Some(h) = &broader {
        if h.bins.keys().any(|&b| b >= 1) {
            match fit_exponential(h, opts.exp_range.0, opts.exp_range.1) {
                Ok(f) => fits.broader_terms_exponential = Some(f),
                Err(e) => notes.push(format!("broader-terms exponential fit skipped: {e}")),
            }
        }
    }

    let levels = if system.top_terms().is_empty() {
        None
    } else {
        level_histogram(system, system.top_terms()).ok()
    };
    if let Some(lh) = &levels {
        match fit_normal(lh, opts.exclude_level0) {
            Ok(f) => {
                fits.level_normal = Some(f);
                notes.push(LILLIEFORS_CAVEAT.to_string());
            }
            Err(e) => notes.push(format!("level normal fit skipped: {e}")),
        }
    }

    let mut options = BTreeMap::new();
    options.insert("resolve_use".into(), opts.metrics.resolve_use.to_string());
    options.insert("exclude_level0".into(), opts.exclude_level0.to_string());
    options.insert(
        "exp_range".into(),
        format!("{}:{}", opts.exp_range.0, opts.exp_range.1),
    );
    options.insert("rank_kmax".into(), opts.rank_kmax.to_string());
    options.insert("tail_nmin".into(), opts.tail_nmin.to_string());
    options.insert("tail_count_floor".into(), opts.tail_count_floor.to_string());

    SystemReport {
        system_name: system.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_digests: BTreeMap::new(),
        options,
        coverage: coverage(system),
        validation: system.validate(),
        kind: classify(system).ok(),
        relations_per_descriptor: system.relations_per_descriptor().ok(),
        tags_per_record: tags,
        records_per_tag: ranks,
        tag_sizes,
        broader_terms: broader,
        levels,
        fits,
        notes,
    }
}

/// fnv1a64 over raw bytes; hex-printed for provenance digests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub fn digest_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

/// Format with `sig` significant digits; large magnitudes keep their
/// integer digits.
pub fn format_sig(x: f64, sig: u32) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", sig as usize - 1, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, x)
}

/// Integer percentage of `count` out of `total`, rounded half up. Exact
/// integer arithmetic, no float rounding surprises.
pub fn percent_round(count: u64, total: u64) -> u64 {
    if total == 0 {
        return 0;
    }
    ((200u128 * count as u128 + total as u128) / (2 * total as u128)) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

/// Render a histogram block with a percentage column and a sum line. The
/// percentage denominator is `population`, which exceeds the shown rows
/// when the table covers only part of its source (a declared total).
pub fn render_histogram_block(
    x_label: &str,
    rows: &[(u32, u64)],
    population: u64,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:>8}  {:>12}  {:>4}\n", x_label, "count", "%"));
    let mut shown = 0u64;
    for &(x, count) in rows {
        shown += count;
        out.push_str(&format!(
            "{:>8}  {:>12}  {:>3}%\n",
            x,
            count,
            percent_round(count, population)
        ));
    }
    out.push_str(&format!(
        "{:>8}  {} of {}  {:>3}%\n",
        "sum",
        shown,
        population,
        percent_round(shown, population)
    ));
    out
}

fn fit_line_exponential(f: &ExponentialFit) -> String {
    format!(
        "fit: exponential lambda = {}, intercept = {}, r^2 = {}, support [{}, {}], bins used {}\n",
        format_sig(f.lambda, 4),
        format_sig(f.intercept, 4),
        format_sig(f.r_squared, 4),
        f.support.0,
        f.support.1,
        f.bins_used
    )
}

fn fit_line_power_law(f: &PowerLawFit) -> String {
    format!(
        "fit: power law exponent = {}, intercept = {}, r^2 = {}, support [{}, {}], bins used {}\n",
        format_sig(f.exponent, 4),
        format_sig(f.intercept, 4),
        format_sig(f.r_squared, 4),
        f.support.0,
        f.support.1,
        f.bins_used
    )
}

fn fit_line_normal(f: &NormalFit) -> String {
    format!(
        "fit: normal mean = {}, sigma = {}, n = {}, KS statistic = {}, KS p = {}\n",
        format_sig(f.mean, 4),
        format_sig(f.sigma, 4),
        f.n,
        format_sig(f.ks_statistic, 4),
        format_sig(f.ks_p, 4)
    )
}

fn render_text(report: &SystemReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("vocametrics report: {}\n", report.system_name));
    out.push_str(&format!("tool version: {}\n", report.tool_version));
    for (file, digest) in &report.input_digests {
        out.push_str(&format!("input: {file} fnv1a64:{digest}\n"));
    }
    for (key, value) in &report.options {
        out.push_str(&format!("option: {key} = {value}\n"));
    }

    out.push_str("\n-- coverage --\n");
    let c = &report.coverage;
    out.push_str(&format!("records: {}\n", c.total_records));
    match c.ratio {
        Some(_) => out.push_str(&format!(
            "records with at least one descriptor: {} ({}%)\n",
            c.categorized_records,
            percent_round(c.categorized_records, c.total_records)
        )),
        None => out.push_str("records with at least one descriptor: n/a (no records)\n"),
    }
    out.push_str(&format!("descriptors: {}\n", c.descriptor_count));

    out.push_str("\n-- validation --\n");
    let v = &report.validation;
    out.push_str(&format!("dangling references: {}\n", v.dangling_reference_count));
    out.push_str(&format!(
        "descriptors on BT cycles: {}\n",
        v.bt_cycle_descriptor_count
    ));
    out.push_str(&format!(
        "descriptors unreachable from top terms: {}\n",
        v.unreachable_descriptor_count
    ));
    out.push_str(&format!(
        "uncategorized records: {}\n",
        v.uncategorized_record_count
    ));

    out.push_str("\n-- typology --\n");
    match &report.kind {
        Some(k) => {
            out.push_str(&format!("verdict: {}\n", k.kind.as_str()));
            out.push_str(&format!("has hierarchy: {}\n", k.evidence.has_hierarchy));
            out.push_str(&format!(
                "single parent everywhere: {}\n",
                k.evidence.single_parent_everywhere
            ));
            out.push_str(&format!("forest: {}\n", k.evidence.is_forest));
        }
        None => out.push_str("verdict: n/a (no descriptors)\n"),
    }
    if let Some(r) = &report.relations_per_descriptor {
        out.push_str(&format!(
            "relations per descriptor: {}/{} = {}\n",
            r.numerator,
            r.denominator,
            format_sig(r.to_f64(), 4)
        ));
    }

    if let Some(h) = &report.tags_per_record {
        out.push_str("\n-- descriptors per record --\n");
        let rows: Vec<(u32, u64)> = h.bins.iter().map(|(&n, &c)| (n, c)).collect();
        out.push_str(&render_histogram_block("tags", &rows, h.total));
        if let Some(f) = &report.fits.tags_exponential {
            out.push_str(&fit_line_exponential(f));
        }
        if let Some(f) = &report.fits.tags_tail_power_law {
            out.push_str(&fit_line_power_law(f));
        }
    }

    if let Some(t) = &report.records_per_tag {
        out.push_str("\n-- records per descriptor (most used first) --\n");
        out.push_str(&format!("{:>6}  {:>12}  label\n", "rank", "count"));
        for (i, e) in t.entries.iter().enumerate() {
            out.push_str(&format!("{:>6}  {:>12}  {}\n", i + 1, e.count, e.label));
        }
        out.push_str(&format!(
            "unused descriptors (zero records): {}\n",
            t.unused_descriptor_count
        ));
        if let Some(f) = &report.fits.rank_power_law {
            out.push_str(&fit_line_power_law(f));
        }
    }

    if let Some(ts) = &report.tag_sizes {
        out.push_str("\n-- descriptors by usage count --\n");
        let rows: Vec<(u32, u64)> = ts.histogram.bins.iter().map(|(&n, &c)| (n, c)).collect();
        out.push_str(&render_histogram_block("used by", &rows, ts.histogram.total));
    }

    if let Some(h) = &report.broader_terms {
        out.push_str("\n-- broader terms per term --\n");
        let rows: Vec<(u32, u64)> = h.bins.iter().map(|(&n, &c)| (n, c)).collect();
        out.push_str(&render_histogram_block("broader", &rows, h.total));
        if let Some(f) = &report.fits.broader_terms_exponential {
            out.push_str(&fit_line_exponential(f));
        }
    }

    if let Some(lh) = &report.levels {
        out.push_str("\n-- descriptor levels --\n");
        let rows: Vec<(u32, u64)> = lh.bins.iter().map(|(&n, &c)| (n, c)).collect();
        out.push_str(&render_histogram_block("level", &rows, lh.total));
        out.push_str(&format!(
            "unreachable descriptors counted in level 0: {}\n",
            lh.unreachable_in_level0
        ));
        if let Some(f) = &report.fits.level_normal {
            out.push_str(&fit_line_normal(f));
        }
    }

    out.push_str("\n-- indexing system typology --\n");
    out.push_str(&format!(
        "{:<16} {:<28} {:<28} {}\n",
        "kind", "tags per record", "broader terms per term", "levels"
    ));
    out.push_str(&format!(
        "{:<16} {:<28} {:<28} {}\n",
        "classification", "one primary class", "1 (tree)", "distributed normally"
    ));
    out.push_str(&format!(
        "{:<16} {:<28} {:<28} {}\n",
        "flat tagging", "exponential, power-law tail", "0 (no hierarchy)", "none"
    ));
    out.push_str(&format!(
        "{:<16} {:<28} {:<28} {}\n",
        "thesaurus", "exponential, power-law tail", "distributed exponentially", "distributed normally"
    ));
    if let Some(k) = &report.kind {
        out.push_str(&format!("this system: {}\n", k.kind.as_str()));
    }

    if !report.notes.is_empty() {
        out.push_str("\n-- notes --\n");
        for note in &report.notes {
            out.push_str(&format!("note: {note}\n"));
        }
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn render_csv(report: &SystemReport) -> String {
    let mut out = String::new();
    out.push_str("#table,key,value\n");
    out.push_str(&format!(
        "meta,system_name,{}\n",
        csv_escape(&report.system_name)
    ));
    out.push_str(&format!("meta,tool_version,{}\n", report.tool_version));
    for (k, v) in &report.options {
        out.push_str(&format!("meta,option:{},{}\n", k, csv_escape(v)));
    }
    out.push_str(&format!("coverage,records,{}\n", report.coverage.total_records));
    out.push_str(&format!(
        "coverage,categorized_records,{}\n",
        report.coverage.categorized_records
    ));
    out.push_str(&format!(
        "coverage,descriptors,{}\n",
        report.coverage.descriptor_count
    ));
    if let Some(k) = &report.kind {
        out.push_str(&format!("typology,verdict,{}\n", k.kind.as_str()));
    }

    if let Some(h) = &report.tags_per_record {
        out.push_str("\n#table,tags_per_record\nn,count\n");
        for (&n, &c) in &h.bins {
            out.push_str(&format!("{n},{c}\n"));
        }
    }
    if let Some(t) = &report.records_per_tag {
        out.push_str("\n#table,records_per_tag\nrank,count,label\n");
        for (i, e) in t.entries.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, e.count, csv_escape(&e.label)));
        }
    }
    if let Some(ts) = &report.tag_sizes {
        out.push_str("\n#table,tag_sizes\nused_by,count\n");
        for (&n, &c) in &ts.histogram.bins {
            out.push_str(&format!("{n},{c}\n"));
        }
    }
    if let Some(h) = &report.broader_terms {
        out.push_str("\n#table,broader_terms_per_term\nbroader,count\n");
        for (&n, &c) in &h.bins {
            out.push_str(&format!("{n},{c}\n"));
        }
    }
    if let Some(lh) = &report.levels {
        out.push_str("\n#table,levels\nlevel,count\n");
        for (&n, &c) in &lh.bins {
            out.push_str(&format!("{n},{c}\n"));
        }
    }
    out
}

/// Render a report. Same report, same bytes, always.
pub fn render_report(report: &SystemReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Text => render_text(report).into_bytes(),
        ReportFormat::Json => {
            let mut bytes =
                serde_json::to_vec_pretty(report).expect("report serialization cannot fail");
            bytes.push(b'\n');
            bytes
        }
        ReportFormat::Csv => render_csv(report).into_bytes(),
    }
}

fn dot_escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// DOT digraph of `d` plus all its ancestors, BT edges child -> parent.
pub fn export_ancestor_graph(
    system: &IndexingSystem,
    d: DescriptorId,
) -> Result<String, TypologyError> {
    let ancestors = system
        .ancestors(d)
        .map_err(|_| TypologyError::UnknownDescriptor(format!("#{}", d.index())))?;
    let mut nodes: Vec<DescriptorId> = ancestors.iter().copied().collect();
    nodes.push(d);
    nodes.sort_by(|&a, &b| {
        let da = system.descriptor(a);
        let db = system.descriptor(b);
        (&da.label, &da.key).cmp(&(&db.label, &db.key))
    });
    nodes.dedup();

    let in_graph: std::collections::BTreeSet<DescriptorId> = nodes.iter().copied().collect();
    let mut edges: Vec<(String, String)> = Vec::new();
    for &node in &nodes {
        for &parent in system.broader(node).expect("node ids are in range") {
            if in_graph.contains(&parent) {
                edges.push((
                    system.descriptor(node).label.clone(),
                    system.descriptor(parent).label.clone(),
                ));
            }
        }
    }
    edges.sort();

    let mut out = String::from("digraph broader_terms {\n");
    for &node in &nodes {
        out.push_str(&format!("  \"{}\";\n", dot_escape(&system.descriptor(node).label)));
    }
    for (child, parent) in edges {
        out.push_str(&format!(
            "  \"{}\" -> \"{}\";\n",
            dot_escape(&child),
            dot_escape(&parent)
        ));
    }
    out.push_str("}\n");
    Ok(out)
}

/// The terminology export: relations plus the descriptor listing, both
/// sorted, both re-ingestable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminologyExport {
    /// `subject<TAB>relation<TAB>object` lines, relation in {BT, RT, USE}.
    pub relations: String,
    /// `key<TAB>label` lines.
    pub descriptors: String,
}

pub fn export_terminology(system: &IndexingSystem) -> TerminologyExport {
    let mut relation_lines: Vec<String> = Vec::new();
    for (child, parent) in system.bt_edges() {
        relation_lines.push(format!(
            "{}\tBT\t{}",
            system.descriptor(child).key,
            system.descriptor(parent).key
        ));
    }
    for (a, b) in system.rt_pairs() {
        let ka = &system.descriptor(a).key;
        let kb = &system.descriptor(b).key;
        let (s, o) = if ka <= kb { (ka, kb) } else { (kb, ka) };
        relation_lines.push(format!("{s}\tRT\t{o}"));
    }
    for d in system.descriptors() {
        if let Some(target) = d.use_target {
            relation_lines.push(format!(
                "{}\tUSE\t{}",
                d.key,
                system.descriptor(target).key
            ));
        }
    }
    relation_lines.sort();

    let mut descriptor_lines: Vec<String> = system
        .descriptors()
        .map(|d| format!("{}\t{}", d.key, d.label))
        .collect();
    descriptor_lines.sort();

    let mut relations = relation_lines.join("\n");
    if !relations.is_empty() {
        relations.push('\n');
    }
    let mut descriptors = descriptor_lines.join("\n");
    if !descriptors.is_empty() {
        descriptors.push('\n');
    }
    TerminologyExport {
        relations,
        descriptors,
    }
}

/// Write a system out as a bundle directory readable by the ingest layer:
/// `meta.tsv`, `descriptors.tsv`, `relations.tsv`, `assignments.tsv`.
pub fn write_bundle(system: &IndexingSystem, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let terminology = export_terminology(system);

    let mut meta = format!("name\t{}\n", system.name());
    // Top terms are only materialized when they differ from the natural
    // default (parentless preferred descriptors), keeping flat bundles lean.
    let natural: std::collections::BTreeSet<DescriptorId> = system
        .descriptors()
        .filter(|d| d.preferred && system.broader(d.id).map(|p| p.is_empty()).unwrap_or(false))
        .map(|d| d.id)
        .collect();
    if *system.top_terms() != natural {
        let mut tops: Vec<&str> = system
            .top_terms()
            .iter()
            .map(|&t| system.descriptor(t).key.as_str())
            .collect();
        tops.sort_unstable();
        for t in tops {
            meta.push_str(&format!("top_term\t{t}\n"));
        }
    }

    let mut assignments: Vec<String> = Vec::new();
    for record in system.records() {
        if record.descriptors.is_empty() {
            continue;
        }
        for &d in &record.descriptors {
            assignments.push(format!("{}\t{}", record.label, system.descriptor(d).key));
        }
    }
    assignments.sort();
    let mut assignments_text = assignments.join("\n");
    if !assignments_text.is_empty() {
        assignments_text.push('\n');
    }

    write_atomic(&dir.join("meta.tsv"), meta.as_bytes())?;
    write_atomic(&dir.join("descriptors.tsv"), terminology.descriptors.as_bytes())?;
    write_atomic(&dir.join("relations.tsv"), terminology.relations.as_bytes())?;
    write_atomic(&dir.join("assignments.tsv"), assignments_text.as_bytes())?;
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Plot-ready CSV series: (file name, CSV content) per table family, with a
/// fitted column when the corresponding fit is present.
pub fn emit_plot_data(report: &SystemReport) -> Result<Vec<(String, String)>, TypologyError> {
    let mut files: Vec<(String, String)> = Vec::new();

    if let Some(h) = &report.tags_per_record {
        let mut csv = String::from("n,count,fitted\n");
        for (&n, &c) in &h.bins {
            let fitted = report
                .fits
                .tags_exponential
                .map(|f| format_sig((f.intercept - f.lambda * n as f64).exp(), 6))
                .unwrap_or_default();
            csv.push_str(&format!("{n},{c},{fitted}\n"));
        }
        files.push(("tags_per_record.csv".to_string(), csv));
    }
    if let Some(t) = &report.records_per_tag {
        let mut csv = String::from("rank,count,fitted\n");
        for (i, e) in t.entries.iter().enumerate() {
            let rank = (i + 1) as f64;
            let fitted = report
                .fits
                .rank_power_law
                .map(|f| format_sig(f.intercept.exp() * rank.powf(-f.exponent), 6))
                .unwrap_or_default();
            csv.push_str(&format!("{},{},{}\n", i + 1, e.count, fitted));
        }
        files.push(("records_per_tag.csv".to_string(), csv));
    }
    if let Some(h) = &report.broader_terms {
        let mut csv = String::from("broader,count,fitted\n");
        for (&n, &c) in &h.bins {
            let fitted = report
                .fits
                .broader_terms_exponential
                .map(|f| format_sig((f.intercept - f.lambda * n as f64).exp(), 6))
                .unwrap_or_default();
            csv.push_str(&format!("{n},{c},{fitted}\n"));
        }
        files.push(("broader_terms_per_term.csv".to_string(), csv));
    }
    if let Some(lh) = &report.levels {
        let mut csv = String::from("level,count,fitted\n");
        for (&level, &c) in &lh.bins {
            let fitted = report
                .fits
                .level_normal
                .map(|f| format_sig(f.n as f64 * normal_pdf(level as f64, f.mean, f.sigma), 6))
                .unwrap_or_default();
            csv.push_str(&format!("{level},{c},{fitted}\n"));
        }
        files.push(("levels.csv".to_string(), csv));
    }

    if files.is_empty() {
        return Err(TypologyError::MissingTable);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemBuilder;

    fn flat() -> IndexingSystem {
        let mut b = SystemBuilder::new("flat");
        b.add_assignment("r1", "blog").unwrap();
        b.add_assignment("r2", "blog").unwrap();
        b.add_assignment("r2", "web").unwrap();
        b.build().system
    }

    fn tree() -> IndexingSystem {
        let mut b = SystemBuilder::new("tree");
        b.add_bt("59", "5").unwrap();
        b.add_bt("559", "59").unwrap();
        b.add_assignment("doc", "559").unwrap();
        b.build().system
    }

    fn poly() -> IndexingSystem {
        let mut b = SystemBuilder::new("poly");
        b.add_bt("Moon", "Moons").unwrap();
        b.add_bt("Moon", "Natural satellites").unwrap();
        b.add_bt("Moons", "Astronomical objects").unwrap();
        b.add_bt("Natural satellites", "Astronomical objects").unwrap();
        b.build().system
    }

    #[test]
    fn classify_three_kinds() {
        assert_eq!(classify(&flat()).unwrap().kind, IndexingKind::FlatTagging);
        assert_eq!(classify(&tree()).unwrap().kind, IndexingKind::Classification);
        assert_eq!(classify(&poly()).unwrap().kind, IndexingKind::Thesaurus);
    }

    #[test]
    fn classify_single_bt_edge_is_classification() {
        // the rule is applied literally: one BT edge among flat tags
        let mut b = SystemBuilder::new("edge");
        for i in 0..50 {
            b.add_assignment(&format!("r{i}"), &format!("t{i}")).unwrap();
        }
        b.add_bt("t1", "t2").unwrap();
        let sys = b.build().system;
        assert_eq!(classify(&sys).unwrap().kind, IndexingKind::Classification);
    }

    #[test]
    fn classify_cycle_is_thesaurus() {
        let mut b = SystemBuilder::new("cycle");
        b.add_bt("a", "b").unwrap();
        b.add_bt("b", "a").unwrap();
        let sys = b.build().system;
        let kind = classify(&sys).unwrap();
        assert_eq!(kind.kind, IndexingKind::Thesaurus);
        assert!(kind.evidence.single_parent_everywhere);
        assert!(!kind.evidence.is_forest);
    }

    #[test]
    fn classify_empty_errors() {
        let sys = SystemBuilder::new("empty").build().system;
        assert_eq!(classify(&sys), Err(TypologyError::EmptySystem));
    }

    #[test]
    fn render_is_deterministic_and_json_round_trips() {
        let report = build_report(&poly(), &ReportOptions::default());
        let a = render_report(&report, ReportFormat::Text);
        let b = render_report(&report, ReportFormat::Text);
        assert_eq!(a, b);

        let json = render_report(&report, ReportFormat::Json);
        let parsed: SystemReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(render_report(&parsed, ReportFormat::Json), json);
    }

    #[test]
    fn text_report_names_the_three_kinds() {
        let report = build_report(&flat(), &ReportOptions::default());
        let text = String::from_utf8(render_report(&report, ReportFormat::Text)).unwrap();
        assert!(text.contains("classification"));
        assert!(text.contains("flat tagging"));
        assert!(text.contains("thesaurus"));
        assert!(text.contains("this system: flat tagging"));
    }

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(percent_round(1, 200), 1); // 0.5% -> 1
        assert_eq!(percent_round(1, 201), 0); // 0.4975% -> 0
        assert_eq!(percent_round(281572, 923196), 30);
        assert_eq!(percent_round(52264, 923196), 6);
        assert_eq!(percent_round(0, 0), 0);
    }

    #[test]
    fn format_sig_four_digits() {
        assert_eq!(format_sig(0.574476, 4), "0.5745");
        assert_eq!(format_sig(5.69575, 4), "5.696");
        assert_eq!(format_sig(13.4627, 4), "13.46");
        assert_eq!(format_sig(0.0, 4), "0.000");
        assert_eq!(format_sig(-0.376809, 4), "-0.3768");
    }

    #[test]
    fn histogram_block_with_declared_population() {
        let rows = vec![(0u32, 5u64), (1, 3)];
        let block = render_histogram_block("tags", &rows, 10);
        assert!(block.contains("8 of 10"));
        assert!(block.contains("50%"));
        assert!(block.contains("30%"));
    }

    #[test]
    fn ancestor_graph_dot_output() {
        let sys = poly();
        let moon = sys.lookup("Moon").unwrap();
        let dot = export_ancestor_graph(&sys, moon).unwrap();
        assert!(dot.starts_with("digraph broader_terms {"));
        assert!(dot.contains("\"Moon\" -> \"Moons\";"));
        assert!(dot.contains("\"Moons\" -> \"Astronomical objects\";"));
        assert!(dot.ends_with("}\n"));

        // chain of three: 3 nodes, 2 edges
        let mut b = SystemBuilder::new("chain");
        b.add_bt("A", "B").unwrap();
        b.add_bt("B", "C").unwrap();
        let sys = b.build().system;
        let dot = export_ancestor_graph(&sys, sys.lookup("A").unwrap()).unwrap();
        assert_eq!(dot.matches(" -> ").count(), 2);
        assert_eq!(dot.matches(";\n").count(), 5);

        // no ancestors: single node, no edges
        let dot = export_ancestor_graph(&sys, sys.lookup("C").unwrap()).unwrap();
        assert_eq!(dot.matches(" -> ").count(), 0);
    }

    #[test]
    fn terminology_export_counts_and_sorting() {
        let mut b = SystemBuilder::new("terms");
        b.add_bt("Moons", "Astronomical objects").unwrap();
        b.add_rt("Moons", "Tides").unwrap();
        b.add_use("Earth's moon", "Moon").unwrap();
        let sys = b.build().system;
        let t = export_terminology(&sys);
        let lines: Vec<&str> = t.relations.lines().collect();
        assert_eq!(
            lines.len() as u64,
            sys.bt_edge_count() + sys.rt_pair_count() + sys.use_link_count()
        );
        assert!(lines.contains(&"Moons\tBT\tAstronomical objects"));
        assert!(lines.contains(&"Earth's moon\tUSE\tMoon"));
        let mut sorted = lines.clone();
        sorted.sort_unstable();
        assert_eq!(lines, sorted);
    }

    #[test]
    fn terminology_export_empty_system() {
        let sys = SystemBuilder::new("empty").build().system;
        let t = export_terminology(&sys);
        assert!(t.relations.is_empty());
        assert!(t.descriptors.is_empty());
    }

    #[test]
    fn plot_data_families() {
        let report = build_report(&flat(), &ReportOptions::default());
        let files = emit_plot_data(&report).unwrap();
        let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
        assert!(names.contains(&"tags_per_record.csv"));
        assert!(names.contains(&"records_per_tag.csv"));

        // rank series is monotone non-increasing in count
        let ranks = &files
            .iter()
            .find(|(n, _)| n == "records_per_tag.csv")
            .unwrap()
            .1;
        let counts: Vec<u64> = ranks
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]));

        // level series conserves the histogram total
        let report = build_report(&tree(), &ReportOptions::default());
        let files = emit_plot_data(&report).unwrap();
        if let Some((_, csv)) = files.iter().find(|(n, _)| n == "levels.csv") {
            let total: u64 = csv
                .lines()
                .skip(1)
                .map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap())
                .sum();
            assert_eq!(total, report.levels.as_ref().unwrap().total);
        }

        let empty_report = SystemReport {
            system_name: "x".into(),
            tool_version: "0".into(),
            input_digests: BTreeMap::new(),
            options: BTreeMap::new(),
            coverage: Coverage::default(),
            validation: ValidationReport::default(),
            kind: None,
            relations_per_descriptor: None,
            tags_per_record: None,
            records_per_tag: None,
            tag_sizes: None,
            broader_terms: None,
            levels: None,
            fits: ReportFits::default(),
            notes: Vec::new(),
        };
        assert_eq!(emit_plot_data(&empty_report), Err(TypologyError::MissingTable));
    }

    #[test]
    fn digests_are_stable() {
        assert_eq!(digest_hex(b""), format!("{:016x}", 0xcbf29ce484222325u64));
        assert_eq!(digest_hex(b"abc"), digest_hex(b"abc"));
        assert_ne!(digest_hex(b"abc"), digest_hex(b"abd"));
    }
}

//! Command-line front door: `analyze`, `fit`, `synth` and `path` wire the
//! ingest, metrics, fitting and typology layers into reproducible batch
//! runs.
//!
//! Exit codes: 0 success, 1 runtime failure (parse errors, fit failures,
//! unknown or unreachable descriptors), 2 usage errors. Outputs carry no
//! timestamps; identical inputs and flags give byte-identical files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::distfit::{fit_exponential, fit_growth, fit_normal, fit_power_law_pairs, fit_power_law_tail};
use crate::ingest::{load_bundle, load_table, IngestOptions};
use crate::metrics::{LevelHistogram, MetricsOptions};
use crate::model::normalize_label;
use crate::synthgen::{generate, GenSpec, Hierarchy};
use crate::typology::{
    build_report, digest_hex, emit_plot_data, export_ancestor_graph, format_sig,
    render_histogram_block, render_report, write_bundle, ReportFormat, ReportOptions,
};

const USAGE: &str = "\
vocametrics - structural analysis of subject-indexing systems

USAGE:
  vocametrics analyze <bundle-dir> --out <dir> [options]
  vocametrics fit <table.tsv> --family <exponential|powerlaw|tail|normal|growth> [options]
  vocametrics synth --out <dir> [options]
  vocametrics path <bundle-dir> <descriptor> [options]

ANALYZE
  Reads a bundle directory (meta.tsv plus any of assignments.tsv,
  pagecats.tsv, redirects.tsv, classes.tsv, relations.tsv,
  descriptors.tsv), writes report.txt, report.json, report.csv,
  validation.txt and plots/*.csv into --out.
    --top <TERM>          declare a top term (repeatable; overrides meta.tsv)
    --virtual-root <BOOL> add a synthetic top over multiple roots
    --resolve-use         fold non-preferred terms into their targets
    --include-level0      keep the level-0 bucket in the normal fit
    --exp-range <A:B>     exponential fit support (default 1:9)
    --rank-kmax <K>       rank power-law cutoff (default 25)
    --tail-min <N>        tail fit lower bound (default 10)
    --tail-floor <C>      tail fit minimum bin count (default 5)
    --main-namespace-only keep only main-namespace pages as records

FIT
  Fits one family to a two- or three-column TSV table
  (x<TAB>count or x<TAB>label<TAB>count; optional trailing total<TAB>N).
    --family <F>          exponential | powerlaw | tail | normal | growth
    --range <A:B>         support for exponential fits (default 1:9)
    --kmax <K>            rank cutoff for powerlaw (default 25)
    --tail-min <N>        lower bound for tail (default 10)
    --tail-floor <C>      minimum bin count for tail (default 5)
    --include-level0      keep level 0 in normal fits

SYNTH
  Writes a deterministic synthetic bundle.
    --out <DIR>           output bundle directory (required)
    --seed <N>            generator seed (default 1)
    --records <N>         record count (default 1000)
    --vocab <N>           vocabulary size (default 500)
    --tags-lambda <X>     tags-per-record exponential parameter (default 0.6)
    --pop-exponent <X>    tag popularity Zipf exponent (default 1.0)
    --hierarchy <H>       none | tree:<branching>,<depth> | dag:<lambda>
                          (default none)

PATH
  Prints the shortest broader-term path from a descriptor to a top term.
    --top <TERM>          declare a top term (repeatable)
    --virtual-root <BOOL> as in analyze
    --dot                 also print the ancestor graph in DOT format

Exit codes: 0 success, 1 runtime error, 2 usage error.
";

/// Everything parsed from the command line for one run.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub bundle: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub descriptor: Option<String>,
    pub family: Option<String>,
    pub tops: Vec<String>,
    pub virtual_root: Option<bool>,
    pub resolve_use: bool,
    pub include_level0: bool,
    pub main_namespace_only: bool,
    pub exp_range: (u32, u32),
    pub rank_kmax: usize,
    pub tail_nmin: u32,
    pub tail_count_floor: u64,
    pub dot: bool,
    pub seed: u64,
    pub records: u64,
    pub vocab: u64,
    pub tags_lambda: f64,
    pub pop_exponent: f64,
    pub hierarchy: Hierarchy,
}

impl RunConfig {
    fn new() -> Self {
        RunConfig {
            exp_range: (1, 9),
            rank_kmax: 25,
            tail_nmin: 10,
            tail_count_floor: 5,
            seed: 1,
            records: 1000,
            vocab: 500,
            tags_lambda: 0.6,
            pop_exponent: 1.0,
            hierarchy: Hierarchy::None,
            ..Default::default()
        }
    }

    fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            name: None,
            top_terms: self.tops.clone(),
            virtual_root: self.virtual_root,
            main_namespace_only: self.main_namespace_only,
            namespaces: Default::default(),
        }
    }

    fn report_options(&self) -> ReportOptions {
        ReportOptions {
            metrics: MetricsOptions {
                resolve_use: self.resolve_use,
            },
            exclude_level0: !self.include_level0,
            exp_range: self.exp_range,
            rank_kmax: self.rank_kmax,
            tail_nmin: self.tail_nmin,
            tail_count_floor: self.tail_count_floor,
        }
    }
}

enum ArgError {
    Usage(String),
}

fn parse_range(value: &str) -> Result<(u32, u32), ArgError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 2 {
        if let (Ok(a), Ok(b)) = (parts[0].parse(), parts[1].parse()) {
            if a <= b {
                return Ok((a, b));
            }
        }
    }
    Err(ArgError::Usage(format!("invalid range '{value}', expected A:B")))
}

fn parse_hierarchy(value: &str) -> Result<Hierarchy, ArgError> {
    if value == "none" {
        return Ok(Hierarchy::None);
    }
    if let Some(rest) = value.strip_prefix("tree:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            if let (Ok(b), Ok(d)) = (parts[0].parse(), parts[1].parse()) {
                return Ok(Hierarchy::Tree {
                    branching: b,
                    depth: d,
                });
            }
        }
    }
    if let Some(rest) = value.strip_prefix("dag:") {
        if let Ok(l) = rest.parse() {
            return Ok(Hierarchy::Dag { bt_lambda: l });
        }
    }
    Err(ArgError::Usage(format!(
        "invalid hierarchy '{value}', expected none, tree:B,D or dag:LAMBDA"
    )))
}

fn parse_flag<T: std::str::FromStr>(
    flag: &str,
    value: Option<String>,
) -> Result<T, ArgError> {
    let v = value.ok_or_else(|| ArgError::Usage(format!("{flag} needs a value")))?;
    v.parse()
        .map_err(|_| ArgError::Usage(format!("invalid value for {flag}: '{v}'")))
}

fn parse_args(args: &[String]) -> Result<(String, RunConfig), ArgError> {
    let mut config = RunConfig::new();
    let command = args
        .first()
        .cloned()
        .ok_or_else(|| ArgError::Usage("missing command".to_string()))?;
    let mut positional: Vec<String> = Vec::new();
    let mut it = args[1..].iter().cloned();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => config.out_dir = Some(PathBuf::from(parse_flag::<String>("--out", it.next())?)),
            "--top" => config.tops.push(parse_flag::<String>("--top", it.next())?),
            "--virtual-root" => {
                config.virtual_root = Some(parse_flag::<bool>("--virtual-root", it.next())?)
            }
            "--resolve-use" => config.resolve_use = true,
            "--include-level0" => config.include_level0 = true,
            "--main-namespace-only" => config.main_namespace_only = true,
            "--exp-range" | "--range" => {
                config.exp_range = parse_range(&parse_flag::<String>(&arg, it.next())?)?
            }
            "--rank-kmax" | "--kmax" => config.rank_kmax = parse_flag(&arg, it.next())?,
            "--tail-min" => config.tail_nmin = parse_flag("--tail-min", it.next())?,
            "--tail-floor" => config.tail_count_floor = parse_flag("--tail-floor", it.next())?,
            "--family" => config.family = Some(parse_flag::<String>("--family", it.next())?),
            "--dot" => config.dot = true,
            "--seed" => config.seed = parse_flag("--seed", it.next())?,
            "--records" => config.records = parse_flag("--records", it.next())?,
            "--vocab" => config.vocab = parse_flag("--vocab", it.next())?,
            "--tags-lambda" => config.tags_lambda = parse_flag("--tags-lambda", it.next())?,
            "--pop-exponent" => config.pop_exponent = parse_flag("--pop-exponent", it.next())?,
            "--hierarchy" => {
                config.hierarchy = parse_hierarchy(&parse_flag::<String>("--hierarchy", it.next())?)?
            }
            other if other.starts_with("--") => {
                return Err(ArgError::Usage(format!("unknown flag '{other}'")))
            }
            _ => positional.push(arg),
        }
    }

    match command.as_str() {
        "analyze" => {
            config.bundle = Some(PathBuf::from(positional.first().ok_or_else(|| {
                ArgError::Usage("analyze needs a bundle directory".to_string())
            })?));
            if config.out_dir.is_none() {
                return Err(ArgError::Usage("analyze needs --out <dir>".to_string()));
            }
        }
        "fit" => {
            config.table = Some(PathBuf::from(positional.first().ok_or_else(|| {
                ArgError::Usage("fit needs a table file".to_string())
            })?));
            if config.family.is_none() {
                return Err(ArgError::Usage("fit needs --family".to_string()));
            }
        }
        "synth" => {
            if config.out_dir.is_none() {
                return Err(ArgError::Usage("synth needs --out <dir>".to_string()));
            }
        }
        "path" => {
            if positional.len() < 2 {
                return Err(ArgError::Usage(
                    "path needs a bundle directory and a descriptor".to_string(),
                ));
            }
            config.bundle = Some(PathBuf::from(&positional[0]));
            config.descriptor = Some(positional[1].clone());
        }
        other => return Err(ArgError::Usage(format!("unknown command '{other}'"))),
    }
    Ok((command, config))
}

/// Run the CLI against already-split arguments (no program name) and return
/// the process exit code.
pub fn run(args: &[String]) -> i32 {
    if args.iter().any(|a| a == "--help" || a == "-h") || args.is_empty() {
        print!("{USAGE}");
        return if args.is_empty() { 2 } else { 0 };
    }
    let (command, config) = match parse_args(args) {
        Ok(parsed) => parsed,
        Err(ArgError::Usage(message)) => {
            eprintln!("error: {message}");
            eprint!("{USAGE}");
            return 2;
        }
    };
    match command.as_str() {
        "analyze" => cmd_analyze(&config),
        "fit" => cmd_fit(&config),
        "synth" => cmd_synth(&config),
        "path" => cmd_path(&config),
        _ => unreachable!("parse_args validated the command"),
    }
}

fn digest_bundle_inputs(dir: &Path) -> BTreeMap<String, String> {
    let mut digests = BTreeMap::new();
    for name in crate::ingest::BUNDLE_FILES {
        let path = dir.join(name);
        if let Ok(bytes) = std::fs::read(&path) {
            digests.insert(name.to_string(), digest_hex(&bytes));
        }
    }
    digests
}

/// End-to-end analysis of a bundle: ingest, metrics, fits, typology,
/// rendered to report files and plot CSVs.
pub fn cmd_analyze(config: &RunConfig) -> i32 {
    let bundle = config.bundle.as_ref().expect("validated by parse_args");
    let out_dir = config.out_dir.as_ref().expect("validated by parse_args");
    if !bundle.is_dir() {
        eprintln!("error: bundle directory '{}' not found", bundle.display());
        return 2;
    }
    let (built, stats) = match load_bundle(bundle, &config.ingest_options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let mut report = build_report(&built.system, &config.report_options());
    report.input_digests = digest_bundle_inputs(bundle);
    report.options.insert(
        "virtual_root".to_string(),
        config.virtual_root.unwrap_or(built.system.has_virtual_root()).to_string(),
    );
    report.options.insert(
        "main_namespace_only".to_string(),
        config.main_namespace_only.to_string(),
    );
    report.options.insert(
        "top_terms".to_string(),
        if config.tops.is_empty() {
            "(from bundle)".to_string()
        } else {
            config.tops.join(",")
        },
    );

    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create '{}': {e}", out_dir.display());
        return 1;
    }
    let writes: Vec<(PathBuf, Vec<u8>)> = vec![
        (out_dir.join("report.txt"), render_report(&report, ReportFormat::Text)),
        (out_dir.join("report.json"), render_report(&report, ReportFormat::Json)),
        (out_dir.join("report.csv"), render_report(&report, ReportFormat::Csv)),
        (
            out_dir.join("validation.txt"),
            format!(
                "dangling references: {}\ndescriptors on BT cycles: {}\ndescriptors unreachable from top terms: {}\nuncategorized records: {}\nduplicate assignments collapsed: {}\nBT self-loops dropped: {}\nredirects outside the category namespace ignored: {}\n",
                report.validation.dangling_reference_count,
                report.validation.bt_cycle_descriptor_count,
                report.validation.unreachable_descriptor_count,
                report.validation.uncategorized_record_count,
                stats.build.duplicate_assignments,
                stats.build.bt_self_loops_dropped,
                stats.ignored_redirects,
            )
            .into_bytes(),
        ),
    ];
    for (path, bytes) in writes {
        if let Err(e) = std::fs::write(&path, bytes) {
            eprintln!("error: cannot write '{}': {e}", path.display());
            return 1;
        }
    }
    match emit_plot_data(&report) {
        Ok(files) => {
            let plot_dir = out_dir.join("plots");
            if let Err(e) = std::fs::create_dir_all(&plot_dir) {
                eprintln!("error: cannot create '{}': {e}", plot_dir.display());
                return 1;
            }
            for (name, csv) in files {
                if let Err(e) = std::fs::write(plot_dir.join(&name), csv) {
                    eprintln!("error: cannot write plot '{name}': {e}");
                    return 1;
                }
            }
        }
        Err(_) => {
            // nothing to plot (empty system); the reports still exist
        }
    }
    println!(
        "analyzed '{}': {} records, {} descriptors -> {}",
        report.system_name,
        report.coverage.total_records,
        report.coverage.descriptor_count,
        out_dir.display()
    );
    0
}

/// Fit one distribution family to a standalone table file.
pub fn cmd_fit(config: &RunConfig) -> i32 {
    let path = config.table.as_ref().expect("validated by parse_args");
    let family = config.family.as_deref().expect("validated by parse_args");
    let table = match load_table(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let counts = table.counts();
    let hist = crate::metrics::Histogram::from_counts(counts.iter().copied());

    match family {
        "exponential" => {
            print!(
                "{}",
                render_histogram_block("n", &counts, table.population())
            );
            match fit_exponential(&hist, config.exp_range.0, config.exp_range.1) {
                Ok(f) => {
                    println!(
                        "exponential fit: lambda = {}, intercept = {}, r^2 = {}, support [{}, {}], bins used {}",
                        format_sig(f.lambda, 4),
                        format_sig(f.intercept, 4),
                        format_sig(f.r_squared, 4),
                        f.support.0,
                        f.support.1,
                        f.bins_used
                    );
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        "powerlaw" => match fit_power_law_pairs(&counts, config.rank_kmax as u32) {
            Ok(f) => {
                println!(
                    "power-law fit: exponent = {}, intercept = {}, r^2 = {}, support [{}, {}], bins used {}",
                    format_sig(f.exponent, 4),
                    format_sig(f.intercept, 4),
                    format_sig(f.r_squared, 4),
                    f.support.0,
                    f.support.1,
                    f.bins_used
                );
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        "tail" => match fit_power_law_tail(&hist, config.tail_nmin, config.tail_count_floor) {
            Ok(f) => {
                println!(
                    "tail power-law fit: exponent = {}, r^2 = {}, support [{}, {}], bins used {}",
                    format_sig(f.exponent, 4),
                    format_sig(f.r_squared, 4),
                    f.support.0,
                    f.support.1,
                    f.bins_used
                );
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        "normal" => {
            let levels = LevelHistogram {
                bins: hist.bins.clone(),
                total: hist.total,
                unreachable_in_level0: 0,
            };
            match fit_normal(&levels, !config.include_level0) {
                Ok(f) => {
                    println!(
                        "normal fit: mean = {}, sigma = {}, n = {}, KS statistic = {}, KS p = {}",
                        format_sig(f.mean, 4),
                        format_sig(f.sigma, 4),
                        f.n,
                        format_sig(f.ks_statistic, 4),
                        format_sig(f.ks_p, 4)
                    );
                    println!(
                        "note: p assumes fixed parameters; fitted parameters make it optimistic"
                    );
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    1
                }
            }
        }
        "growth" => match fit_growth(&counts) {
            Ok(f) => {
                println!(
                    "growth fit: rate = {} per step ({}%), r^2 = {}",
                    format_sig(f.monthly_rate, 4),
                    format_sig(f.monthly_rate * 100.0, 4),
                    format_sig(f.r_squared, 4)
                );
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        other => {
            eprintln!("error: unknown family '{other}'");
            2
        }
    }
}

/// Generate a deterministic synthetic bundle.
pub fn cmd_synth(config: &RunConfig) -> i32 {
    let out_dir = config.out_dir.as_ref().expect("validated by parse_args");
    let spec = GenSpec {
        seed: config.seed,
        record_count: config.records,
        vocab_size: config.vocab,
        tags_lambda: config.tags_lambda,
        popularity_exponent: config.pop_exponent,
        hierarchy: config.hierarchy,
    };
    let built = match generate(&spec) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = write_bundle(&built.system, out_dir) {
        eprintln!("error: cannot write bundle: {e}");
        return 1;
    }
    println!(
        "wrote bundle '{}': {} records, {} descriptors, seed {}",
        out_dir.display(),
        built.system.record_count(),
        built.system.descriptor_count(),
        config.seed
    );
    0
}

/// Print the shortest broader-term path from a descriptor to a top term.
pub fn cmd_path(config: &RunConfig) -> i32 {
    let bundle = config.bundle.as_ref().expect("validated by parse_args");
    let raw = config.descriptor.as_ref().expect("validated by parse_args");
    if !bundle.is_dir() {
        eprintln!("error: bundle directory '{}' not found", bundle.display());
        return 2;
    }
    let (built, _) = match load_bundle(bundle, &config.ingest_options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let sys = &built.system;
    let id = match sys.lookup(&normalize_label(raw)) {
        Some(id) => id,
        None => {
            eprintln!("error: unknown descriptor '{raw}'");
            return 1;
        }
    };
    let path = match sys.shortest_path_to_top(id, sys.top_terms()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    for d in &path {
        println!("{}", sys.descriptor(*d).label);
    }
    if config.dot {
        match export_ancestor_graph(sys, id) {
            Ok(dot) => print!("{dot}"),
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        }
    }
    0
}

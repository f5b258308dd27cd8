//! Full pipeline on a bundled sample: ingest a bundle directory, compute
//! metrics and fits, classify the system and print the text report.
//!
//! ```bash
//! cargo run --example analyze_bundle
//! cargo run --example analyze_bundle -- path/to/bundle
//! ```

use std::path::{Path, PathBuf};

use vocametrics::ingest::{load_bundle, IngestOptions};
use vocametrics::typology::{build_report, render_report, ReportFormat, ReportOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bundles/moon")
        });

    let (built, stats) = load_bundle(&bundle, &IngestOptions::default())?;
    eprintln!(
        "parsed {} lines ({} data, {} skipped), {} redirects ignored",
        stats.lines_read, stats.data_lines, stats.skipped_lines, stats.ignored_redirects
    );

    let report = build_report(&built.system, &ReportOptions::default());
    let text = render_report(&report, ReportFormat::Text);
    print!("{}", String::from_utf8(text)?);
    Ok(())
}

//! Graph operations on the moon sample: descriptor levels, ancestor sets,
//! the shortest broader-term path to a top term and its DOT rendering.
//!
//! ```bash
//! cargo run --example levels_and_paths
//! ```

use std::path::Path;

use vocametrics::ingest::{load_bundle, IngestOptions};
use vocametrics::metrics::level_histogram;
use vocametrics::typology::export_ancestor_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bundles/moon");
    let (built, _) = load_bundle(&bundle, &IngestOptions::default())?;
    let sys = built.system;

    let tops = sys.top_terms().clone();
    println!(
        "top terms: {}",
        tops.iter()
            .map(|&t| sys.descriptor(t).label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    let lh = level_histogram(&sys, &tops)?;
    println!("\nlevel histogram:");
    for (level, count) in &lh.bins {
        println!("  level {level}: {count} descriptors");
    }
    println!("  (unreachable, counted in level 0: {})", lh.unreachable_in_level0);

    let moon = sys.lookup("Moon").expect("fixture has the Moon category");
    let ancestors = sys.ancestors(moon)?;
    println!(
        "\nancestors of Moon: {}",
        ancestors
            .iter()
            .map(|&d| sys.descriptor(d).label.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    let path = sys.shortest_path_to_top(moon, &tops)?;
    println!("\nshortest path to a top term:");
    for d in &path {
        println!("  {}", sys.descriptor(*d).label);
    }

    println!("\nancestor graph in DOT:");
    print!("{}", export_ancestor_graph(&sys, moon)?);
    Ok(())
}

//! Terminology round-trip: export a system as a bundle directory, re-ingest
//! it, and confirm nothing was lost.
//!
//! ```bash
//! cargo run --example export_import
//! ```

use vocametrics::ingest::{load_bundle, IngestOptions};
use vocametrics::model::SystemBuilder;
use vocametrics::typology::{export_terminology, write_bundle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut b = SystemBuilder::new("round-trip-demo");
    b.add_bt("Moons", "Astronomical objects")?;
    b.add_bt("Moon", "Moons")?;
    b.add_rt("Moon", "Tides")?;
    b.add_use("Earth's moon", "Moon")?;
    b.add_assignment("Lunar eclipse", "Moon")?;
    let original = b.build().system;

    let terminology = export_terminology(&original);
    println!("relations.tsv:\n{}", terminology.relations);

    let dir = std::env::temp_dir().join("vocametrics-export-import-demo");
    let _ = std::fs::remove_dir_all(&dir);
    write_bundle(&original, &dir)?;
    println!("bundle written to {}", dir.display());

    let (reloaded, _) = load_bundle(&dir, &IngestOptions::default())?;
    let reloaded = reloaded.system;
    println!(
        "reloaded: {} records, {} descriptors, {} BT, {} RT, {} USE",
        reloaded.record_count(),
        reloaded.descriptor_count(),
        reloaded.bt_edge_count(),
        reloaded.rt_pair_count(),
        reloaded.use_link_count()
    );
    assert_eq!(export_terminology(&reloaded), terminology);
    println!("terminology identical after round-trip");

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

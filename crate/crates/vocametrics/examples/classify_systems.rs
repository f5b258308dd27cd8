//! Build the three canonical indexing-system shapes in code and watch the
//! classifier tell them apart.
//!
//! ```bash
//! cargo run --example classify_systems
//! ```

use vocametrics::model::{IndexingSystem, SystemBuilder};
use vocametrics::typology::classify;

fn flat_tagging() -> IndexingSystem {
    let mut b = SystemBuilder::new("bookmarks");
    b.add_assignment("post1", "blog").unwrap();
    b.add_assignment("post1", "web").unwrap();
    b.add_assignment("post2", "software").unwrap();
    b.add_assignment("post3", "blog").unwrap();
    b.build().system
}

fn classification() -> IndexingSystem {
    // strict tree: every class has exactly one parent
    let mut b = SystemBuilder::new("decimal-scheme");
    b.add_bt("59", "5").unwrap();
    b.add_bt("559", "59").unwrap();
    b.add_bt("559.9", "559").unwrap();
    b.add_bt("559.91", "559.9").unwrap();
    b.add_assignment("moon booklet", "559.91").unwrap();
    b.build().system
}

fn thesaurus() -> IndexingSystem {
    // poly-hierarchy plus related-term and equivalence links
    let mut b = SystemBuilder::new("category-graph");
    b.add_bt("Moon", "Moons").unwrap();
    b.add_bt("Moon", "Natural satellites").unwrap();
    b.add_bt("Moons", "Astronomical objects").unwrap();
    b.add_bt("Natural satellites", "Astronomical objects").unwrap();
    b.add_rt("Moon", "Tides").unwrap();
    b.add_use("Earth's moon", "Moon").unwrap();
    b.build().system
}

fn main() {
    for system in [flat_tagging(), classification(), thesaurus()] {
        let kind = classify(&system).unwrap();
        let relations = system.relations_per_descriptor().unwrap();
        println!(
            "{:<16} -> {:<14} (hierarchy: {}, single parent: {}, forest: {}, relations/descriptor: {}/{})",
            system.name(),
            kind.kind.as_str(),
            kind.evidence.has_hierarchy,
            kind.evidence.single_parent_everywhere,
            kind.evidence.is_forest,
            relations.numerator,
            relations.denominator,
        );
    }
}

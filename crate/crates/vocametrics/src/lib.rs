//! vocametrics models subject-indexing systems — flat tagging, hierarchical
//! classification and thesauri — in one normalized data model, computes
//! their structural statistics, fits the characteristic distributions and
//! classifies which kind of system a dataset is.
//!
//! The pipeline, end to end:
//!
//! 1. [`ingest`] parses TSV inputs (flat assignments, wiki page/category
//!    links plus redirects, classification trees) into an
//!    [`model::IndexingSystem`].
//! 2. [`metrics`] computes descriptors per record, records per descriptor,
//!    broader terms per term and descriptor levels.
//! 3. [`distfit`] fits exponential, power-law, normal (with a KS test) and
//!    exponential-growth models to those tables.
//! 4. [`typology`] classifies the system (classification / flat tagging /
//!    thesaurus), assembles a [`typology::SystemReport`] and renders it as
//!    text, JSON, CSV, DOT graphs or plot-ready series.
//! 5. [`synthgen`] generates deterministic synthetic systems with
//!    prescribed distributional shape, for property tests and demos.
//!
//! Every public operation is deterministic: ties break lexicographically,
//! renderings are byte-stable, and the synthetic generator uses a fixed,
//! named random generator (xoshiro256** seeded via splitmix64).
//!
//! ```
//! use vocametrics::model::SystemBuilder;
//! use vocametrics::typology::{classify, IndexingKind};
//!
//! let mut b = SystemBuilder::new("moon-sample");
//! b.add_bt("Moon", "Moons").unwrap();
//! b.add_bt("Moons", "Astronomical objects").unwrap();
//! b.add_bt("Moon", "Natural satellites").unwrap();
//! let system = b.build().system;
//! assert_eq!(classify(&system).unwrap().kind, IndexingKind::Thesaurus);
//! ```
//!
//! The `vocametrics` binary wires the same layers into `analyze`, `fit`,
//! `synth` and `path` subcommands; see the crate examples for library use.

pub mod cli;
pub mod distfit;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod synthgen;
pub mod typology;

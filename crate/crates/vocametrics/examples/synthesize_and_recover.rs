//! Generate a synthetic poly-hierarchical system with prescribed
//! distribution parameters, then fit the generated data and compare what
//! comes back.
//!
//! ```bash
//! cargo run --release --example synthesize_and_recover
//! ```

use vocametrics::distfit::{fit_exponential, fit_power_law_ranks};
use vocametrics::metrics::{
    broader_terms_per_term, records_per_tag, tags_per_record, MetricsOptions,
};
use vocametrics::synthgen::{generate, GenSpec, Hierarchy};
use vocametrics::typology::classify;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GenSpec {
        seed: 7,
        record_count: 20_000,
        vocab_size: 10_000,
        tags_lambda: 0.6,
        popularity_exponent: 0.9,
        hierarchy: Hierarchy::Dag { bt_lambda: 0.4 },
    };
    let built = generate(&spec)?;
    let sys = &built.system;
    let opts = MetricsOptions::default();

    println!(
        "generated '{}': {} records, {} descriptors, {} BT edges (cycles: {})",
        sys.name(),
        sys.record_count(),
        sys.descriptor_count(),
        sys.bt_edge_count(),
        built.validation.bt_cycle_descriptor_count
    );
    println!("classified as: {}", classify(sys)?.kind.as_str());

    let tags_fit = fit_exponential(&tags_per_record(sys, &opts)?, 1, 9)?;
    println!(
        "tags-per-record lambda: set {:.3}, recovered {:.3}",
        spec.tags_lambda, tags_fit.lambda
    );

    let ranks = records_per_tag(sys, Some(25), &opts)?;
    let pop_fit = fit_power_law_ranks(&ranks, 25)?;
    println!(
        "popularity exponent:   set {:.3}, recovered {:.3}",
        spec.popularity_exponent, pop_fit.exponent
    );

    let bt_fit = fit_exponential(&broader_terms_per_term(sys, &opts)?, 1, 9)?;
    println!("broader-terms lambda:  set 0.400, recovered {:.3}", bt_fit.lambda);
    Ok(())
}

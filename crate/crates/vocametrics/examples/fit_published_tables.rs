//! Fit the bundled statistics tables: exponential decay for tags per
//! record and broader terms per term, power laws for tag popularity, a
//! normal for descriptor levels.
//!
//! ```bash
//! cargo run --example fit_published_tables
//! ```

use std::path::Path;

use vocametrics::distfit::{fit_exponential, fit_normal, fit_power_law_pairs};
use vocametrics::ingest::load_table;
use vocametrics::metrics::{Histogram, LevelHistogram};

fn table(rel: &str) -> vocametrics::ingest::TableFile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/tables")
        .join(rel);
    load_table(&path).unwrap()
}

fn main() {
    println!("exponential fits over n in [1, 9]:");
    for (name, file) in [
        ("wikipedia tags/record ", "wikipedia_tags_per_record.tsv"),
        ("delicious tags/record ", "delicious_tags_per_record.tsv"),
        ("wikipedia broader/term", "wikipedia_broader_terms.tsv"),
    ] {
        let hist = Histogram::from_counts(table(file).counts());
        let fit = fit_exponential(&hist, 1, 9).unwrap();
        println!(
            "  {name}  lambda = {:.4}  (r^2 = {:.4})",
            fit.lambda, fit.r_squared
        );
    }

    println!("\nrank power laws over the 25 most used tags:");
    for (name, file) in [
        ("flickr         ", "ranks_flickr.tsv"),
        ("wikipedia      ", "ranks_wikipedia_categories.tsv"),
        ("ddc            ", "ranks_ddc.tsv"),
        ("delicious      ", "ranks_delicious.tsv"),
        ("millionsofgames", "ranks_millionsofgames.tsv"),
    ] {
        let fit = fit_power_law_pairs(&table(file).counts(), 25).unwrap();
        println!(
            "  {name}  exponent = {:.4}  (r^2 = {:.4})",
            fit.exponent, fit.r_squared
        );
    }

    println!("\nnormal fits of descriptor levels (level 0 excluded):");
    for (name, file) in [
        ("ddc      ", "ddc_levels.tsv"),
        ("wikipedia", "wikipedia_levels.tsv"),
    ] {
        let t = table(file);
        let levels = LevelHistogram {
            bins: t.counts().into_iter().collect(),
            total: t.counts().iter().map(|&(_, c)| c).sum(),
            unreachable_in_level0: 0,
        };
        let fit = fit_normal(&levels, true).unwrap();
        println!(
            "  {name}  mean = {:.3}  sigma = {:.3}  KS D = {:.4}  p = {:.4}",
            fit.mean, fit.sigma, fit.ks_statistic, fit.ks_p
        );
    }
}

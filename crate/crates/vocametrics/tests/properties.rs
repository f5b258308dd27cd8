//! Property tests: randomized graph invariants for the model, exact
//! parameter recovery for the fits, and ingest order-insensitivity.

use std::collections::BTreeSet;

use proptest::prelude::*;

use vocametrics::distfit::{fit_exponential, fit_growth, fit_power_law_pairs};
use vocametrics::ingest::{build_system, parse_assignments, parse_pagecats, Fragments, IngestOptions, IngestStats, NamespaceSet};
use vocametrics::metrics::Histogram;
use vocametrics::model::{DescriptorId, IndexingSystem, SystemBuilder};
use vocametrics::typology::export_terminology;

/// Random DAG encoded as, per node index i >= 1, a set of parents below i.
fn dag_strategy(max_nodes: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(any::<prop::sample::Index>(), 0..4), 1..max_nodes)
        .prop_map(|raw| {
            let mut parents: Vec<Vec<usize>> = vec![Vec::new()];
            for (i, choices) in raw.into_iter().enumerate() {
                let node = i + 1;
                let mut set: Vec<usize> = choices
                    .into_iter()
                    .map(|idx| idx.index(node))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                set.dedup();
                parents.push(set);
            }
            parents
        })
}

fn build_dag(parents: &[Vec<usize>]) -> IndexingSystem {
    let mut b = SystemBuilder::new("prop-dag");
    for i in 0..parents.len() {
        b.declare_descriptor(&format!("n{i}"), None).unwrap();
    }
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            b.add_bt(&format!("n{child}"), &format!("n{p}")).unwrap();
        }
    }
    b.build().system
}

/// DFS reachability over BT, the oracle for ancestors().
fn reachable_up(system: &IndexingSystem, start: DescriptorId) -> BTreeSet<DescriptorId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(node) = stack.pop() {
        for &p in system.broader(node).unwrap() {
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen.remove(&start);
    seen
}

proptest! {
    #[test]
    fn nt_inverts_bt_on_random_dags(parents in dag_strategy(60)) {
        let sys = build_dag(&parents);
        for d in sys.descriptors() {
            for &p in sys.broader(d.id).unwrap() {
                prop_assert!(sys.narrower(p).unwrap().contains(&d.id));
            }
            for &c in sys.narrower(d.id).unwrap() {
                prop_assert!(sys.broader(c).unwrap().contains(&d.id));
            }
        }
    }

    #[test]
    fn ancestors_equal_dfs_reachability(parents in dag_strategy(60)) {
        let sys = build_dag(&parents);
        for d in sys.descriptors() {
            prop_assert_eq!(sys.ancestors(d.id).unwrap(), reachable_up(&sys, d.id));
        }
    }

    #[test]
    fn levels_satisfy_local_minimality(parents in dag_strategy(60)) {
        let sys = build_dag(&parents);
        let tops = sys.top_terms().clone();
        prop_assume!(!tops.is_empty());
        let levels = sys.levels(&tops).unwrap();
        for d in sys.descriptors() {
            if levels.is_unreachable(d.id) || tops.contains(&d.id) {
                continue;
            }
            let best_parent = sys
                .broader(d.id)
                .unwrap()
                .iter()
                .filter(|&&p| !levels.is_unreachable(p))
                .map(|&p| levels.level(p))
                .min();
            prop_assert_eq!(Some(levels.level(d.id) - 1), best_parent);
        }
    }

    #[test]
    fn tree_paths_are_unique_and_match_levels(depth_spec in prop::collection::vec(1usize..4, 1..40)) {
        // single-parent tree: node i attaches to a node chosen among earlier ones
        let mut b = SystemBuilder::new("prop-tree");
        b.declare_descriptor("n0", None).unwrap();
        for (i, step) in depth_spec.iter().enumerate() {
            let node = i + 1;
            let parent = (node - 1) / step.max(&1);
            b.add_bt(&format!("n{node}"), &format!("n{parent}")).unwrap();
        }
        let sys = b.build().system;
        let tops = sys.top_terms().clone();
        let levels = sys.levels(&tops).unwrap();
        for d in sys.descriptors() {
            let path = sys.shortest_path_to_top(d.id, &tops).unwrap();
            prop_assert_eq!(path.len() as u32 - 1, levels.level(d.id));
            // single-parent chains admit exactly one path
            for pair in path.windows(2) {
                let parents = sys.broader(pair[0]).unwrap();
                prop_assert_eq!(parents.len(), 1);
                prop_assert!(parents.contains(&pair[1]));
            }
        }
    }

    #[test]
    fn resolve_is_idempotent_on_random_chains(links in prop::collection::vec((0usize..20, 0usize..20), 0..20)) {
        let mut b = SystemBuilder::new("prop-use");
        for i in 0..20 {
            b.declare_descriptor(&format!("d{i}"), None).unwrap();
        }
        for (from, to) in links {
            b.add_use(&format!("d{from}"), &format!("d{to}")).unwrap();
        }
        let sys = b.build().system;
        for d in sys.descriptors() {
            if let Ok(once) = sys.resolve(d.id) {
                prop_assert_eq!(sys.resolve(once).unwrap(), once);
                prop_assert!(sys.descriptor(once).preferred);
            }
        }
    }

    #[test]
    fn exponential_recovery_over_random_parameters(lambda in 0.1f64..1.4) {
        // counts large enough that integer rounding stays below the 1e-6 bar
        let pairs: Vec<(u32, u64)> = (1..=9)
            .map(|n| (n, (1e12 * (-lambda * n as f64).exp()).round() as u64))
            .collect();
        let hist = Histogram::from_counts(pairs.iter().copied());
        let fit = fit_exponential(&hist, 1, 9).unwrap();
        prop_assert!((fit.lambda - lambda).abs() < 1e-6, "{} vs {}", fit.lambda, lambda);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn power_law_recovery_over_random_parameters(exponent in 0.3f64..3.0) {
        let pairs: Vec<(u32, u64)> = (1..=25)
            .map(|r| (r, (1e13 * (r as f64).powf(-exponent)).round() as u64))
            .collect();
        let fit = fit_power_law_pairs(&pairs, 25).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-6, "{} vs {}", fit.exponent, exponent);
    }

    #[test]
    fn growth_recovery_over_random_rates(rate in -0.4f64..1.2) {
        let series: Vec<(u32, u64)> = (0..18)
            .map(|t| (t, (1e12 * (1.0 + rate).powi(t as i32)).round() as u64))
            .collect();
        prop_assume!(series.iter().all(|&(_, c)| c > 0));
        let fit = fit_growth(&series).unwrap();
        prop_assert!((fit.monthly_rate - rate).abs() < 1e-6, "{} vs {}", fit.monthly_rate, rate);
    }
}

#[test]
fn ingest_is_order_insensitive() {
    let input = "\
Category:Moon\tMoons
Category:Moon\tNatural satellites
Category:Moons\tAstronomical objects
Category:Natural satellites\tAstronomical objects
Category:Astronomical objects\tAstronomy
Moon\tMoon
Phobos\tMoons
";
    let reversed: String = input
        .lines()
        .rev()
        .map(|l| format!("{l}\n"))
        .collect();

    let build = |text: &str| {
        let (lines, _) =
            parse_pagecats(text.as_bytes(), "pagecats.tsv", &NamespaceSet::default()).unwrap();
        let fragments = Fragments {
            pagecats: lines,
            ..Default::default()
        };
        let mut stats = IngestStats::default();
        build_system(&fragments, &IngestOptions::default(), &mut stats)
            .unwrap()
            .system
    };
    let forward = build(input);
    let backward = build(&reversed);

    assert_eq!(forward.record_count(), backward.record_count());
    assert_eq!(forward.descriptor_count(), backward.descriptor_count());
    assert_eq!(forward.bt_edge_count(), backward.bt_edge_count());
    // the sorted terminology export is identical for isomorphic systems
    assert_eq!(export_terminology(&forward), export_terminology(&backward));
}

#[test]
fn parser_totals_reconcile_on_fixture_files() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/bundles/delicious/assignments.tsv");
    let text = std::fs::read_to_string(path).unwrap();
    let (lines, stats) = parse_assignments(text.as_bytes(), "assignments.tsv").unwrap();
    assert_eq!(stats.lines_read, stats.data_lines + stats.skipped_lines);
    assert_eq!(lines.len() as u64, stats.data_lines);
    assert!(stats.skipped_lines >= 1); // the fixture has a comment header
}

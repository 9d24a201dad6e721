mod common;

use holo::builder::build;
use holo::matcher::{brute_force_mappings, find_mappings, for_each_mapping, match_model, MatchOptions};
use holo::pool::Pool;
use holo::equations::EquationSet;
use proptest::prelude::*;
use std::ops::ControlFlow;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn enumeration_equals_brute_force(seed in any::<u64>()) {
        let (g, p) = common::random_pair(seed, 10, 5);
        prop_assert_eq!(find_mappings(&p, &g, usize::MAX), brute_force_mappings(&p, &g));
    }

    #[test]
    fn limit_takes_a_prefix(seed in any::<u64>(), limit in 0usize..6) {
        let (g, p) = common::random_pair(seed, 8, 4);
        let all = brute_force_mappings(&p, &g);
        let got = find_mappings(&p, &g, limit);
        prop_assert_eq!(&got[..], &all[..limit.min(all.len())]);
    }

    #[test]
    fn mappings_are_injective_and_preserve_kinds_and_edges(seed in any::<u64>()) {
        let (g, p) = common::random_pair(seed, 10, 5);
        for m in find_mappings(&p, &g, usize::MAX) {
            let mut seen = m.clone();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), m.len());
            for (i, v) in p.vertices.iter().enumerate() {
                prop_assert_eq!(g.vertices()[m[i]].kind, v.kind);
            }
            for (a, b, k) in p.indexed_edges() {
                prop_assert!(g.has_edge(m[a], m[b], k));
            }
        }
    }
}

#[test]
fn early_stop_visits_lexicographic_prefix() {
    let (g, p) = common::random_pair(42, 10, 3);
    let all = brute_force_mappings(&p, &g);
    let mut seen = Vec::new();
    for_each_mapping(&p, &g, &mut |m| {
        seen.push(m.to_vec());
        if seen.len() == 2 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
    });
    assert_eq!(seen[..], all[..seen.len()]);
}

#[test]
fn co_interior_match_names_the_legs() {
    let g = common::hologram("curated", "quad_01");
    let pool = Pool::builtin();
    let model = &pool.models()[pool.index_of("co_interior_parallel").unwrap()];
    let mut diags = Vec::new();
    let r = match_model(model, &g, &EquationSet::new(), &MatchOptions::default(), &mut diags)
        .expect("co-interior angles match");
    let names: Vec<(String, String)> = r.named.iter().map(|(k, v)| (k.clone(), g.vertices()[*v].name.clone())).collect();
    let get = |k: &str| names.iter().find(|(n, _)| n == k).unwrap().1.clone();
    assert_eq!(get("t"), "AB");
    let legs = [get("l1"), get("l2")];
    assert!(legs.contains(&"AD".to_string()) && legs.contains(&"BC".to_string()), "{legs:?}");
}

#[test]
fn no_matches_when_pattern_kind_absent() {
    let p = common::problem("curated", "line_02");
    let g = build(&p).unwrap();
    let pool = Pool::builtin();
    let model = &pool.models()[pool.index_of("circle_area").unwrap()];
    assert!(find_mappings(&model.pattern, &g, 64).is_empty());
}

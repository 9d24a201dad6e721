mod common;

use holo::hologram::EdgeKind;
use holo::pool::{ModelKind, Pool};
use holo::reasoner::{counters, replay, run, ReasonerConfig, Session, Status, StepAction};
use proptest::prelude::*;

fn solve(id: &str, config: &ReasonerConfig) -> holo::reasoner::SolveOutcome {
    let p = common::problem("curated", id);
    let g = holo::builder::build(&p).unwrap();
    run(g, &p.id, &p.choices, &Pool::builtin(), config, None, 0)
}

#[test]
fn co_interior_quadrilateral_two_steps_parallel_then_parallelogram() {
    let o = solve("quad_01", &ReasonerConfig::default());
    assert_eq!(o.status, Status::TargetSatisfied);
    assert_eq!(o.trace.len(), 2);
    assert_eq!(o.trace[0].model, "co_interior_parallel");
    match &o.trace[0].action {
        StepAction::Expansion { changes } => assert!(changes.iter().any(|c| c.contains("Parallel")), "{changes:?}"),
        other => panic!("expected an expansion, got {other:?}"),
    }
    assert_eq!(o.trace[1].model, "parallelogram_opposite_sides");
    assert_eq!(o.trace[1].equations.len(), 2);
    assert_eq!(o.answer, Some(5.0));
    assert_eq!(o.choice, 1);
}

#[test]
fn trace_replay_reproduces_bindings() {
    let pool = Pool::builtin();
    for id in ["quad_01", "tri_08", "circle_06", "other_03"] {
        let p = common::problem("curated", id);
        let g = holo::builder::build(&p).unwrap();
        let s = Session::new(g.clone(), &pool, ReasonerConfig::default());
        let (status, s) = s.run(None);
        assert_eq!(status, Status::TargetSatisfied, "{id}");
        let (bindings, value) = replay(g, &pool, s.trace()).unwrap();
        assert_eq!(&bindings, s.equations().bindings(), "{id}");
        assert_eq!(value, s.target_value(), "{id}");
    }
}

#[test]
fn counters_match_trace() {
    let o = solve("quad_06", &ReasonerConfig::default());
    let c = counters(&o.trace);
    assert_eq!(c, o.counters);
    assert_eq!(c.theorems, o.trace.len());
    assert_eq!(c.equations, o.trace.iter().map(|r| r.equations.len()).sum::<usize>());
    assert!(o.trace.iter().all(|r| r.changed));
}

#[test]
fn disabled_kinds_are_never_applied() {
    let pool = Pool::builtin();
    let config = ReasonerConfig { disabled: vec![ModelKind::Proving], ..ReasonerConfig::default() };
    let o = solve("quad_01", &config);
    assert_eq!(o.status, Status::NoProgress);
    for r in &o.trace {
        let m = &pool.models()[pool.index_of(&r.model).unwrap()];
        assert_eq!(m.kind, ModelKind::Property);
    }
}

#[test]
fn step_budget_is_respected() {
    let pool = Pool::builtin();
    let g = common::hologram("curated", "quad_06");
    let config = ReasonerConfig { max_steps: 1, ..ReasonerConfig::default() };
    let (status, s) = Session::new(g, &pool, config).run(None);
    assert_eq!(status, Status::BudgetExhausted);
    assert_eq!(s.iterations(), 1);
    assert!(s.trace().len() <= 2);
    assert_eq!(s.target_value(), None);
}

#[test]
fn parallel_edge_propagates_to_collinear_sub_segments() {
    let g = common::hologram("curated", "line_07");
    let pool = Pool::builtin();
    let s = Session::new(g, &pool, ReasonerConfig::default());
    let h = s.hologram();
    let line = |n: &str| h.find(holo::hologram::VertexKind::Line, n).unwrap();
    assert!(h.has_edge(line("AB"), line("CD"), EdgeKind::Parallel));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(39))]

    // Along any run, vertices, edges and bindings only grow.
    #[test]
    fn state_grows_monotonically(i in 0usize..39) {
        let pool = Pool::builtin();
        let entries = holo::eval::load_corpus(&common::corpus_dir("curated")).unwrap();
        let p = entries[i].problem.as_ref().unwrap();
        let g = holo::builder::build(p).unwrap();
        let mut s = Session::new(g, &pool, ReasonerConfig::default());
        let mut prev = s.summary();
        let mut bound = s.equations().bindings().clone();
        for _ in 0..30 {
            if s.target_value().is_some() || s.heuristic_iteration() != Some(true) {
                break;
            }
            let next = s.summary();
            prop_assert!(next.vertices >= prev.vertices && next.edges >= prev.edges && next.bound >= prev.bound);
            for (k, x) in &bound {
                prop_assert_eq!(s.equations().value(*k), Some(*x));
            }
            prev = next;
            bound = s.equations().bindings().clone();
        }
    }
}

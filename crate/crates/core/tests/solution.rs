mod common;

use holo::pool::Pool;
use holo::reasoner::{run, ReasonerConfig};
use holo::solution::{render_json, render_text, SolutionDocument};

fn outcome(id: &str) -> holo::reasoner::SolveOutcome {
    let p = common::problem("curated", id);
    let g = holo::builder::build(&p).unwrap();
    run(g, &p.id, &p.choices, &Pool::builtin(), &ReasonerConfig::default(), None, 0)
}

#[test]
fn parallelogram_text_lists_both_theorems_in_order() {
    let text = render_text(&outcome("quad_01"));
    let a = text.find("step 1: co_interior_parallel").unwrap();
    let b = text.find("step 2: parallelogram_opposite_sides").unwrap();
    assert!(a < b);
    assert!(text.contains("opposite sides of a parallelogram are equal"));
    assert!(text.contains("answer: 5 (choice B)"));
    assert!(text.ends_with("T/R/E: 2/2/2\n"));
}

#[test]
fn one_step_angle_sum_has_one_of_each_line() {
    let text = render_text(&outcome("tri_01"));
    let count = |p: &str| text.lines().filter(|l| l.trim_start().starts_with(p)).count();
    assert_eq!(count("step "), 1);
    assert_eq!(count("relation:"), 1);
    assert_eq!(count("equation:"), 1);
    assert_eq!(count("binding:"), 1);
}

#[test]
fn text_and_json_agree_for_every_curated_problem() {
    for e in holo::eval::load_corpus(&common::corpus_dir("curated")).unwrap() {
        let id = e.problem.unwrap().id;
        let o = outcome(&id);
        let text = render_text(&o);
        let doc: SolutionDocument = serde_json::from_str(&render_json(&o)).unwrap();
        assert_eq!(doc, SolutionDocument::from_outcome(&o));
        assert_eq!(doc.counters, o.counters);
        let steps: Vec<&str> = text.lines().filter(|l| l.starts_with("step ")).collect();
        assert_eq!(steps.len(), doc.steps.len(), "{id}");
        for (line, s) in steps.iter().zip(&doc.steps) {
            assert!(line.ends_with(&s.theorem), "{id}: {line}");
        }
        let eqs: Vec<&str> = text.lines().filter_map(|l| l.trim_start().strip_prefix("equation: ")).collect();
        let want: Vec<&str> = doc.steps.iter().flat_map(|s| s.equations.iter().map(String::as_str)).collect();
        assert_eq!(eqs, want, "{id}");
        let c = doc.counters;
        assert!(text.contains(&format!("T/R/E: {}/{}/{}", c.theorems, c.relations, c.equations)));
        assert_eq!(render_text(&o), text);
    }
}

#[test]
fn empty_trace_renders_no_steps() {
    let mut o = outcome("quad_01");
    o.trace.clear();
    o.counters = holo::reasoner::counters(&o.trace);
    let json: serde_json::Value = serde_json::from_str(&render_json(&o)).unwrap();
    assert_eq!(json["steps"], serde_json::json!([]));
    assert!(!render_text(&o).contains("step "));
}

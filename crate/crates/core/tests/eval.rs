mod common;

use std::path::PathBuf;

use holo::eval::{evaluate, load_corpus, Ablation, EvalOptions};
use holo::pool::Pool;

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("holo-eval-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn csv_is_identical_across_runs_and_worker_counts() {
    let entries = load_corpus(&common::corpus_dir("curated")).unwrap();
    let pool = Pool::builtin();
    let one = evaluate(&entries, &pool, &EvalOptions { workers: 1, seed: 7, ..EvalOptions::default() }, None);
    let four = evaluate(&entries, &pool, &EvalOptions { workers: 4, seed: 7, ..EvalOptions::default() }, None);
    assert_eq!(one.to_csv(), four.to_csv());
    assert_eq!(one.rows.len(), entries.len());
}

#[test]
fn fallback_choices_depend_on_the_seed_only() {
    let entries = load_corpus(&common::corpus_dir("curated")).unwrap();
    let pool = Pool::builtin();
    let mut opts = EvalOptions { seed: 3, ..EvalOptions::default() };
    Ablation::NoProperty.apply(&mut opts.config);
    let a = evaluate(&entries, &pool, &opts, None);
    let b = evaluate(&entries, &pool, &opts, None);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn pre_satisfied_corpus_scores_full_marks_with_no_steps() {
    let d = tmp("presat");
    std::fs::write(
        d.join("given.json"),
        r#"{"id": "given", "type": "Line",
            "text_literals": ["Equals(LengthOf(Line(A, B)), 6)", "Find(LengthOf(Line(A, B)))"],
            "diagram_literals": [], "point_coords": {"A": [0, 0], "B": [6, 0]},
            "choices": [3, 6, 9, 12], "answer_index": 1}"#,
    )
    .unwrap();
    let r = evaluate(&load_corpus(&d).unwrap(), &Pool::builtin(), &EvalOptions::default(), None);
    assert_eq!(r.accuracy(), 100.0);
    assert_eq!(r.mean_tre(), (0.0, 0.0, 0.0));
}

#[test]
fn malformed_files_become_error_rows() {
    let d = tmp("bad");
    std::fs::write(d.join("a_bad.json"), "{ not json").unwrap();
    std::fs::copy(common::corpus_dir("curated").join("tri_01.json"), d.join("b_good.json")).unwrap();
    let r = evaluate(&load_corpus(&d).unwrap(), &Pool::builtin(), &EvalOptions::default(), None);
    assert_eq!(r.rows.len(), 2);
    assert_eq!(r.rows[0].status, "error");
    assert!(!r.rows[0].correct);
    assert!(r.rows[1].correct);
    assert_eq!(r.accuracy(), 50.0);
}

#[test]
fn ablation_names_round_trip() {
    for a in Ablation::ALL {
        assert_eq!(a.name().parse::<Ablation>().unwrap(), a);
    }
    assert!("no-such-thing".parse::<Ablation>().is_err());
}

#[test]
fn type_breakdown_covers_five_categories() {
    let entries = load_corpus(&common::corpus_dir("curated")).unwrap();
    let r = evaluate(&entries, &Pool::builtin(), &EvalOptions { workers: 4, ..EvalOptions::default() }, None);
    let types: Vec<String> = r.by_type().into_keys().collect();
    assert_eq!(types, ["Circle", "Line", "Other", "Quad", "Triangle"]);
}

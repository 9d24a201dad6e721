mod common;

use holo::builder::build;
use holo::hologram::{EdgeKind, VertexKind};
use holo::literal::parse_problem;

fn triangle() -> holo::hologram::Hologram {
    let p = parse_problem(
        r#"{"id": "t", "text_literals": ["Find(MeasureOf(Angle(A, C, B)))"],
            "diagram_literals": ["Triangle(A, B, C)"],
            "point_coords": {"A": [0, 0], "B": [4, 0], "C": [1, 3]},
            "choices": [1, 2, 3, 4]}"#,
    )
    .unwrap();
    build(&p).unwrap()
}

#[test]
fn triangle_has_ten_vertices_and_eighteen_edges() {
    let g = triangle();
    assert_eq!(g.vertex_count(), 10);
    assert_eq!(g.edge_count(), 18);
    let count = |k| g.vertices().iter().filter(|v| v.kind == k).count();
    assert_eq!(count(VertexKind::Point), 3);
    assert_eq!(count(VertexKind::Line), 3);
    assert_eq!(count(VertexKind::Angle), 3);
    assert_eq!(count(VertexKind::Polygon(3)), 1);
    let edges = |k| g.edges().filter(|e| e.kind == k).count();
    assert_eq!(edges(EdgeKind::Incident), 9);
    assert_eq!(edges(EdgeKind::Adjacent), 9);
}

#[test]
fn trapezoid_like_quadrilateral_structure() {
    let g = common::hologram("curated", "quad_01");
    let line = |n: &str| g.find(VertexKind::Line, n).unwrap_or_else(|| panic!("line {n}"));
    assert!(g.has_edge(line("AB"), line("CD"), EdgeKind::Parallel));
    assert!(!g.has_edge(line("AD"), line("BC"), EdgeKind::Parallel));
    assert_eq!(g.of_kind(VertexKind::Polygon(4)).count(), 1);
}

#[test]
fn every_corpus_problem_builds() {
    for corpus in ["curated", "toy_train", "toy_heldout"] {
        for e in holo::eval::load_corpus(&common::corpus_dir(corpus)).unwrap() {
            let p = e.problem.unwrap();
            build(&p).unwrap_or_else(|err| panic!("{}: {err}", p.id));
        }
    }
}

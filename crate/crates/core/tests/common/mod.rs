#![allow(dead_code)]

use std::path::PathBuf;

use holo::builder::build;
use holo::equations::Equation;
use holo::expr::Expr;
use holo::hologram::{EdgeKind, Hologram, VarId, VertexKind};
use holo::literal::{load_problem, ProblemInput};
use holo::pool::{PatternEdge, PatternHologram, PatternVertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corpus").join(name)
}

pub fn problem(corpus: &str, id: &str) -> ProblemInput {
    load_problem(&corpus_dir(corpus).join(format!("{id}.json"))).unwrap()
}

pub fn hologram(corpus: &str, id: &str) -> Hologram {
    build(&problem(corpus, id)).unwrap()
}

const KINDS: [VertexKind; 4] = [VertexKind::Point, VertexKind::Line, VertexKind::Angle, VertexKind::Polygon(3)];
const EDGES: [EdgeKind; 3] = [EdgeKind::Adjacent, EdgeKind::Incident, EdgeKind::Parallel];

/// Random host (up to `max_host` vertices) and pattern (up to `max_pattern`
/// vertices). Half of the patterns are cut out of the host so that matches
/// exist; the rest are random.
pub fn random_pair(seed: u64, max_host: usize, max_pattern: usize) -> (Hologram, PatternHologram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_host);
    let mut g = Hologram::new();
    for i in 0..n {
        let k = KINDS[rng.gen_range(0..KINDS.len())];
        g.add_vertex(k, &format!("v{i}"), &[]);
    }
    let density: f64 = rng.gen_range(0.1..0.6);
    for u in 0..n {
        for v in u + 1..n {
            for k in EDGES {
                if rng.gen_bool(density / EDGES.len() as f64) {
                    g.add_edge(u, v, k).unwrap();
                }
            }
        }
    }
    let m = rng.gen_range(1..=max_pattern.min(n + 1));
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    if rng.gen_bool(0.5) && m <= n {
        let mut pick: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = rng.gen_range(i..n);
            pick.swap(i, j);
        }
        let pick = &pick[..m];
        for (i, &h) in pick.iter().enumerate() {
            vertices.push(PatternVertex { id: format!("p{i}"), kind: g.vertices()[h].kind });
        }
        for e in g.edges() {
            if let (Some(a), Some(b)) = (pick.iter().position(|&x| x == e.a), pick.iter().position(|&x| x == e.b)) {
                if rng.gen_bool(0.7) {
                    edges.push(PatternEdge(format!("p{a}"), format!("p{b}"), e.kind));
                }
            }
        }
    } else {
        for i in 0..m {
            vertices.push(PatternVertex { id: format!("p{i}"), kind: KINDS[rng.gen_range(0..KINDS.len())] });
        }
        for i in 1..m {
            let j = rng.gen_range(0..i);
            edges.push(PatternEdge(format!("p{j}"), format!("p{i}"), EDGES[rng.gen_range(0..EDGES.len())]));
        }
    }
    (g, PatternHologram { vertices, edges })
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting; `None`
/// when singular.
pub fn eliminate(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// A random uniquely solvable linear system over `VarId(0..n)`: its
/// equations, and the solution computed by [`eliminate`].
pub fn random_linear_system(seed: u64) -> (Vec<Equation>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(1..=6);
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| if rng.gen_bool(0.6) { rng.gen_range(-5..=5) as f64 } else { 0.0 }).collect())
            .collect();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-20..=20) as f64).collect();
        let b: Vec<f64> = a.iter().map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
        let Some(sol) = eliminate(a.clone(), b.clone()) else { continue };
        let eqs = a
            .iter()
            .zip(&b)
            .map(|(row, &rhs)| {
                let lhs = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k != 0.0)
                    .map(|(i, &k)| Expr::mul(Expr::num(k), Expr::var(VarId(i as u32))))
                    .reduce(Expr::add)
                    .unwrap_or(Expr::num(0.0));
                Equation::seed(lhs, Expr::num(rhs))
            })
            .collect();
        return (eqs, sol);
    }
}

//! Reasoning engine for algebra problems with geometry diagrams.
//!
//! A problem written as formal-language literals is built into a
//! [`Hologram`](hologram::Hologram): a typed, attributed graph of points,
//! lines, angles, arcs, circles and polygons. A pool of declarative graph
//! models (theorems) is matched against it by subgraph monomorphism; proving
//! models rewrite the graph, property models emit equations, and the
//! equation set is solved incrementally until the target is known.

pub mod builder;
pub mod equations;
pub mod eval;
pub mod expr;
pub mod hologram;
pub mod literal;
pub mod matcher;
pub mod pool;
pub mod reasoner;
pub mod selector;
pub mod solution;

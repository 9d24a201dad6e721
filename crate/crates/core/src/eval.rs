//! Batch evaluation over a problem corpus.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::builder::build;
use crate::literal::{load_problem, ProblemInput};
use crate::pool::{ModelKind, Pool};
use crate::reasoner::{run, stable_hash, Policy, ReasonerConfig, SolveOutcome, Strategy};
use crate::solution::status_name;

/// Component removed for an ablation run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ablation {
    NoAgent,
    NoProving,
    NoProperty,
    NoMathConstraints,
    NoVisualConstraints,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::NoAgent,
        Ablation::NoProving,
        Ablation::NoProperty,
        Ablation::NoMathConstraints,
        Ablation::NoVisualConstraints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::NoAgent => "no-agent",
            Ablation::NoProving => "no-proving",
            Ablation::NoProperty => "no-property",
            Ablation::NoMathConstraints => "no-math-constraints",
            Ablation::NoVisualConstraints => "no-visual-constraints",
        }
    }

    pub fn apply(self, config: &mut ReasonerConfig) {
        match self {
            Ablation::NoAgent => config.strategy = Strategy::Heuristic,
            Ablation::NoProving => config.disabled.push(ModelKind::Proving),
            Ablation::NoProperty => config.disabled.push(ModelKind::Property),
            Ablation::NoMathConstraints => config.matching.check_math = false,
            Ablation::NoVisualConstraints => config.matching.check_visual = false,
        }
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown ablation '{s}'"))
    }
}

/// A corpus entry: a parsed problem or the error that prevented parsing.
#[derive(Debug)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub problem: Result<ProblemInput, String>,
}

impl CorpusEntry {
    pub fn id(&self) -> String {
        match &self.problem {
            Ok(p) => p.id.clone(),
            Err(_) => self.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        }
    }
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> std::io::Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| {
            let problem = load_problem(&path).map_err(|e| e.to_string());
            CorpusEntry { path, problem }
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub config: ReasonerConfig,
    pub seed: u64,
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { config: ReasonerConfig::default(), seed: 0, workers: 1 }
    }
}

/// Seed for one problem's random fallback.
pub fn problem_seed(seed: u64, id: &str) -> u64 {
    seed ^ stable_hash(id)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub id: String,
    pub problem_type: Option<String>,
    /// `solved`, `no-progress`, `budget-exhausted` or `error`.
    pub status: String,
    pub answer: Option<f64>,
    pub choice: Option<usize>,
    pub correct: bool,
    pub theorems: usize,
    pub relations: usize,
    pub equations: usize,
    pub attempts: usize,
    pub wall_secs: f64,
    pub error: Option<String>,
}

impl EvalRow {
    pub fn solved(&self) -> bool {
        self.status == "solved"
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeBreakdown {
    pub total: usize,
    pub correct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.rows.len()
    }

    pub fn correct(&self) -> usize {
        self.rows.iter().filter(|r| r.correct).count()
    }

    pub fn solved(&self) -> usize {
        self.rows.iter().filter(|r| r.solved()).count()
    }

    /// Percentage of rows whose chosen option is the answer, fallback picks
    /// included.
    pub fn accuracy(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        100.0 * self.correct() as f64 / self.total() as f64
    }

    fn mean_over_solved(&self, f: impl Fn(&EvalRow) -> usize) -> f64 {
        let solved: Vec<&EvalRow> = self.rows.iter().filter(|r| r.solved()).collect();
        if solved.is_empty() {
            return 0.0;
        }
        solved.iter().map(|r| f(r) as f64).sum::<f64>() / solved.len() as f64
    }

    /// Mean theorem, relation and equation counts over solved problems.
    pub fn mean_tre(&self) -> (f64, f64, f64) {
        (
            self.mean_over_solved(|r| r.theorems),
            self.mean_over_solved(|r| r.relations),
            self.mean_over_solved(|r| r.equations),
        )
    }

    pub fn mean_attempts_solved(&self) -> f64 {
        self.mean_over_solved(|r| r.attempts)
    }

    pub fn mean_wall_secs(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.wall_secs).sum::<f64>() / self.rows.len() as f64
    }

    pub fn by_type(&self) -> BTreeMap<String, TypeBreakdown> {
        let mut out: BTreeMap<String, TypeBreakdown> = BTreeMap::new();
        for r in &self.rows {
            if let Some(t) = &r.problem_type {
                let e = out.entry(t.clone()).or_default();
                e.total += 1;
                e.correct += usize::from(r.correct);
            }
        }
        out
    }

    /// Per-problem CSV. Wall time is left out so that a fixed seed gives
    /// byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,type,status,answer,choice,correct,T,R,E,attempts\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.id,
                r.problem_type.as_deref().unwrap_or(""),
                r.status,
                r.answer.map(|x| format!("{x:.6}")).unwrap_or_default(),
                r.choice.map(|c| c.to_string()).unwrap_or_default(),
                u8::from(r.correct),
                r.theorems,
                r.relations,
                r.equations,
                r.attempts
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<24} {:<9} {:<16} {:>10} {:>7} {:>9}", "id", "type", "status", "answer", "correct", "T/R/E");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<24} {:<9} {:<16} {:>10} {:>7} {:>9}",
                r.id,
                r.problem_type.as_deref().unwrap_or("-"),
                r.status,
                r.answer.map(crate::expr::format_number).unwrap_or_else(|| "-".into()),
                if r.correct { "yes" } else { "no" },
                format!("{}/{}/{}", r.theorems, r.relations, r.equations)
            );
        }
        let (t, rr, e) = self.mean_tre();
        let _ = writeln!(s);
        let _ = writeln!(s, "accuracy: {:.1}% ({}/{})", self.accuracy(), self.correct(), self.total());
        for (ty, b) in self.by_type() {
            let pct = 100.0 * b.correct as f64 / b.total.max(1) as f64;
            let _ = writeln!(s, "  {ty:<9} {pct:>5.1}% ({}/{})", b.correct, b.total);
        }
        let _ = writeln!(s, "solved: {}/{}", self.solved(), self.total());
        let _ = writeln!(s, "avg step T/R/E: {t:.2}/{rr:.2}/{e:.2}");
        let _ = writeln!(s, "avg attempts per solved problem: {:.2}", self.mean_attempts_solved());
        let _ = writeln!(s, "avg time: {:.3}s", self.mean_wall_secs());
        s
    }
}

fn error_row(id: String, problem_type: Option<String>, error: String) -> EvalRow {
    EvalRow {
        id,
        problem_type,
        status: "error".into(),
        answer: None,
        choice: None,
        correct: false,
        theorems: 0,
        relations: 0,
        equations: 0,
        attempts: 0,
        wall_secs: 0.0,
        error: Some(error),
    }
}

/// Solves one problem and turns the outcome into a report row.
pub fn evaluate_problem(
    p: &ProblemInput,
    pool: &Pool,
    opts: &EvalOptions,
    policy: Option<&dyn Policy>,
) -> (EvalRow, Option<SolveOutcome>) {
    let start = Instant::now();
    let g = match build(p) {
        Ok(g) => g,
        Err(e) => return (error_row(p.id.clone(), p.problem_type.clone(), e.to_string()), None),
    };
    let policy = match opts.config.strategy {
        Strategy::Agent => policy,
        Strategy::Heuristic => None,
    };
    let o = run(g, &p.id, &p.choices, pool, &opts.config, policy, problem_seed(opts.seed, &p.id));
    let row = EvalRow {
        id: p.id.clone(),
        problem_type: p.problem_type.clone(),
        status: status_name(o.status).into(),
        answer: o.answer,
        choice: Some(o.choice),
        correct: p.answer_index == Some(o.choice),
        theorems: o.counters.theorems,
        relations: o.counters.relations,
        equations: o.counters.equations,
        attempts: o.attempts,
        wall_secs: start.elapsed().as_secs_f64(),
        error: None,
    };
    (row, Some(o))
}

/// Evaluates every entry with `opts.workers` threads. Rows keep corpus
/// order.
pub fn evaluate(
    entries: &[CorpusEntry],
    pool: &Pool,
    opts: &EvalOptions,
    policy: Option<&(dyn Policy + Sync)>,
) -> EvalReport {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<EvalRow>>> = Mutex::new(vec![None; entries.len()]);
    let workers = opts.workers.clamp(1, entries.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = entries.get(i) else { break };
                let row = match &entry.problem {
                    Ok(p) => evaluate_problem(p, pool, opts, policy.map(|p| p as &dyn Policy)).0,
                    Err(e) => error_row(entry.id(), None, e.clone()),
                };
                slots.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    let rows = slots.into_inner().expect("no worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect();
    EvalReport { rows }
}

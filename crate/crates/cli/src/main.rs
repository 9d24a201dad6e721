//! `holo`: solve, evaluate and train from the command line.
//!
//! Exit codes: 0 success (for `solve`, target found), 1 input or
//! configuration error, 2 `solve` finished without determining the target.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use holo::builder::build;
use holo::eval::{evaluate, evaluate_problem, load_corpus, Ablation, EvalOptions};
use holo::literal::load_problem;
use holo::pool::{load_pool, parse_models, validate_model, Pool};
use holo::reasoner::{ReasonerConfig, Status, Strategy};
use holo::selector::{initial_policy, train, write_log_csv, Hyper, QPolicy};
use holo::solution::{render_json, render_text};

#[derive(Parser)]
#[command(name = "holo", version, about = "Graph-model reasoning for geometry algebra problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file and print the solution.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Print the solution as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate every problem in a directory.
    Eval {
        corpus: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write per-problem rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Train the model-selection agent with DQN.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Checkpoint to write; resumed from when it exists and `--resume` is set.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = 2000)]
        episodes: u64,
        /// CSV training log (episode, cumulative reward, solved, steps).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        pretrain_steps: usize,
        #[arg(long, default_value_t = 50)]
        max_steps: usize,
        /// Measure step cost in matcher calls instead of seconds.
        #[arg(long)]
        virtual_clock: bool,
    },
    /// Check a model pool file and list every diagnostic.
    ValidateModels { pool: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Model pool JSON; the built-in pool when omitted.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Heuristic)]
    strategy: StrategyArg,
    /// Trained agent, required by `--strategy agent`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    max_steps: usize,
    #[arg(long, default_value_t = 30.0)]
    budget_secs: f64,
    /// Seed for the fallback choice when no answer is found.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Remove one component: no-agent, no-proving, no-property,
    /// no-math-constraints, no-visual-constraints.
    #[arg(long)]
    ablate: Option<Ablation>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Heuristic,
    Agent,
}

impl RunArgs {
    fn pool(&self) -> Result<Pool> {
        read_pool(self.pool.as_deref())
    }

    fn config(&self) -> Result<ReasonerConfig> {
        if !(self.budget_secs.is_finite() && self.budget_secs > 0.0) {
            bail!("--budget-secs must be positive");
        }
        let mut config = ReasonerConfig {
            strategy: match self.strategy {
                StrategyArg::Heuristic => Strategy::Heuristic,
                StrategyArg::Agent => Strategy::Agent,
            },
            max_steps: self.max_steps,
            budget: Duration::from_secs_f64(self.budget_secs),
            ..ReasonerConfig::default()
        };
        if let Some(a) = self.ablate {
            a.apply(&mut config);
        }
        Ok(config)
    }

    fn policy(&self, config: &ReasonerConfig, pool: &Pool) -> Result<Option<QPolicy>> {
        if config.strategy != Strategy::Agent {
            return Ok(None);
        }
        let Some(path) = &self.checkpoint else { bail!("--strategy agent needs --checkpoint") };
        let p = QPolicy::load(path)?;
        p.check_pool(pool)?;
        Ok(Some(p))
    }
}

fn read_pool(path: Option<&Path>) -> Result<Pool> {
    match path {
        Some(p) => Ok(load_pool(p)?),
        None => Ok(Pool::builtin()),
    }
}

fn cmd_solve(problem: &Path, run: &RunArgs, json: bool) -> Result<ExitCode> {
    let pool = run.pool()?;
    let config = run.config()?;
    let policy = run.policy(&config, &pool)?;
    let p = load_problem(problem)?;
    build(&p).with_context(|| format!("cannot build problem {}", p.id))?;
    let opts = EvalOptions { config, seed: run.seed, workers: 1 };
    let (_, outcome) = evaluate_problem(&p, &pool, &opts, policy.as_ref().map(|q| q as _));
    let o = outcome.expect("problem built above");
    if json {
        println!("{}", render_json(&o));
    } else {
        print!("{}", render_text(&o));
    }
    Ok(if o.status == Status::TargetSatisfied { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_eval(corpus: &Path, run: &RunArgs, workers: usize, csv: Option<&Path>, json: bool) -> Result<ExitCode> {
    let pool = run.pool()?;
    let config = run.config()?;
    let policy = run.policy(&config, &pool)?;
    let entries = load_corpus(corpus).with_context(|| format!("cannot read corpus {}", corpus.display()))?;
    if entries.is_empty() {
        bail!("no problem files in {}", corpus.display());
    }
    let opts = EvalOptions { config, seed: run.seed, workers };
    let report = evaluate(&entries, &pool, &opts, policy.as_ref().map(|q| q as _));
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.render_table());
    }
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.id, r.error.as_deref().unwrap_or_default());
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    corpus: &Path,
    pool: Option<&Path>,
    checkpoint: &Path,
    resume: bool,
    episodes: u64,
    log: Option<&Path>,
    seed: u64,
    pretrain_steps: usize,
    max_steps: usize,
    virtual_clock: bool,
) -> Result<ExitCode> {
    let pool = read_pool(pool)?;
    let problems: Vec<_> = load_corpus(corpus)?.into_iter().filter_map(|e| e.problem.ok()).collect();
    if problems.is_empty() {
        bail!("no valid problems in {}", corpus.display());
    }
    let mut policy = if resume && checkpoint.exists() {
        let p = QPolicy::load(checkpoint)?;
        p.check_pool(&pool)?;
        p
    } else {
        let hyper = Hyper { pretrain_steps, max_steps, virtual_clock, ..Hyper::default() };
        initial_policy(&pool, &problems, hyper, seed)
    };
    let mut rows = Vec::new();
    train(&mut policy, &pool, &problems, episodes, &mut |r| rows.push(r.clone()))?;
    policy.save(checkpoint)?;
    if let Some(path) = log {
        let append = resume && path.exists();
        let mut w = BufWriter::new(
            File::options().create(true).append(append).write(true).truncate(!append).open(path)?,
        );
        let mut buf = Vec::new();
        write_log_csv(&rows, &mut buf)?;
        let text = String::from_utf8(buf)?;
        let body = if append { text.split_once('\n').map(|x| x.1).unwrap_or("") } else { &text };
        std::io::Write::write_all(&mut w, body.as_bytes())?;
    }
    let solved = rows.iter().filter(|r| r.solved).count();
    println!(
        "trained episodes {}..{}: solved {solved}/{}; checkpoint {}",
        policy.episodes - rows.len() as u64 + 1,
        policy.episodes,
        rows.len(),
        checkpoint.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let models = parse_models(&text)?;
    let mut bad = 0;
    for m in &models {
        for d in validate_model(m) {
            println!("{}: {d}", m.name);
            bad += 1;
        }
    }
    println!("{} models, {bad} diagnostics", models.len());
    Ok(if bad == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { problem, run, json } => cmd_solve(problem, run, *json),
        Command::Eval { corpus, run, workers, csv, json } => cmd_eval(corpus, run, *workers, csv.as_deref(), *json),
        Command::Train {
            corpus,
            pool,
            checkpoint,
            resume,
            episodes,
            log,
            seed,
            pretrain_steps,
            max_steps,
            virtual_clock,
        } => cmd_train(
            corpus,
            pool.as_deref(),
            checkpoint,
            *resume,
            *episodes,
            log.as_deref(),
            *seed,
            *pretrain_steps,
            *max_steps,
            *virtual_clock,
        ),
        Command::ValidateModels { pool } => cmd_validate(pool),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! Learned model selection.
//!
//! The state of a reasoning session is encoded as a fixed 36-dimensional
//! count vector (see [`encode_state`]). A one-hidden-layer network maps it
//! to one Q-value per pool model; it is trained with DQN (replay buffer,
//! target network, epsilon-greedy exploration) on the reward of
//! [`compute_reward`], optionally after a supervised warm-up on samples
//! recorded from heuristic and random runs.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::build;
use crate::hologram::{Slot, Target, VertexKind};
use crate::literal::ProblemInput;
use crate::pool::Pool;
use crate::reasoner::{Policy, ReasonerConfig, Session, Strategy, Summary};

/// Length of the state vector:
///
/// | index  | feature                                                      |
/// |--------|--------------------------------------------------------------|
/// | 0..8   | vertex counts: Point, Line, Angle, Arc, Circle, Triangle, Quad, larger polygons |
/// | 8..14  | edge counts per edge kind                                    |
/// | 14..26 | known / unknown slot counts per slot kind                    |
/// | 26..33 | target one-hot: six slot kinds, then expression targets      |
/// | 33     | step index / max steps                                       |
/// | 34     | equations in the set                                         |
/// | 35     | equations still holding an unknown                           |
///
/// Counts enter as `ln(1 + n)`.
pub const STATE_DIM: usize = 36;

pub fn encode_state(s: &Session) -> Vec<f64> {
    let g = s.hologram();
    let mut x = vec![0.0; STATE_DIM];
    for v in g.vertices() {
        let bucket = match v.kind {
            VertexKind::Point => 0,
            VertexKind::Line => 1,
            VertexKind::Angle => 2,
            VertexKind::Arc => 3,
            VertexKind::Circle => 4,
            VertexKind::Polygon(3) => 5,
            VertexKind::Polygon(4) => 6,
            VertexKind::Polygon(_) => 7,
        };
        x[bucket] += 1.0;
        for (slot, attr) in &v.attrs {
            let known = attr.value.is_some() || s.equations().value(attr.var).is_some();
            x[14 + 2 * slot.index() + usize::from(!known)] += 1.0;
        }
    }
    for e in g.edges() {
        x[8 + e.kind.index()] += 1.0;
    }
    match g.target() {
        Some(Target::ValueOf { slot, .. }) => x[26 + slot.index()] = 1.0,
        Some(Target::ExpressionOf(_)) => x[32] = 1.0,
        None => {}
    }
    x[33] = s.iterations() as f64 / s.config.max_steps.max(1) as f64;
    x[34] = s.equations().len() as f64;
    x[35] = s.equations().frontier().count() as f64;
    for (i, xi) in x.iter_mut().enumerate() {
        if !(26..34).contains(&i) {
            *xi = xi.ln_1p();
        }
    }
    debug_assert_eq!(Slot::ALL.len(), 6);
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub alpha: f64,
    pub sigma: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams { alpha: 0.1, sigma: 1.0 }
    }
}

/// `1 - αe^(-θ/σ)` when the target is satisfied, `-αe^(-θ/σ)` when the state
/// changed without satisfying it, `-1` when nothing changed.
pub fn compute_reward(prev: &Summary, next: &Summary, satisfied: bool, theta: f64, p: &RewardParams) -> f64 {
    let penalty = p.alpha * (-theta.max(0.0) / p.sigma).exp();
    if satisfied {
        1.0 - penalty
    } else if prev != next {
        -penalty
    } else {
        -1.0
    }
}

/// Fully connected `STATE_DIM → hidden (ReLU) → actions` network with all
/// parameters in one flat vector: `w1` (hidden × dim), `b1`, `w2`
/// (actions × hidden), `b2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dim: usize,
    pub hidden: usize,
    pub actions: usize,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn new(dim: usize, hidden: usize, actions: usize, rng: &mut ChaCha8Rng) -> Mlp {
        let mut params = vec![0.0; hidden * dim + hidden + actions * hidden + actions];
        let l1 = (6.0 / (dim + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + actions) as f64).sqrt();
        for (i, p) in params.iter_mut().enumerate() {
            if i < hidden * dim {
                *p = rng.gen_range(-l1..l1);
            } else if (hidden * dim + hidden..hidden * dim + hidden + actions * hidden).contains(&i) {
                *p = rng.gen_range(-l2..l2);
            }
        }
        Mlp { dim, hidden, actions, params }
    }

    fn b1_off(&self) -> usize {
        self.hidden * self.dim
    }

    fn w2_off(&self) -> usize {
        self.b1_off() + self.hidden
    }

    fn b2_off(&self) -> usize {
        self.w2_off() + self.actions * self.hidden
    }

    fn hidden_layer(&self, s: &[f64]) -> Vec<f64> {
        let (d, b1) = (self.dim, self.b1_off());
        (0..self.hidden)
            .map(|j| {
                let row = &self.params[j * d..(j + 1) * d];
                let z: f64 = row.iter().zip(s).map(|(w, x)| w * x).sum::<f64>() + self.params[b1 + j];
                z.max(0.0)
            })
            .collect()
    }

    pub fn forward(&self, s: &[f64]) -> Vec<f64> {
        let h = self.hidden_layer(s);
        self.output(&h)
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        let (w2, b2) = (self.w2_off(), self.b2_off());
        (0..self.actions)
            .map(|a| {
                let row = &self.params[w2 + a * self.hidden..w2 + (a + 1) * self.hidden];
                row.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() + self.params[b2 + a]
            })
            .collect()
    }

    /// Adds the gradient of `0.5 (Q(s,a) - y)^2`, with the error clipped to
    /// `[-1, 1]`, scaled by `scale`. Returns the squared error.
    fn accumulate(&self, s: &[f64], a: usize, y: f64, scale: f64, grad: &mut [f64]) -> f64 {
        let h = self.hidden_layer(s);
        let q = self.output(&h)[a];
        let err = q - y;
        let e = err.clamp(-1.0, 1.0) * scale;
        let (d, b1, w2, b2) = (self.dim, self.b1_off(), self.w2_off(), self.b2_off());
        grad[b2 + a] += e;
        for j in 0..self.hidden {
            grad[w2 + a * self.hidden + j] += e * h[j];
            if h[j] > 0.0 {
                let dh = e * self.params[w2 + a * self.hidden + j];
                grad[b1 + j] += dh;
                for (k, x) in s.iter().enumerate() {
                    grad[j * d + k] += dh * x;
                }
            }
        }
        err * err
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Adam {
        Adam { lr, t: 0, m: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t as i32);
        let c2 = 1.0 - B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next: Vec<f64>,
    /// Actions available in `next`; the bootstrap maximum ranges over these.
    pub next_allowed: Vec<bool>,
    pub terminal: bool,
}

/// Fixed-capacity ring buffer of transitions.
#[derive(Clone, Debug, Default)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity, items: Vec::new(), next: 0 }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity.max(1);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn sample<'a>(&'a self, n: usize, rng: &mut ChaCha8Rng) -> Vec<&'a Transition> {
        (0..n).map(|_| &self.items[rng.gen_range(0..self.items.len())]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub hidden: usize,
    pub replay_capacity: usize,
    pub batch: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub gamma: f64,
    pub lr: f64,
    pub target_sync: u64,
    pub pretrain_steps: usize,
    pub reward: RewardParams,
    /// Use matcher-call counts instead of wall-clock seconds for θ.
    pub virtual_clock: bool,
    pub max_steps: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            hidden: 64,
            replay_capacity: 10_000,
            batch: 32,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_steps: 20_000,
            gamma: 0.95,
            lr: 1e-3,
            target_sync: 500,
            pretrain_steps: 5000,
            reward: RewardParams::default(),
            virtual_clock: false,
            max_steps: 50,
        }
    }
}

impl Hyper {
    pub fn epsilon(&self, step: u64) -> f64 {
        if step >= self.eps_decay_steps {
            return self.eps_end;
        }
        let f = step as f64 / self.eps_decay_steps.max(1) as f64;
        self.eps_start + (self.eps_end - self.eps_start) * f
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectMode {
    Greedy,
    EpsGreedy(f64),
}

/// Index of the largest value among allowed entries, lowest index on ties.
pub fn argmax_allowed(q: &[f64], allowed: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in q.iter().enumerate() {
        if allowed.get(i).copied().unwrap_or(true) && best.is_none_or(|b| x > q[b]) {
            best = Some(i);
        }
    }
    best
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("no trainable problems in corpus")]
    EmptyCorpus,
}

/// Value network, target network and training bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPolicy {
    pub version: u32,
    pub hyper: Hyper,
    pub model_names: Vec<String>,
    pub online: Mlp,
    pub target: Mlp,
    pub optimizer: Adam,
    pub episodes: u64,
    pub env_steps: u64,
    pub updates: u64,
    pub seed: u64,
}

impl QPolicy {
    pub fn new(pool: &Pool, hyper: Hyper, seed: u64) -> QPolicy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let online = Mlp::new(STATE_DIM, hyper.hidden, pool.len(), &mut rng);
        let optimizer = Adam::new(online.params.len(), hyper.lr);
        QPolicy {
            version: CHECKPOINT_VERSION,
            hyper,
            model_names: pool.models().iter().map(|m| m.name.clone()).collect(),
            target: online.clone(),
            online,
            optimizer,
            episodes: 0,
            env_steps: 0,
            updates: 0,
            seed,
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Vec<f64> {
        self.online.forward(state)
    }

    pub fn select(&self, state: &[f64], allowed: &[bool], mode: SelectMode, rng: &mut ChaCha8Rng) -> Option<usize> {
        if let SelectMode::EpsGreedy(eps) = mode {
            if rng.gen::<f64>() < eps {
                let ids: Vec<usize> = (0..allowed.len()).filter(|&i| allowed[i]).collect();
                return ids.choose(rng).copied();
            }
        }
        argmax_allowed(&self.q_values(state), allowed)
    }

    /// Temporal-difference targets `r + γ max_a' Q_target(s', a')` (no
    /// bootstrap for terminal transitions).
    pub fn td_targets(&self, batch: &[&Transition]) -> Vec<f64> {
        batch
            .iter()
            .map(|t| {
                if t.terminal || self.hyper.gamma == 0.0 {
                    return t.reward;
                }
                let q = self.target.forward(&t.next);
                let best = argmax_allowed(&q, &t.next_allowed).map(|a| q[a]).unwrap_or(0.0);
                t.reward + self.hyper.gamma * best
            })
            .collect()
    }

    /// One gradient step towards `targets`; returns the mean squared error.
    pub fn fit(&mut self, samples: &[(&[f64], usize, f64)]) -> f64 {
        let mut grad = vec![0.0; self.online.params.len()];
        let scale = 1.0 / samples.len().max(1) as f64;
        let mut loss = 0.0;
        for (s, a, y) in samples {
            loss += self.online.accumulate(s, *a, *y, scale, &mut grad);
        }
        self.optimizer.step(&mut self.online.params, &grad);
        loss * scale
    }

    fn dqn_update(&mut self, replay: &ReplayBuffer, rng: &mut ChaCha8Rng) {
        if replay.len() < self.hyper.batch {
            return;
        }
        let batch = replay.sample(self.hyper.batch, rng);
        let ys = self.td_targets(&batch);
        let samples: Vec<(&[f64], usize, f64)> =
            batch.iter().zip(&ys).map(|(t, &y)| (t.state.as_slice(), t.action, y)).collect();
        self.fit(&samples);
        self.updates += 1;
        if self.updates % self.hyper.target_sync.max(1) == 0 {
            self.target = self.online.clone();
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), SelectorError> {
        let text = serde_json::to_string(self).expect("policy serializes");
        std::fs::write(path, text).map_err(|source| SelectorError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<QPolicy, SelectorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SelectorError::Io { path: path.display().to_string(), source })?;
        let p: QPolicy = serde_json::from_str(&text).map_err(|e| SelectorError::Checkpoint(e.to_string()))?;
        if p.version != CHECKPOINT_VERSION {
            return Err(SelectorError::Checkpoint(format!("unsupported version {}", p.version)));
        }
        Ok(p)
    }

    /// Checks that the checkpoint was trained on a pool with the same models
    /// in the same order.
    pub fn check_pool(&self, pool: &Pool) -> Result<(), SelectorError> {
        let names: Vec<&str> = pool.models().iter().map(|m| m.name.as_str()).collect();
        if names != self.model_names.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(SelectorError::Checkpoint("checkpoint was trained on a different pool".into()));
        }
        Ok(())
    }
}

impl Policy for QPolicy {
    fn choose(&self, session: &Session, allowed: &[bool]) -> Option<usize> {
        argmax_allowed(&self.q_values(&encode_state(session)), allowed)
    }
}

/// A recorded `(state, action, reward)` triple for supervised warm-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: u64,
    pub cumulative_reward: f64,
    pub solved: bool,
    pub steps: usize,
}

fn session_config(h: &Hyper) -> ReasonerConfig {
    ReasonerConfig { strategy: Strategy::Agent, max_steps: h.max_steps, ..ReasonerConfig::default() }
}

fn theta(h: &Hyper, attempts: usize, elapsed: std::time::Duration) -> f64 {
    if h.virtual_clock {
        attempts as f64
    } else {
        elapsed.as_secs_f64()
    }
}

/// Records warm-up samples: every model attempt made by the heuristic
/// strategy, plus one uniformly random attempt per step of a random-policy
/// run.
pub fn generate_samples(pool: &Pool, problems: &[ProblemInput], hyper: &Hyper, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in problems {
        let Ok(g) = build(p) else { continue };
        // heuristic run
        let mut s = Session::new(g.clone(), pool, session_config(hyper));
        for _ in 0..hyper.max_steps {
            if s.target_value().is_some() {
                break;
            }
            let mut progressed = false;
            for kind in [crate::pool::ModelKind::Proving, crate::pool::ModelKind::Property] {
                let ids: Vec<usize> = pool.of_kind(kind).map(|(i, _)| i).collect();
                for i in ids {
                    let state = encode_state(&s);
                    let prev = s.summary();
                    let att = s.try_model(i);
                    let r = compute_reward(&prev, &s.summary(), s.target_value().is_some(), theta(hyper, 1, att.elapsed), &hyper.reward);
                    out.push(Sample { state, action: i, reward: r });
                    if att.matched {
                        progressed = true;
                        break;
                    }
                }
                if s.target_value().is_some() {
                    break;
                }
            }
            if !progressed {
                break;
            }
        }
        // random run
        let mut s = Session::new(g, pool, session_config(hyper));
        for _ in 0..hyper.max_steps {
            if s.target_value().is_some() {
                break;
            }
            let a = rng.gen_range(0..pool.len());
            let state = encode_state(&s);
            let prev = s.summary();
            let att = s.try_model(a);
            let r = compute_reward(&prev, &s.summary(), s.target_value().is_some(), theta(hyper, 1, att.elapsed), &hyper.reward);
            out.push(Sample { state, action: a, reward: r });
        }
    }
    out
}

/// Supervised warm-up: regress Q(s, a) onto the recorded reward for
/// `steps` minibatch steps. Returns the loss per step.
pub fn pretrain(policy: &mut QPolicy, samples: &[Sample], steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut losses = Vec::with_capacity(steps);
    if samples.is_empty() {
        return losses;
    }
    for _ in 0..steps {
        let batch: Vec<(&[f64], usize, f64)> = (0..policy.hyper.batch)
            .map(|_| {
                let s = &samples[rng.gen_range(0..samples.len())];
                (s.state.as_slice(), s.action, s.reward)
            })
            .collect();
        losses.push(policy.fit(&batch));
    }
    policy.target = policy.online.clone();
    losses
}

/// Fresh policy warmed up on samples recorded from `problems`.
pub fn initial_policy(pool: &Pool, problems: &[ProblemInput], hyper: Hyper, seed: u64) -> QPolicy {
    let mut p = QPolicy::new(pool, hyper, seed);
    let samples = generate_samples(pool, problems, &p.hyper, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = p.hyper.pretrain_steps;
    pretrain(&mut p, &samples, steps, &mut rng);
    p
}

/// Runs `episodes` DQN episodes, continuing the policy's episode count.
/// Problems are visited in a seeded shuffled order per pass.
pub fn train(
    policy: &mut QPolicy,
    pool: &Pool,
    problems: &[ProblemInput],
    episodes: u64,
    log: &mut dyn FnMut(&EpisodeLog),
) -> Result<(), SelectorError> {
    let holograms: Vec<_> = problems.iter().filter_map(|p| build(p).ok()).collect();
    if holograms.is_empty() {
        return Err(SelectorError::EmptyCorpus);
    }
    let hyper = policy.hyper.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ policy.episodes.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut replay = ReplayBuffer::new(hyper.replay_capacity);
    let mut order: Vec<usize> = Vec::new();
    for _ in 0..episodes {
        if order.is_empty() {
            order = (0..holograms.len()).collect();
            order.shuffle(&mut rng);
        }
        let idx = order.pop().expect("refilled above");
        let mut s = Session::new(holograms[idx].clone(), pool, session_config(&hyper));
        let mut failed: BTreeSet<usize> = BTreeSet::new();
        let mut total = 0.0;
        let mut steps = 0;
        let mut solved = s.target_value().is_some();
        while !solved && steps < hyper.max_steps {
            let state = encode_state(&s);
            let allowed = s.allowed(&failed);
            let eps = hyper.epsilon(policy.env_steps);
            let Some(a) = policy.select(&state, &allowed, SelectMode::EpsGreedy(eps), &mut rng) else { break };
            let prev = s.summary();
            let att = s.try_model(a);
            solved = s.target_value().is_some();
            let r = compute_reward(&prev, &s.summary(), solved, theta(&hyper, 1, att.elapsed), &hyper.reward);
            if att.changed {
                failed.clear();
            } else {
                failed.insert(a);
            }
            steps += 1;
            policy.env_steps += 1;
            let next_allowed = s.allowed(&failed);
            let terminal = solved || !next_allowed.iter().any(|&x| x) || steps >= hyper.max_steps;
            replay.push(Transition { state, action: a, reward: r, next: encode_state(&s), next_allowed, terminal });
            total += r;
            policy.dqn_update(&replay, &mut rng);
        }
        policy.episodes += 1;
        log(&EpisodeLog { episode: policy.episodes, cumulative_reward: total, solved, steps });
    }
    Ok(())
}

pub fn write_log_csv(rows: &[EpisodeLog], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "episode,cumulative_reward,solved,steps")?;
    for r in rows {
        writeln!(out, "{},{:.6},{},{}", r.episode, r.cumulative_reward, u8::from(r.solved), r.steps)?;
    }
    Ok(())
}

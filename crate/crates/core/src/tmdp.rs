//! The teacher's Markov decision process for a blind Q-learner student.
//!
//! States are cells of a uniform grid over the student's two Q-values.
//! From a cell the teacher picks an action; the student answers with a
//! Boltzmann choice at a fixed temperature, learns from its payoff, and the
//! updated Q-values are snapped back onto the grid. The reward of a state is
//! the expected valuation of the student's action there.
//!
//! Values follow `V(s) = U(s) + gamma0 * max_a sum_s' P(s, s', a) V(s')`, so
//! the current state is counted at discount step zero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{bql_step, first_action_probability};
use crate::teaching::TeachingGame;

pub const DEFAULT_CELLS: usize = 200;
pub const DEFAULT_GAMMA0: f64 = 0.99;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const TEACHER_ACTIONS: usize = 2;

/// A uniform grid over `[lo, hi]` on both Q-value axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl QGrid {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("grid bounds need lo < hi, got [{lo}, {hi}]")));
        }
        if cells < 2 || cells > u32::MAX as usize / 2 {
            return Err(Error::Config(format!("need at least two cells per axis, got {cells}")));
        }
        Ok(QGrid { lo, hi, cells })
    }

    /// Bounds from the game's student payoffs, which confine every BQL
    /// started inside them.
    pub fn for_game(game: &TeachingGame, cells: usize) -> Result<Self> {
        let (lo, hi) = game.student_range();
        QGrid::new(lo, hi, cells)
    }

    pub fn num_states(&self) -> usize {
        self.cells * self.cells
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    /// Cell along one axis; values are clamped to the bounds and exact
    /// midpoints between centers go to the upper cell.
    pub fn axis_index(&self, q: f64) -> usize {
        let q = q.clamp(self.lo, self.hi);
        let k = ((q - self.lo) * self.cells as f64 / (self.hi - self.lo)).floor();
        (k as usize).min(self.cells - 1)
    }

    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.width()
    }

    /// State index of the cell holding `(q1, q2)`, row-major on `q1`.
    pub fn snap(&self, q: [f64; 2]) -> usize {
        self.axis_index(q[0]) * self.cells + self.axis_index(q[1])
    }

    pub fn state_q(&self, s: usize) -> [f64; 2] {
        [self.center(s / self.cells), self.center(s % self.cells)]
    }
}

/// Two successors per (state, teacher action): one for each student action,
/// merged when they land in the same cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: [u32; 2],
    pub prob: [f64; 2],
}

impl Transition {
    pub fn successors(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = if self.prob[1] == 0.0 && self.next[0] == self.next[1] { 1 } else { 2 };
        (0..n).map(move |k| (self.next[k] as usize, self.prob[k]))
    }

    fn expect(&self, v: &[f64]) -> f64 {
        self.prob[0] * v[self.next[0] as usize] + self.prob[1] * v[self.next[1] as usize]
    }
}

#[derive(Debug, Clone)]
pub struct TmdpModel {
    pub grid: QGrid,
    pub temperature: f64,
    pub alpha: f64,
    /// Indexed `state * TEACHER_ACTIONS + action`.
    pub transitions: Vec<Transition>,
    pub reward: Vec<f64>,
}

/// Build the model. Every cell is represented by its center.
pub fn build_tmdp(game: &TeachingGame, grid: QGrid, temperature: f64, alpha: f64) -> Result<TmdpModel> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let n = grid.num_states();
    let mut transitions = vec![
        Transition {
            next: [0; 2],
            prob: [0.0; 2],
        };
        n * TEACHER_ACTIONS
    ];
    let mut reward = vec![0.0; n];
    transitions
        .par_chunks_mut(TEACHER_ACTIONS)
        .zip(reward.par_iter_mut())
        .enumerate()
        .for_each(|(s, (row, u))| {
            let q = grid.state_q(s);
            let p0 = first_action_probability(q, temperature);
            let rho = [p0, 1.0 - p0];
            *u = rho[0] * game.u(0) + rho[1] * game.u(1);
            for (t, tr) in row.iter_mut().enumerate() {
                let mut next = [0u32; 2];
                for (a, slot) in next.iter_mut().enumerate() {
                    let mut q2 = q;
                    q2[a] = bql_step(q[a], alpha, game.student_payoff(a, t));
                    *slot = grid.snap(q2) as u32;
                }
                *tr = if next[0] == next[1] {
                    Transition {
                        next,
                        prob: [1.0, 0.0],
                    }
                } else {
                    Transition { next, prob: rho }
                };
            }
        });
    Ok(TmdpModel {
        grid,
        temperature,
        alpha,
        transitions,
        reward,
    })
}

impl TmdpModel {
    pub fn num_states(&self) -> usize {
        self.reward.len()
    }

    pub fn transition(&self, s: usize, action: usize) -> &Transition {
        &self.transitions[s * TEACHER_ACTIONS + action]
    }

    /// A model given directly by its rewards and transitions, for testing
    /// the solver on hand-built chains.
    pub fn from_parts(grid: QGrid, reward: Vec<f64>, transitions: Vec<Transition>) -> Result<Self> {
        if transitions.len() != reward.len() * TEACHER_ACTIONS {
            return Err(Error::Config("need one transition per state and action".into()));
        }
        for tr in &transitions {
            if tr.next.iter().any(|&x| x as usize >= reward.len())
                || ((tr.prob[0] + tr.prob[1]) - 1.0).abs() > 1e-12
            {
                return Err(Error::Config(format!("bad transition {tr:?}")));
            }
        }
        Ok(TmdpModel {
            grid,
            temperature: f64::NAN,
            alpha: f64::NAN,
            transitions,
            reward,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySolution {
    pub values: Vec<f64>,
    pub policy: Vec<u8>,
    pub gamma0: f64,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
    /// Sup-norm change of every sweep, in order.
    pub residuals: Vec<f64>,
}

fn check_discount(gamma0: f64, tol: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma0) {
        return Err(Error::Domain(format!("gamma0 must be in [0, 1), got {gamma0}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Sweep until the last change guarantees `|V - V*| < tol`.
fn stop_threshold(gamma0: f64, tol: f64) -> f64 {
    if gamma0 == 0.0 {
        f64::INFINITY
    } else {
        tol * (1.0 - gamma0) / gamma0
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.par_iter()
        .zip(b.par_iter())
        .map(|(x, y)| (x - y).abs())
        .reduce(|| 0.0, f64::max)
}

/// Synchronous value iteration from `V = 0`. Ties go to the lower action.
pub fn value_iteration(model: &TmdpModel, gamma0: f64, tol: f64) -> Result<PolicySolution> {
    check_discount(gamma0, tol)?;
    let n = model.num_states();
    let threshold = stop_threshold(gamma0, tol);
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residuals = Vec::new();
    loop {
        next.par_iter_mut().enumerate().for_each(|(s, out)| {
            let best = (0..TEACHER_ACTIONS)
                .map(|a| model.transition(s, a).expect(&v))
                .fold(f64::NEG_INFINITY, f64::max);
            *out = model.reward[s] + gamma0 * best;
        });
        let r = sup_diff(&next, &v);
        residuals.push(r);
        std::mem::swap(&mut v, &mut next);
        if r < threshold {
            break;
        }
    }
    let policy = greedy_policy(model, &v);
    Ok(PolicySolution {
        values: v,
        policy,
        gamma0,
        residual: *residuals.last().expect("at least one sweep"),
        residuals,
    })
}

fn greedy_policy(model: &TmdpModel, v: &[f64]) -> Vec<u8> {
    (0..model.num_states())
        .into_par_iter()
        .map(|s| {
            let mut best = 0;
            let mut best_v = model.transition(s, 0).expect(v);
            for a in 1..TEACHER_ACTIONS {
                let x = model.transition(s, a).expect(v);
                if x > best_v {
                    best = a;
                    best_v = x;
                }
            }
            best as u8
        })
        .collect()
}

/// Value of a deterministic policy.
pub fn evaluate_policy(model: &TmdpModel, policy: &[u8], gamma0: f64, tol: f64) -> Result<Vec<f64>> {
    if policy.len() != model.num_states() {
        return Err(Error::Config("policy must cover every state".into()));
    }
    if policy.iter().any(|&a| a as usize >= TEACHER_ACTIONS) {
        return Err(Error::Config("policy action out of range".into()));
    }
    evaluate_mixed(model, |s| {
        let mut p = [0.0; TEACHER_ACTIONS];
        p[policy[s] as usize] = 1.0;
        p
    }, gamma0, tol)
}

/// Value of a stationary randomized policy giving action probabilities per
/// state.
pub fn evaluate_mixed(
    model: &TmdpModel,
    probs: impl Fn(usize) -> [f64; TEACHER_ACTIONS] + Sync,
    gamma0: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    check_discount(gamma0, tol)?;
    let n = model.num_states();
    let threshold = stop_threshold(gamma0, tol);
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    loop {
        next.par_iter_mut().enumerate().for_each(|(s, out)| {
            let p = probs(s);
            let cont: f64 = (0..TEACHER_ACTIONS)
                .filter(|&a| p[a] > 0.0)
                .map(|a| p[a] * model.transition(s, a).expect(&v))
                .sum();
            *out = model.reward[s] + gamma0 * cont;
        });
        let r = sup_diff(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if r < threshold {
            return Ok(v);
        }
    }
}

/// Replay the student's learning on its true, unsnapped Q-values.
pub fn track_student(initial: [f64; 2], alpha: f64, observed: impl IntoIterator<Item = (usize, f64)>) -> [f64; 2] {
    let mut q = initial;
    for (a, r) in observed {
        q[a] = bql_step(q[a], alpha, r);
    }
    q
}

/// A solved teaching policy, ready to execute against a live student.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub grid: QGrid,
    pub temperature: f64,
    pub gamma0: f64,
    pub alpha: f64,
    pub actions: Vec<u8>,
    pub values: Vec<f64>,
}

const MAGIC: &[u8; 8] = b"PCMASPOL";
const VERSION: u32 = 1;

impl Policy {
    pub fn from_solution(model: &TmdpModel, solution: PolicySolution) -> Self {
        Policy {
            grid: model.grid,
            temperature: model.temperature,
            gamma0: solution.gamma0,
            alpha: model.alpha,
            actions: solution.policy,
            values: solution.values,
        }
    }

    /// Always play `action`; values are left at zero.
    pub fn constant(grid: QGrid, temperature: f64, gamma0: f64, alpha: f64, action: u8) -> Self {
        Policy {
            grid,
            temperature,
            gamma0,
            alpha,
            actions: vec![action; grid.num_states()],
            values: vec![0.0; grid.num_states()],
        }
    }

    /// Build the model for `game` and solve it.
    pub fn solve(game: &TeachingGame, grid: QGrid, temperature: f64, alpha: f64, gamma0: f64, tol: f64) -> Result<Self> {
        let model = build_tmdp(game, grid, temperature, alpha)?;
        let solution = value_iteration(&model, gamma0, tol)?;
        Ok(Policy::from_solution(&model, solution))
    }

    pub fn action_for(&self, q: [f64; 2]) -> usize {
        self.actions[self.grid.snap(q)] as usize
    }

    pub fn value_at(&self, q: [f64; 2]) -> f64 {
        self.values[self.grid.snap(q)]
    }

    /// Little-endian binary: magic, version, lo, hi, cells, temperature,
    /// gamma0, alpha, then one action byte and one f64 value per state.
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for x in [self.grid.lo, self.grid.hi] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&(self.grid.cells as u64).to_le_bytes())?;
        for x in [self.temperature, self.gamma0, self.alpha] {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&self.actions)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::PolicyFormat("not a policy file".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::PolicyFormat(format!("unsupported version {version}")));
        }
        let mut word = || -> Result<[u8; 8]> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(b)
        };
        let lo = f64::from_le_bytes(word()?);
        let hi = f64::from_le_bytes(word()?);
        let cells = u64::from_le_bytes(word()?) as usize;
        let temperature = f64::from_le_bytes(word()?);
        let gamma0 = f64::from_le_bytes(word()?);
        let alpha = f64::from_le_bytes(word()?);
        let grid = QGrid::new(lo, hi, cells).map_err(|e| Error::PolicyFormat(e.to_string()))?;
        let n = grid.num_states();
        let mut actions = vec![0u8; n];
        r.read_exact(&mut actions)?;
        if actions.iter().any(|&a| a as usize >= TEACHER_ACTIONS) {
            return Err(Error::PolicyFormat("action out of range".into()));
        }
        let mut raw = vec![0u8; n * 8];
        r.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")))
            .collect();
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::PolicyFormat("trailing bytes".into()));
        }
        Ok(Policy {
            grid,
            temperature,
            gamma0,
            alpha,
            actions,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Policy::read_from(&mut BufReader::new(File::open(path)?))
    }
}

/// Number of temperatures in a decay-schedule bank.
pub const BANK_SIZE: usize = 12;

/// Log-spaced temperatures from `hi` down to `lo`.
pub fn bank_temperatures(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && hi > lo && lo > 0.0);
    let step = (lo / hi).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { lo } else { hi * (step * k as f64).exp() })
        .collect()
}

/// Policies solved at several temperatures, for students whose temperature
/// changes over time. Approximate: each step uses the policy of the nearest
/// temperature (in log distance) as if it held forever.
#[derive(Debug, Clone)]
pub struct PolicyBank {
    policies: Vec<Policy>,
}

impl PolicyBank {
    pub fn new(policies: Vec<Policy>) -> Result<Self> {
        if policies.is_empty() {
            return Err(Error::Config("a policy bank needs at least one policy".into()));
        }
        Ok(PolicyBank { policies })
    }

    /// Solve one policy per temperature of [`bank_temperatures`]`(75, 0.5, 12)`.
    pub fn solve(game: &TeachingGame, grid: QGrid, alpha: f64, gamma0: f64, tol: f64) -> Result<Self> {
        let policies = bank_temperatures(75.0, 0.5, BANK_SIZE)
            .into_iter()
            .map(|t| Policy::solve(game, grid, t, alpha, gamma0, tol))
            .collect::<Result<Vec<_>>>()?;
        PolicyBank::new(policies)
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn select(&self, temperature: f64) -> &Policy {
        let lt = temperature.ln();
        self.policies
            .iter()
            .min_by(|a, b| {
                let da = (a.temperature.ln() - lt).abs();
                let db = (b.temperature.ln() - lt).abs();
                da.total_cmp(&db)
            })
            .expect("bank is non-empty")
    }
}

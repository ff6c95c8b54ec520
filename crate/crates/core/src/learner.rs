//! Reinforcement-learning students: the blind Q-learner (one value per
//! action) and the Q-learner whose states encode its last `m` joint actions.
//! Both pick actions from a Boltzmann distribution over their Q-values.
//!
//! Action index 0 is the first action (Coop in the prisoner's dilemma),
//! index 1 the second (Defect).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub const COOP: usize = 0;
pub const DEFECT: usize = 1;

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_GAMMA: f64 = 0.9;

/// Boltzmann probabilities `P(a) ∝ exp(q(a) / T)`.
///
/// The largest exponent is subtracted before exponentiating, so any finite
/// `q / T` is safe.
pub fn boltzmann(q: &[f64], temperature: f64) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    if q.is_empty() {
        return Err(Error::Domain("no Q-values to select from".into()));
    }
    let top = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = q.iter().map(|v| ((v - top) / temperature).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Probability of action 0 for a two-action Boltzmann selector.
pub fn first_action_probability(q: [f64; 2], temperature: f64) -> f64 {
    let top = q[0].max(q[1]);
    let e0 = ((q[0] - top) / temperature).exp();
    let e1 = ((q[1] - top) / temperature).exp();
    e0 / (e0 + e1)
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temperature must be positive, got {t}")))
    }
}

/// Sample a two-action Boltzmann choice from exactly one uniform draw.
pub fn sample_pair(q: [f64; 2], temperature: f64, rng: &mut SimRng) -> usize {
    if rng.gen::<f64>() < first_action_probability(q, temperature) {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemperatureSchedule {
    Fixed { temperature: f64 },
    /// `T(0) = initial`, `T(n + 1) = T(n) * rate + offset`.
    Decay { initial: f64, rate: f64, offset: f64 },
}

impl TemperatureSchedule {
    pub const fn fixed(temperature: f64) -> Self {
        TemperatureSchedule::Fixed { temperature }
    }

    /// The 75 / 0.9 / 0.05 schedule: fast early cooling toward 0.5.
    pub const fn standard_decay() -> Self {
        TemperatureSchedule::Decay {
            initial: 75.0,
            rate: 0.9,
            offset: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TemperatureSchedule::Fixed { temperature } => check_temperature(temperature),
            TemperatureSchedule::Decay {
                initial,
                rate,
                offset,
            } => {
                check_temperature(initial)?;
                if !(0.0..=1.0).contains(&rate) || !(offset >= 0.0) || (rate == 0.0 && offset == 0.0) {
                    return Err(Error::Domain(format!(
                        "decay needs 0 <= rate <= 1 and offset >= 0 with a positive floor, got rate {rate} offset {offset}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Temperature at step `n`, by running the recurrence.
    pub fn temperature_at(&self, n: usize) -> f64 {
        self.iter().nth(n).expect("schedules are infinite")
    }

    pub fn iter(&self) -> Temperatures {
        Temperatures {
            schedule: *self,
            current: match *self {
                TemperatureSchedule::Fixed { temperature } => temperature,
                TemperatureSchedule::Decay { initial, .. } => initial,
            },
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, TemperatureSchedule::Fixed { .. })
    }
}

/// Infinite iterator over a schedule's temperatures.
#[derive(Debug, Clone)]
pub struct Temperatures {
    schedule: TemperatureSchedule,
    current: f64,
}

impl Iterator for Temperatures {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let t = self.current;
        if let TemperatureSchedule::Decay { rate, offset, .. } = self.schedule {
            self.current = self.current * rate + offset;
        }
        Some(t)
    }
}

/// Blind Q-learner: `q_new(a) = (1 - alpha) q_old(a) + alpha R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BqlState {
    pub q: [f64; 2],
    pub alpha: f64,
}

impl BqlState {
    pub fn new(alpha: f64) -> Self {
        BqlState { q: [0.0; 2], alpha }
    }

    pub fn with_q(q: [f64; 2], alpha: f64) -> Self {
        BqlState { q, alpha }
    }

    pub fn update(&mut self, action: usize, reward: f64) {
        self.q[action] = bql_step(self.q[action], self.alpha, reward);
    }

    pub fn updated(mut self, action: usize, reward: f64) -> Self {
        self.update(action, reward);
        self
    }
}

/// One exponential-averaging step, shared by the learner, the teacher's
/// tracker and the TMDP builder so all three agree bit-for-bit.
#[inline]
pub fn bql_step(q: f64, alpha: f64, reward: f64) -> f64 {
    (1.0 - alpha) * q + alpha * reward
}

/// Encode the last `m` joint actions, oldest first, as a base-4 number with
/// the most recent joint action in the least significant digit.
///
/// Each digit is `2 * own action + opponent action`.
pub fn encode_state(history: &[(usize, usize)], memory: usize) -> Result<usize> {
    if history.len() != memory {
        return Err(Error::HistoryLength {
            expected: memory,
            got: history.len(),
        });
    }
    let mut s = 0;
    for &(own, other) in history {
        if own > 1 || other > 1 {
            return Err(Error::Domain(format!("joint action ({own},{other}) is not binary")));
        }
        s = s * 4 + 2 * own + other;
    }
    Ok(s)
}

/// Q-learner over states that remember the last `memory` joint actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlState {
    pub memory: usize,
    pub q: Vec<[f64; 2]>,
    pub current_state: usize,
    pub alpha: f64,
    pub gamma: f64,
}

impl QlState {
    /// All Q-values zero; the starting state is a uniformly drawn fictitious
    /// history.
    pub fn new(memory: usize, alpha: f64, gamma: f64, rng: &mut SimRng) -> Result<Self> {
        if memory == 0 || memory > 12 {
            return Err(Error::Config(format!("memory must be in 1..=12, got {memory}")));
        }
        let states = 4usize.pow(memory as u32);
        Ok(QlState {
            memory,
            q: vec![[0.0; 2]; states],
            current_state: rng.gen_range(0..states),
            alpha,
            gamma,
        })
    }

    pub fn num_states(&self) -> usize {
        self.q.len()
    }

    /// State reached from `state` after the joint action `(own, other)`.
    pub fn successor(&self, state: usize, own: usize, other: usize) -> usize {
        (state * 4) % self.num_states() + 2 * own + other
    }

    /// `q(s0,a) <- (1 - alpha) q(s0,a) + alpha (R + gamma max_a' q(s1,a'))`,
    /// then move to `s1`.
    pub fn update(&mut self, s0: usize, action: usize, reward: f64, s1: usize) {
        let v = self.q[s1][0].max(self.q[s1][1]);
        let cell = &mut self.q[s0][action];
        *cell = (1.0 - self.alpha) * *cell + self.alpha * (reward + self.gamma * v);
        self.current_state = s1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerKind {
    Blind,
    Q { memory: usize, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub alpha: f64,
    /// Starting Q-values for a blind learner; zero when absent.
    #[serde(default)]
    pub initial_q: Option<[f64; 2]>,
}

impl LearnerConfig {
    pub const fn blind(alpha: f64) -> Self {
        LearnerConfig {
            kind: LearnerKind::Blind,
            alpha,
            initial_q: None,
        }
    }

    pub const fn q(memory: usize, alpha: f64, gamma: f64) -> Self {
        LearnerConfig {
            kind: LearnerKind::Q { memory, gamma },
            alpha,
            initial_q: None,
        }
    }

    pub fn build(&self, rng: &mut SimRng) -> Result<Learner> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        Ok(match self.kind {
            LearnerKind::Blind => {
                Learner::Blind(BqlState::with_q(self.initial_q.unwrap_or([0.0; 2]), self.alpha))
            }
            LearnerKind::Q { memory, gamma } => {
                if !(0.0..1.0).contains(&gamma) {
                    return Err(Error::Config(format!("gamma must be in [0, 1), got {gamma}")));
                }
                Learner::Q(QlState::new(memory, self.alpha, gamma, rng)?)
            }
        })
    }
}

/// A live student, either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Learner {
    Blind(BqlState),
    Q(QlState),
}

impl Learner {
    /// Q-values the next choice is made from.
    pub fn current_q(&self) -> [f64; 2] {
        match self {
            Learner::Blind(s) => s.q,
            Learner::Q(s) => s.q[s.current_state],
        }
    }

    /// Boltzmann choice; consumes exactly one uniform draw.
    pub fn act(&self, temperature: f64, rng: &mut SimRng) -> usize {
        sample_pair(self.current_q(), temperature, rng)
    }

    /// Learn from the joint action `(own, other)` and the reward it paid.
    pub fn observe(&mut self, own: usize, other: usize, reward: f64) {
        match self {
            Learner::Blind(s) => s.update(own, reward),
            Learner::Q(s) => {
                let s0 = s.current_state;
                let s1 = s.successor(s0, own, other);
                s.update(s0, own, reward, s1);
            }
        }
    }
}

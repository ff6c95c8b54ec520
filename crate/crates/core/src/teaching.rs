//! Teaching a reinforcement learner by repeatedly playing a 2x2 game with it.
//!
//! The student's payoff entries follow the usual layout: `a` is student
//! action 1 against teacher action I, `b` is 1 against II, `c` is 2 against
//! I and `d` is 2 against II. Action indices are zero-based in the API (so
//! action 1 / Coop is index 0).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{bql_step, Learner, LearnerConfig, LearnerKind, TemperatureSchedule};
use crate::rng::{rng_from_seed, SimRng};
use crate::tmdp::{Policy, PolicyBank};

/// A 2x2 teaching game. Payoffs are indexed `[student action][teacher action]`
/// for both players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TeachingGameFile", into = "TeachingGameFile")]
pub struct TeachingGame {
    student: [[f64; 2]; 2],
    teacher: [[f64; 2]; 2],
    target: usize,
    u: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Entries {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
struct TeachingGameFile {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    teacher: Option<Entries>,
    /// One-based student action the teacher promotes.
    #[serde(default = "one")]
    target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<[f64; 2]>,
}

fn one() -> usize {
    1
}

impl TryFrom<TeachingGameFile> for TeachingGame {
    type Error = Error;

    fn try_from(f: TeachingGameFile) -> Result<Self> {
        if f.target == 0 || f.target > 2 {
            return Err(Error::Config(format!("target must be 1 or 2, got {}", f.target)));
        }
        let mut g = match f.teacher {
            Some(t) => TeachingGame::new([f.a, f.b, f.c, f.d], [t.a, t.b, t.c, t.d])?,
            None => TeachingGame::symmetric(f.a, f.b, f.c, f.d),
        };
        g = g.with_target(f.target - 1)?;
        if let Some(u) = f.u {
            g = g.with_valuation(u)?;
        }
        g.validate()?;
        Ok(g)
    }
}

impl From<TeachingGame> for TeachingGameFile {
    fn from(g: TeachingGame) -> Self {
        let [[a, b], [c, d]] = g.student;
        let [[ta, tb], [tc, td]] = g.teacher;
        let default_u = TeachingGame::indicator(g.target);
        TeachingGameFile {
            a,
            b,
            c,
            d,
            teacher: Some(Entries {
                a: ta,
                b: tb,
                c: tc,
                d: td,
            }),
            target: g.target + 1,
            u: (g.u != default_u).then_some(g.u),
        }
    }
}

/// How hard the teaching problem is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// The target action is strictly better whatever the teacher does.
    Dominant,
    /// The target action is strictly better under this teacher action only.
    Preemptable(usize),
    Challenging,
}

impl TeachingGame {
    /// Student entries `[a, b, c, d]` and teacher entries in the same layout
    /// (indexed by student action, then teacher action).
    pub fn new(student: [f64; 4], teacher: [f64; 4]) -> Result<Self> {
        let g = TeachingGame {
            student: [[student[0], student[1]], [student[2], student[3]]],
            teacher: [[teacher[0], teacher[1]], [teacher[2], teacher[3]]],
            target: 0,
            u: Self::indicator(0),
        };
        g.validate()?;
        Ok(g)
    }

    /// A symmetric game: the teacher's payoff for `(s, t)` is the student's
    /// payoff for `(t, s)`.
    pub fn symmetric(a: f64, b: f64, c: f64, d: f64) -> Self {
        TeachingGame {
            student: [[a, b], [c, d]],
            teacher: [[a, c], [b, d]],
            target: 0,
            u: Self::indicator(0),
        }
    }

    fn indicator(target: usize) -> [f64; 2] {
        let mut u = [0.0; 2];
        u[target] = 1.0;
        u
    }

    /// Promote `target` (zero-based); resets `u` to its indicator.
    pub fn with_target(mut self, target: usize) -> Result<Self> {
        if target > 1 {
            return Err(Error::Config(format!("target action {target} out of range")));
        }
        self.target = target;
        self.u = Self::indicator(target);
        Ok(self)
    }

    pub fn with_valuation(mut self, u: [f64; 2]) -> Result<Self> {
        if u.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!("valuation must be finite and non-negative, got {u:?}")));
        }
        self.u = u;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.student.iter().chain(&self.teacher).flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGame("payoffs must be finite".into()));
        }
        Ok(())
    }

    pub fn student_payoff(&self, student: usize, teacher: usize) -> f64 {
        self.student[student][teacher]
    }

    pub fn teacher_payoff(&self, student: usize, teacher: usize) -> f64 {
        self.teacher[student][teacher]
    }

    pub fn entries(&self) -> [f64; 4] {
        let [[a, b], [c, d]] = self.student;
        [a, b, c, d]
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn valuation(&self) -> [f64; 2] {
        self.u
    }

    pub fn u(&self, student_action: usize) -> f64 {
        self.u[student_action]
    }

    /// Smallest and largest student payoff.
    pub fn student_range(&self) -> (f64, f64) {
        let all = self.student.iter().flatten();
        let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn classify(&self) -> Classification {
        let t = self.target;
        let o = 1 - t;
        let better = |teacher: usize| self.student[t][teacher] > self.student[o][teacher];
        match (better(0), better(1)) {
            (true, true) => Classification::Dominant,
            (true, false) => Classification::Preemptable(0),
            (false, true) => Classification::Preemptable(1),
            (false, false) => Classification::Challenging,
        }
    }
}

/// `a + b + gamma (a + c) - (c + d + gamma (b + d))`, the predictor of how
/// well tit-for-tat teaches a one-step-memory Q-learner.
pub fn dif(game: &TeachingGame, gamma: f64) -> f64 {
    let [a, b, c, d] = game.entries();
    a + b + gamma * (a + c) - (c + d + gamma * (b + d))
}

/// A teaching strategy, before it is bound to a session.
#[derive(Debug, Clone)]
pub enum TeacherStrategy {
    Fixed(usize),
    /// Mirror the student's previous action; open with action 0.
    Tft,
    /// Play action 1 only after two consecutive student 1s.
    TwoTft,
    /// An identical learner over the teacher's payoffs; `None` copies the
    /// student's configuration.
    Learner(Option<LearnerConfig>),
    /// Optimal policy of the teacher's MDP at one temperature.
    Policy(Arc<Policy>),
    /// Per step, the precomputed policy nearest the current temperature.
    PolicyBank(Arc<PolicyBank>),
    DelayedSwitch { k: usize, before: usize, after: usize },
}

/// A teacher as written on the command line:
/// `tft | 2tft | fixed:I | fixed:II | learner | optimal | delayed:K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TeacherFlag {
    Fixed(usize),
    Tft,
    TwoTft,
    Learner,
    Optimal,
    Delayed(usize),
}

impl FromStr for TeacherFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown teacher `{s}`"));
        Ok(match s.to_ascii_lowercase().as_str() {
            "tft" => TeacherFlag::Tft,
            "2tft" => TeacherFlag::TwoTft,
            "learner" => TeacherFlag::Learner,
            "optimal" => TeacherFlag::Optimal,
            other => {
                if let Some(a) = other.strip_prefix("fixed:") {
                    TeacherFlag::Fixed(match a {
                        "i" | "1" => 0,
                        "ii" | "2" => 1,
                        _ => return Err(bad()),
                    })
                } else if let Some(k) = other.strip_prefix("delayed:") {
                    TeacherFlag::Delayed(k.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl fmt::Display for TeacherFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TeacherFlag::Fixed(0) => write!(f, "fixed:I"),
            TeacherFlag::Fixed(_) => write!(f, "fixed:II"),
            TeacherFlag::Tft => write!(f, "tft"),
            TeacherFlag::TwoTft => write!(f, "2tft"),
            TeacherFlag::Learner => write!(f, "learner"),
            TeacherFlag::Optimal => write!(f, "optimal"),
            TeacherFlag::Delayed(k) => write!(f, "delayed:{k}"),
        }
    }
}

impl TryFrom<String> for TeacherFlag {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TeacherFlag> for String {
    fn from(t: TeacherFlag) -> Self {
        t.to_string()
    }
}

impl TeacherFlag {
    /// Bind to a strategy. `optimal` asks `policy` for the solved policies;
    /// `delayed:K` plays the non-target action for K steps, then the target.
    pub fn resolve(
        self,
        game: &TeachingGame,
        policy: impl FnOnce() -> Result<TeacherStrategy>,
    ) -> Result<TeacherStrategy> {
        Ok(match self {
            TeacherFlag::Fixed(a) => TeacherStrategy::Fixed(a),
            TeacherFlag::Tft => TeacherStrategy::Tft,
            TeacherFlag::TwoTft => TeacherStrategy::TwoTft,
            TeacherFlag::Learner => TeacherStrategy::Learner(None),
            TeacherFlag::Optimal => policy()?,
            TeacherFlag::Delayed(k) => TeacherStrategy::DelayedSwitch {
                k,
                before: 1 - game.target(),
                after: game.target(),
            },
        })
    }
}

/// One iteration of a session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub iteration: usize,
    pub student: usize,
    pub teacher: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub steps: Vec<Step>,
}

impl SessionLog {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Fraction of student plays of action 0 (Coop).
    pub fn coop_rate(&self) -> f64 {
        self.coop_rate_prefix(self.len())
    }

    /// Coop rate over the first `n` iterations.
    pub fn coop_rate_prefix(&self, n: usize) -> f64 {
        let n = n.min(self.len());
        if n == 0 {
            return 0.0;
        }
        self.steps[..n].iter().filter(|s| s.student == 0).count() as f64 / n as f64
    }

    /// Coop rate over consecutive windows of `window` iterations; a short
    /// final window is averaged over its own length.
    pub fn windowed_coop(&self, window: usize) -> Vec<f64> {
        assert!(window > 0);
        self.steps
            .chunks(window)
            .map(|c| c.iter().filter(|s| s.student == 0).count() as f64 / c.len() as f64)
            .collect()
    }

    /// Plays of `action` by either side.
    pub fn joint_count(&self, action: usize) -> usize {
        self.steps
            .iter()
            .map(|s| (s.student == action) as usize + (s.teacher == action) as usize)
            .sum()
    }
}

/// A teacher bound to one session.
enum Teacher {
    Fixed(usize),
    Tft,
    TwoTft,
    Learner(Learner),
    Policy { policy: Arc<Policy>, q: [f64; 2], alpha: f64 },
    Bank { bank: Arc<PolicyBank>, q: [f64; 2], alpha: f64 },
    Delayed { k: usize, before: usize, after: usize },
}

fn tracked_student(student: &LearnerConfig) -> Result<([f64; 2], f64)> {
    match student.kind {
        LearnerKind::Blind => Ok((student.initial_q.unwrap_or([0.0; 2]), student.alpha)),
        LearnerKind::Q { .. } => Err(Error::UntrackedState(
            "the teacher's MDP models only blind Q-learners".into(),
        )),
    }
}

impl Teacher {
    fn bind(strategy: &TeacherStrategy, student: &LearnerConfig, rng: &mut SimRng) -> Result<Self> {
        Ok(match strategy {
            TeacherStrategy::Fixed(a) => {
                check_action(*a)?;
                Teacher::Fixed(*a)
            }
            TeacherStrategy::Tft => Teacher::Tft,
            TeacherStrategy::TwoTft => Teacher::TwoTft,
            TeacherStrategy::Learner(cfg) => Teacher::Learner(cfg.unwrap_or(*student).build(rng)?),
            TeacherStrategy::Policy(policy) => {
                let (q, alpha) = tracked_student(student)?;
                Teacher::Policy {
                    policy: Arc::clone(policy),
                    q,
                    alpha,
                }
            }
            TeacherStrategy::PolicyBank(bank) => {
                let (q, alpha) = tracked_student(student)?;
                Teacher::Bank {
                    bank: Arc::clone(bank),
                    q,
                    alpha,
                }
            }
            TeacherStrategy::DelayedSwitch { k, before, after } => {
                check_action(*before)?;
                check_action(*after)?;
                Teacher::Delayed {
                    k: *k,
                    before: *before,
                    after: *after,
                }
            }
        })
    }

    fn act(&self, steps: &[Step], n: usize, temperature: f64, rng: &mut SimRng) -> usize {
        match self {
            Teacher::Fixed(a) => *a,
            Teacher::Tft => steps.last().map_or(0, |s| s.student),
            Teacher::TwoTft => match steps {
                [.., x, y] if x.student == 1 && y.student == 1 => 1,
                _ => 0,
            },
            Teacher::Learner(l) => l.act(temperature, rng),
            Teacher::Policy { policy, q, .. } => policy.action_for(*q),
            Teacher::Bank { bank, q, .. } => bank.select(temperature).action_for(*q),
            Teacher::Delayed { k, before, after } => {
                if n < *k {
                    *before
                } else {
                    *after
                }
            }
        }
    }

    fn observe(&mut self, game: &TeachingGame, student: usize, teacher: usize) {
        match self {
            Teacher::Learner(l) => l.observe(teacher, student, game.teacher_payoff(student, teacher)),
            Teacher::Policy { q, alpha, .. } | Teacher::Bank { q, alpha, .. } => {
                q[student] = bql_step(q[student], *alpha, game.student_payoff(student, teacher));
            }
            _ => {}
        }
    }
}

fn check_action(a: usize) -> Result<()> {
    if a > 1 {
        Err(Error::Config(format!("teacher action {a} out of range")))
    } else {
        Ok(())
    }
}

/// Everything that defines a session apart from its seed.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    pub game: &'a TeachingGame,
    pub student: LearnerConfig,
    pub teacher: &'a TeacherStrategy,
    pub iterations: usize,
    pub schedule: TemperatureSchedule,
}

/// Run one teaching session.
///
/// Each iteration: read the temperature, the student then the teacher pick
/// actions, the student is paid from the game and learns, and the teacher
/// observes the joint action.
pub fn run_session(session: &Session<'_>, seed: u64) -> Result<SessionLog> {
    let (log, _) = run_session_with_student(session, seed)?;
    Ok(log)
}

/// As [`run_session`], also returning the student in its final state.
pub fn run_session_with_student(session: &Session<'_>, seed: u64) -> Result<(SessionLog, Learner)> {
    session.schedule.validate()?;
    session.game.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut student = session.student.build(&mut rng)?;
    let mut teacher = Teacher::bind(session.teacher, &session.student, &mut rng)?;
    let mut steps = Vec::with_capacity(session.iterations);
    for (n, temperature) in session.schedule.iter().take(session.iterations).enumerate() {
        let s = student.act(temperature, &mut rng);
        let t = teacher.act(&steps, n, temperature, &mut rng);
        let reward = session.game.student_payoff(s, t);
        student.observe(s, t, reward);
        teacher.observe(session.game, s, t);
        steps.push(Step {
            iteration: n,
            student: s,
            teacher: t,
            reward,
        });
    }
    Ok((SessionLog { steps }, student))
}

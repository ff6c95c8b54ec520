//! Seeded simulation of an iterated game played by a population of
//! punishing, conforming and malicious agents.
//!
//! Each iteration draws an unordered pair of distinct agents uniformly and
//! gives them the player-1 and player-2 seats by a fair coin. Conformers and
//! untriggered punishers play the social law. Once any deviation has been
//! observed, every punisher plays its punishing strategy in every later
//! encounter; the trigger is global and never resets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{JointAction, MatrixGame, Player};
use crate::punishment::{deterrence_report, punishment_plan, DeterrenceReport, PunishmentPlan};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Punisher,
    Conformer,
    Malicious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MaliciousPolicy {
    /// Best-respond to the law in every encounter.
    #[default]
    Exploit,
    /// Deviate only if deviation pays in expectation, decided once up front.
    Rational,
}

fn default_iterations() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub n: usize,
    pub punishers: usize,
    pub conformers: usize,
    pub malicious: usize,
    pub game: MatrixGame,
    pub law: JointAction,
    #[serde(default)]
    pub malicious_policy: MaliciousPolicy,
    /// Payoff each malicious agent receives when two of them meet.
    #[serde(default)]
    pub mal_vs_mal_payoff: f64,
    #[serde(default = "default_iterations")]
    pub iterations: u64,
    #[serde(default)]
    pub seed: u64,
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("need at least two agents, got {}", self.n)));
        }
        if self.punishers + self.conformers + self.malicious != self.n {
            return Err(Error::Config(format!(
                "punishers + conformers + malicious = {} but n = {}",
                self.punishers + self.conformers + self.malicious,
                self.n
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !self.game.contains(self.law) {
            return Err(Error::Config(format!("law {} is outside the game", self.law)));
        }
        if !self.mal_vs_mal_payoff.is_finite() {
            return Err(Error::Config("mal_vs_mal_payoff must be finite".into()));
        }
        Ok(())
    }

    /// Agents are numbered punishers first, then conformers, then malicious.
    pub fn kind_of(&self, agent: usize) -> AgentKind {
        if agent < self.punishers {
            AgentKind::Punisher
        } else if agent < self.punishers + self.conformers {
            AgentKind::Conformer
        } else {
            AgentKind::Malicious
        }
    }

    fn report(&self) -> Result<DeterrenceReport> {
        deterrence_report(&self.game, self.law, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Deviates,
    Conforms,
}

/// What a rational malicious agent decides before playing: deviate only if
/// its expected per-encounter payoff beats the law payoff `(e + e') / 2`.
pub fn rational_deviation_check(config: &PopulationConfig) -> Result<Verdict> {
    config.validate()?;
    let r = config.report()?;
    Ok(verdict_from(&r, config.punishers))
}

fn verdict_from(r: &DeterrenceReport, punishers: usize) -> Verdict {
    if !r.has_incentive() || r.deters(punishers) {
        Verdict::Conforms
    } else {
        Verdict::Deviates
    }
}

/// Running mean and spread of one role's per-encounter payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RoleStats {
    pub encounters: u64,
    pub mean: f64,
    /// Sample standard deviation of the per-encounter payoff.
    pub sd: f64,
    #[serde(skip)]
    m2: f64,
}

impl RoleStats {
    fn push(&mut self, x: f64) {
        self.encounters += 1;
        let d = x - self.mean;
        self.mean += d / self.encounters as f64;
        self.m2 += d * (x - self.mean);
        self.sd = if self.encounters > 1 {
            (self.m2 / (self.encounters - 1) as f64).sqrt()
        } else {
            0.0
        };
    }

    pub fn standard_error(&self) -> f64 {
        if self.encounters == 0 {
            f64::NAN
        } else {
            self.sd / (self.encounters as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopStats {
    pub punisher: RoleStats,
    pub conformer: RoleStats,
    pub malicious: RoleStats,
    /// Encounters each agent took part in, indexed by agent.
    pub participations: Vec<u64>,
    /// Plays that differed from the law action for the seat.
    pub deviations: u64,
    /// Punisher plays made with the punishing strategy.
    pub punishments: u64,
    /// Iteration of the first observed deviation.
    pub first_deviation: Option<u64>,
    pub verdict: Verdict,
}

impl PopStats {
    pub fn role(&self, kind: AgentKind) -> &RoleStats {
        match kind {
            AgentKind::Punisher => &self.punisher,
            AgentKind::Conformer => &self.conformer,
            AgentKind::Malicious => &self.malicious,
        }
    }

    fn role_mut(&mut self, kind: AgentKind) -> &mut RoleStats {
        match kind {
            AgentKind::Punisher => &mut self.punisher,
            AgentKind::Conformer => &mut self.conformer,
            AgentKind::Malicious => &mut self.malicious,
        }
    }
}

/// One encounter, as written to the optional CSV trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: u64,
    pub agent1: usize,
    pub agent2: usize,
    /// One-based action of the player-1 seat.
    pub action1: usize,
    pub action2: usize,
    pub pay1: f64,
    pub pay2: f64,
}

struct Population<'a> {
    config: &'a PopulationConfig,
    plan: PunishmentPlan,
    // best responses to the law in each seat
    exploit: (usize, usize),
    malicious_deviate: bool,
    triggered: bool,
}

impl Population<'_> {
    fn choose(&self, agent: usize, seat: Player, rng: &mut SimRng) -> usize {
        let law = self.config.law.action_of(seat);
        match self.config.kind_of(agent) {
            AgentKind::Conformer => law,
            AgentKind::Punisher if !self.triggered => law,
            AgentKind::Punisher => {
                let s = match seat {
                    Player::One => &self.plan.punish_as_p1,
                    Player::Two => &self.plan.punish_as_p2,
                };
                s.as_pure().unwrap_or_else(|| s.sample_with(rng.gen::<f64>()))
            }
            AgentKind::Malicious if self.malicious_deviate => match seat {
                Player::One => self.exploit.0,
                Player::Two => self.exploit.1,
            },
            AgentKind::Malicious => law,
        }
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best.0
}

pub fn run_population(config: &PopulationConfig) -> Result<PopStats> {
    run_population_traced(config, |_| {})
}

/// As [`run_population`], calling `trace` once per encounter.
pub fn run_population_traced(
    config: &PopulationConfig,
    mut trace: impl FnMut(&TraceRow),
) -> Result<PopStats> {
    config.validate()?;
    let g = &config.game;
    let law = config.law;
    let report = config.report()?;
    let verdict = verdict_from(&report, config.punishers);
    let malicious_deviate = match config.malicious_policy {
        MaliciousPolicy::Exploit => true,
        MaliciousPolicy::Rational => verdict == Verdict::Deviates,
    };
    let mut pop = Population {
        config,
        plan: punishment_plan(g),
        exploit: (
            argmax((0..g.rows()).map(|i| g.cell(i, law.col).0)),
            argmax((0..g.cols()).map(|j| g.cell(law.row, j).1)),
        ),
        malicious_deviate,
        triggered: false,
    };
    let mut stats = PopStats {
        punisher: RoleStats::default(),
        conformer: RoleStats::default(),
        malicious: RoleStats::default(),
        participations: vec![0; config.n],
        deviations: 0,
        punishments: 0,
        first_deviation: None,
        verdict,
    };
    let mut rng = rng_from_seed(config.seed);
    let n = config.n;

    for iter in 0..config.iterations {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (p1, p2) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
        let act1 = pop.choose(p1, Player::One, &mut rng);
        let act2 = pop.choose(p2, Player::Two, &mut rng);
        let (k1, k2) = (config.kind_of(p1), config.kind_of(p2));
        let (pay1, pay2) = if k1 == AgentKind::Malicious && k2 == AgentKind::Malicious {
            (config.mal_vs_mal_payoff, config.mal_vs_mal_payoff)
        } else {
            g.cell(act1, act2)
        };

        if pop.triggered {
            stats.punishments += u64::from(k1 == AgentKind::Punisher) + u64::from(k2 == AgentKind::Punisher);
        }
        let deviated = u64::from(act1 != law.row) + u64::from(act2 != law.col);
        if deviated > 0 {
            stats.deviations += deviated;
            stats.first_deviation.get_or_insert(iter);
            pop.triggered = true;
        }
        stats.participations[p1] += 1;
        stats.participations[p2] += 1;
        stats.role_mut(k1).push(pay1);
        stats.role_mut(k2).push(pay2);
        trace(&TraceRow {
            iter,
            agent1: p1,
            agent2: p2,
            action1: act1 + 1,
            action2: act2 + 1,
            pay1,
            pay2,
        });
    }
    Ok(stats)
}

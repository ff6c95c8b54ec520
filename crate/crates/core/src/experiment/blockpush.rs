use serde::{Deserialize, Serialize};

use super::{mean_sd, run_trials, ResultRow};
use crate::error::{Error, Result};
use crate::learner::{LearnerConfig, TemperatureSchedule};
use crate::rng::trial_seed;
use crate::teaching::{run_session, Session, SessionLog, TeacherStrategy, TeachingGame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPushConfig {
    /// Distance a gentle push moves the block.
    pub h: f64,
    /// A hard push moves it `c_factor` times as far.
    pub c_factor: f64,
    pub iterations: usize,
    pub alpha: f64,
    pub schedule: TemperatureSchedule,
    pub trials: usize,
    pub seed: u64,
}

impl Default for BlockPushConfig {
    fn default() -> Self {
        BlockPushConfig {
            h: 1.0,
            c_factor: 2.0,
            iterations: 10_000,
            alpha: 0.001,
            schedule: TemperatureSchedule::standard_decay(),
            trials: 50,
            seed: super::DEFAULT_SEED,
        }
    }
}

impl BlockPushConfig {
    pub fn validate(&self, ks: &[usize]) -> Result<()> {
        if !(self.h > 0.0 && self.c_factor > 0.0) {
            return Err(Error::Config("h and c_factor must be positive".into()));
        }
        if self.trials == 0 || self.iterations == 0 {
            return Err(Error::Config("trials and iterations must be positive".into()));
        }
        if let Some(k) = ks.iter().find(|&&k| k > self.iterations) {
            return Err(Error::Config(format!("K = {k} exceeds {} iterations", self.iterations)));
        }
        self.schedule.validate()
    }
}

/// Mean outcome of one teacher over the trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPushPoint {
    pub k: Option<usize>,
    pub hard_mean: f64,
    pub hard_sd: f64,
    pub distance_mean: f64,
    pub distance_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPushResult {
    pub curve: Vec<BlockPushPoint>,
    /// Two identical blind learners.
    pub baseline: BlockPushPoint,
    pub config: BlockPushConfig,
}

/// Block distance covered in a session: a step with `x` hard pushes moves
/// it `c x h + (2 - x) h`.
pub fn block_distance(log: &SessionLog, target: usize, h: f64, c_factor: f64) -> f64 {
    log.steps
        .iter()
        .map(|s| {
            let x = ((s.student == target) as u8 + (s.teacher == target) as u8) as f64;
            c_factor * x * h + (2.0 - x) * h
        })
        .sum()
}

fn run_point(game: &TeachingGame, config: &BlockPushConfig, teacher: &TeacherStrategy, k: Option<usize>) -> Result<BlockPushPoint> {
    let session = Session {
        game,
        student: LearnerConfig::blind(config.alpha),
        teacher,
        iterations: config.iterations,
        schedule: config.schedule,
    };
    let x = k.map_or(-1.0, |k| k as f64);
    let target = game.target();
    let outcomes = run_trials(config.trials, |trial| {
        let log = run_session(&session, trial_seed(config.seed, x, trial))?;
        Ok((
            log.joint_count(target) as f64,
            block_distance(&log, target, config.h, config.c_factor),
        ))
    })?;
    let hard: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let dist: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let (hard_mean, hard_sd) = mean_sd(&hard);
    let (distance_mean, distance_sd) = mean_sd(&dist);
    Ok(BlockPushPoint {
        k,
        hard_mean,
        hard_sd,
        distance_mean,
        distance_sd,
    })
}

/// Hard pushes by both agents for a teacher that pushes gently for K steps
/// and hard afterwards, for each K, plus the two-learner baseline.
pub fn blockpush(game: &TeachingGame, config: &BlockPushConfig, ks: &[usize]) -> Result<BlockPushResult> {
    config.validate(ks)?;
    let target = game.target();
    let curve = ks
        .iter()
        .map(|&k| {
            let teacher = TeacherStrategy::DelayedSwitch {
                k,
                before: 1 - target,
                after: target,
            };
            run_point(game, config, &teacher, Some(k))
        })
        .collect::<Result<Vec<_>>>()?;
    let baseline = run_point(game, config, &TeacherStrategy::Learner(None), None)?;
    Ok(BlockPushResult {
        curve,
        baseline,
        config: config.clone(),
    })
}

impl BlockPushResult {
    /// Hard-push counts per K, the baseline (x = 0), and distances per K.
    pub fn rows(&self, id: &str) -> Vec<ResultRow> {
        let c = &self.config;
        let row = |experiment: String, x: f64, mean: f64, sd: f64| ResultRow {
            experiment,
            x,
            iterations: c.iterations,
            mean,
            sd,
            trials: c.trials,
            seed: c.seed,
        };
        let mut rows: Vec<ResultRow> = self
            .curve
            .iter()
            .map(|p| row(id.to_owned(), p.k.unwrap_or(0) as f64, p.hard_mean, p.hard_sd))
            .collect();
        rows.push(row(format!("{id}/baseline"), 0.0, self.baseline.hard_mean, self.baseline.hard_sd));
        rows.extend(self.curve.iter().map(|p| {
            row(format!("{id}/distance"), p.k.unwrap_or(0) as f64, p.distance_mean, p.distance_sd)
        }));
        rows
    }

    /// The point with the most hard pushes; the first on ties.
    pub fn best(&self) -> &BlockPushPoint {
        self.curve
            .iter()
            .reduce(|a, b| if b.hard_mean > a.hard_mean { b } else { a })
            .expect("at least one K")
    }
}

use serde::{Deserialize, Serialize};

use super::{mean_sd, run_trials, ResultRow};
use crate::error::{Error, Result};
use crate::learner::{LearnerConfig, LearnerKind, TemperatureSchedule};
use crate::rng::trial_seed;
use crate::teaching::{dif, run_session, Session, TeacherStrategy, TeachingGame};

/// The parts shared by every point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSetup<'a> {
    pub game: &'a TeachingGame,
    pub student: LearnerConfig,
    pub teacher: &'a TeacherStrategy,
    pub trials: usize,
    pub seed: u64,
}

/// Coop rate at fixed `temperature`, one row per entry of `iterations`.
///
/// Each trial runs one session of the longest length; shorter counts are
/// read from its prefix.
pub fn temperature_sweep(
    setup: &SweepSetup<'_>,
    label: &str,
    temperature: f64,
    iterations: &[usize],
) -> Result<Vec<ResultRow>> {
    let longest = *iterations.iter().max().ok_or_else(|| Error::Config("no iteration counts".into()))?;
    let session = Session {
        game: setup.game,
        student: setup.student,
        teacher: setup.teacher,
        iterations: longest,
        schedule: TemperatureSchedule::fixed(temperature),
    };
    let rates = run_trials(setup.trials, |trial| {
        let log = run_session(&session, trial_seed(setup.seed, temperature, trial))?;
        Ok(iterations.iter().map(|&n| log.coop_rate_prefix(n)).collect::<Vec<_>>())
    })?;
    Ok(iterations
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let xs: Vec<f64> = rates.iter().map(|r| r[k]).collect();
            let (mean, sd) = mean_sd(&xs);
            ResultRow {
                experiment: label.to_owned(),
                x: temperature,
                iterations: n,
                mean,
                sd,
                trials: setup.trials,
                seed: setup.seed,
            }
        })
        .collect())
}

/// Coop rate per window of `window` iterations; x is the window's last
/// iteration (one-based).
pub fn time_series(
    setup: &SweepSetup<'_>,
    label: &str,
    schedule: TemperatureSchedule,
    iterations: usize,
    window: usize,
) -> Result<Vec<ResultRow>> {
    if window == 0 {
        return Err(Error::Config("window must be positive".into()));
    }
    let session = Session {
        game: setup.game,
        student: setup.student,
        teacher: setup.teacher,
        iterations,
        schedule,
    };
    let series = run_trials(setup.trials, |trial| {
        Ok(run_session(&session, trial_seed(setup.seed, 0.0, trial))?.windowed_coop(window))
    })?;
    let buckets = series.first().map_or(0, Vec::len);
    Ok((0..buckets)
        .map(|k| {
            let xs: Vec<f64> = series.iter().map(|s| s[k]).collect();
            let (mean, sd) = mean_sd(&xs);
            ResultRow {
                experiment: label.to_owned(),
                x: ((k + 1) * window).min(iterations) as f64,
                iterations,
                mean,
                sd,
                trials: setup.trials,
                seed: setup.seed,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifPoint {
    pub entries: [f64; 4],
    pub gamma: f64,
    pub dif: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Coop rate of a Q-learner for every (matrix, discount) pair.
///
/// `student` fixes memory and learning rate; its discount is replaced by
/// each entry of `gammas`.
#[allow(clippy::too_many_arguments)]
pub fn dif_sweep(
    matrices: &[TeachingGame],
    gammas: &[f64],
    student: LearnerConfig,
    teacher: &TeacherStrategy,
    schedule: TemperatureSchedule,
    iterations: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<DifPoint>> {
    let LearnerKind::Q { memory, .. } = student.kind else {
        return Err(Error::Config("the DIF sweep needs a Q-learner student".into()));
    };
    let mut out = Vec::with_capacity(matrices.len() * gammas.len());
    for (m, game) in matrices.iter().enumerate() {
        for &gamma in gammas {
            let session = Session {
                game,
                student: LearnerConfig {
                    kind: LearnerKind::Q { memory, gamma },
                    ..student
                },
                teacher,
                iterations,
                schedule,
            };
            let d = dif(game, gamma);
            // the matrix index keeps seeds distinct for equal DIF values
            let x = m as f64 * 1e3 + gamma;
            let rates = run_trials(trials, |trial| {
                Ok(run_session(&session, trial_seed(seed, x, trial))?.coop_rate())
            })?;
            let (mean, sd) = mean_sd(&rates);
            out.push(DifPoint {
                entries: game.entries(),
                gamma,
                dif: d,
                mean,
                sd,
            });
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate of `sum_{k < horizon} gamma0^k u(a_k)` for any
/// teacher, including history-dependent ones. Returns mean and sample sd.
#[allow(clippy::too_many_arguments)]
pub fn mc_value(
    teacher: &TeacherStrategy,
    student: LearnerConfig,
    game: &TeachingGame,
    schedule: TemperatureSchedule,
    gamma0: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&gamma0) {
        return Err(Error::Domain(format!("gamma0 must be in [0, 1), got {gamma0}")));
    }
    let session = Session {
        game,
        student,
        teacher,
        iterations: horizon,
        schedule,
    };
    let values = run_trials(trials, |trial| {
        let log = run_session(&session, trial_seed(seed, gamma0, trial))?;
        let mut discount = 1.0;
        let mut total = 0.0;
        for step in &log.steps {
            total += discount * game.u(step.student);
            discount *= gamma0;
        }
        Ok(total)
    })?;
    Ok(mean_sd(&values))
}

/// Horizon after which the discounted tail `gamma0^H / (1 - gamma0)` drops
/// below `bias`.
pub fn horizon_for_bias(gamma0: f64, bias: f64) -> usize {
    assert!((0.0..1.0).contains(&gamma0) && bias > 0.0);
    if gamma0 == 0.0 {
        return 1;
    }
    ((bias * (1.0 - gamma0)).ln() / gamma0.ln()).ceil().max(1.0) as usize
}

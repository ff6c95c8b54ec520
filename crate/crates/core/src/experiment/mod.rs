//! Seeded batch experiments over teaching sessions, written as CSV.
//!
//! Every experiment is a pure function of its [`ExperimentSpec`] and base
//! seed. Trials run in parallel, but results are gathered in trial order, so
//! the worker count never changes the output.

mod blockpush;
mod sweeps;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Once};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::learner::{LearnerConfig, TemperatureSchedule, DEFAULT_ALPHA, DEFAULT_GAMMA};
use crate::teaching::{TeacherFlag, TeacherStrategy, TeachingGame};
use crate::tmdp::{bank_temperatures, Policy, PolicyBank, QGrid, BANK_SIZE, DEFAULT_CELLS, DEFAULT_GAMMA0, DEFAULT_TOL};

pub use blockpush::{blockpush, block_distance, BlockPushConfig, BlockPushResult};
pub use sweeps::{dif_sweep, horizon_for_bias, mc_value, temperature_sweep, time_series, DifPoint, SweepSetup};

pub const CSV_HEADER: [&str; 7] = ["experiment", "x", "iterations", "mean", "sd", "trials", "seed"];

/// One aggregated point of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub x: f64,
    pub iterations: usize,
    pub mean: f64,
    pub sd: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn write_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl std::io::Read) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and sample standard deviation; the deviation of one sample is 0.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

static THREADS: Once = Once::new();

/// Size the global worker pool from `PCMAS_THREADS`, once per process.
/// Without the variable rayon's default (one worker per core) applies.
pub fn configure_threads() {
    THREADS.call_once(|| {
        if let Some(n) = std::env::var("PCMAS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            // fails only if a pool was already built; keep that one
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    });
}

/// Run `trials` independent jobs in parallel, results in trial order.
pub fn run_trials<T: Send>(trials: usize, job: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    configure_threads();
    (0..trials as u64).into_par_iter().map(job).collect()
}

/// Named experiment presets, one per reproduced figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ExperimentId {
    Fig2Opt,
    Fig2TwoQl,
    Fig3Tft,
    Fig3TwoTft,
    Fig4Decay,
    Fig5Ql,
    Fig6QlDecay,
    Fig7Dif,
    Fig8Blockpush,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::Fig2Opt,
        ExperimentId::Fig2TwoQl,
        ExperimentId::Fig3Tft,
        ExperimentId::Fig3TwoTft,
        ExperimentId::Fig4Decay,
        ExperimentId::Fig5Ql,
        ExperimentId::Fig6QlDecay,
        ExperimentId::Fig7Dif,
        ExperimentId::Fig8Blockpush,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig2Opt => "fig2-opt",
            ExperimentId::Fig2TwoQl => "fig2-twoql",
            ExperimentId::Fig3Tft => "fig3-tft",
            ExperimentId::Fig3TwoTft => "fig3-2tft",
            ExperimentId::Fig4Decay => "fig4-decay",
            ExperimentId::Fig5Ql => "fig5-ql",
            ExperimentId::Fig6QlDecay => "fig6-ql-decay",
            ExperimentId::Fig7Dif => "fig7-dif",
            ExperimentId::Fig8Blockpush => "fig8-blockpush",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

impl TryFrom<String> for ExperimentId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ExperimentId> for String {
    fn from(id: ExperimentId) -> Self {
        id.as_str().to_owned()
    }
}

/// What the x axis of an experiment sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Axis {
    /// Fixed temperatures; one row per temperature and iteration count.
    Temperature { values: Vec<f64> },
    /// Coop rate per window of iterations under the spec's schedule.
    Time { window: usize },
    /// One row per (matrix, student discount); x is the DIF.
    Dif {
        gammas: Vec<f64>,
        #[serde(default)]
        matrices: Option<Vec<TeachingGame>>,
    },
    /// Delayed-switch thresholds for block pushing.
    SwitchK {
        values: Vec<usize>,
        #[serde(default = "default_h")]
        h: f64,
        #[serde(default = "default_c")]
        c_factor: f64,
    },
}

fn default_h() -> f64 {
    1.0
}

fn default_c() -> f64 {
    2.0
}

/// Where optimal-teacher policies come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySource {
    pub dir: PathBuf,
    /// Solve in memory when a file is missing, instead of failing.
    #[serde(default)]
    pub solve_missing: bool,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

fn default_gamma0() -> f64 {
    DEFAULT_GAMMA0
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for PolicySource {
    fn default() -> Self {
        PolicySource {
            dir: PathBuf::from("policies"),
            solve_missing: false,
            cells: DEFAULT_CELLS,
            gamma0: DEFAULT_GAMMA0,
            tol: DEFAULT_TOL,
        }
    }
}

/// File name of the policy solved at `temperature`.
pub fn policy_file_name(temperature: f64) -> String {
    format!("policy_T{temperature}.bin")
}

impl PolicySource {
    pub fn path_for(&self, temperature: f64) -> PathBuf {
        self.dir.join(policy_file_name(temperature))
    }

    pub fn load(&self, game: &TeachingGame, temperature: f64, alpha: f64) -> Result<Policy> {
        let path = self.path_for(temperature);
        if path.exists() {
            let p = Policy::load(&path)?;
            if p.temperature != temperature || p.alpha != alpha {
                return Err(Error::PolicyFormat(format!(
                    "{} was solved for T = {}, alpha = {}; need T = {temperature}, alpha = {alpha}",
                    path.display(),
                    p.temperature,
                    p.alpha
                )));
            }
            return Ok(p);
        }
        if self.solve_missing {
            let grid = QGrid::for_game(game, self.cells)?;
            return Policy::solve(game, grid, temperature, alpha, self.gamma0, self.tol);
        }
        Err(Error::MissingPolicy { path, temperature })
    }

    /// Policies at the bank temperatures, for decaying schedules.
    pub fn load_bank(&self, game: &TeachingGame, alpha: f64) -> Result<PolicyBank> {
        let policies = bank_temperatures(75.0, 0.5, BANK_SIZE)
            .into_iter()
            .map(|t| self.load(game, t, alpha))
            .collect::<Result<Vec<_>>>()?;
        PolicyBank::new(policies)
    }

    /// Write every policy this source would load for `temperatures`.
    pub fn solve_all(&self, game: &TeachingGame, temperatures: &[f64], alpha: f64) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir)?;
        let grid = QGrid::for_game(game, self.cells)?;
        temperatures
            .iter()
            .map(|&t| {
                let path = self.path_for(t);
                Policy::solve(game, grid, t, alpha, self.gamma0, self.tol)?.save(&path)?;
                Ok(path)
            })
            .collect()
    }
}

/// A complete, serializable description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub game: TeachingGame,
    pub student: LearnerConfig,
    pub teachers: Vec<TeacherFlag>,
    pub axis: Axis,
    /// Schedule for time, DIF and block-pushing axes; temperature axes
    /// override it per point.
    pub schedule: TemperatureSchedule,
    pub iterations: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub policies: PolicySource,
}

pub const DEFAULT_SEED: u64 = 1996;

/// 0.25, 0.5, ..., 5.0.
pub fn default_temperatures() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.25).collect()
}

impl ExperimentSpec {
    pub fn preset(id: ExperimentId) -> Result<Self> {
        let pd = fixtures::teaching_pd();
        let bql = LearnerConfig::blind(DEFAULT_ALPHA);
        let ql = LearnerConfig::q(1, DEFAULT_ALPHA, DEFAULT_GAMMA);
        let temps = Axis::Temperature {
            values: default_temperatures(),
        };
        let decay = TemperatureSchedule::standard_decay();
        let sweep_iters = vec![1000, 5000, 10_000];
        let spec = |student, teachers: Vec<TeacherFlag>, axis, iterations: Vec<usize>| ExperimentSpec {
            id,
            game: pd.clone(),
            student,
            teachers,
            axis,
            schedule: decay,
            iterations,
            trials: 100,
            seed: DEFAULT_SEED,
            policies: PolicySource::default(),
        };
        Ok(match id {
            ExperimentId::Fig2Opt => spec(bql, vec![TeacherFlag::Optimal], temps, sweep_iters),
            ExperimentId::Fig2TwoQl => spec(bql, vec![TeacherFlag::Learner], temps, sweep_iters),
            ExperimentId::Fig3Tft => spec(bql, vec![TeacherFlag::Tft], temps, sweep_iters),
            ExperimentId::Fig3TwoTft => spec(bql, vec![TeacherFlag::TwoTft], temps, sweep_iters),
            ExperimentId::Fig4Decay => spec(
                bql,
                vec![TeacherFlag::Optimal, TeacherFlag::Learner, TeacherFlag::Tft, TeacherFlag::TwoTft],
                Axis::Time { window: 250 },
                vec![10_000],
            ),
            ExperimentId::Fig5Ql => spec(ql, vec![TeacherFlag::Tft, TeacherFlag::Learner], temps, sweep_iters),
            ExperimentId::Fig6QlDecay => spec(
                ql,
                vec![TeacherFlag::Tft, TeacherFlag::Learner],
                Axis::Time { window: 250 },
                vec![10_000],
            ),
            ExperimentId::Fig7Dif => spec(
                ql,
                vec![TeacherFlag::Tft],
                Axis::Dif {
                    gammas: fixtures::DIF_GAMMAS.to_vec(),
                    matrices: None,
                },
                vec![10_000],
            ),
            ExperimentId::Fig8Blockpush => ExperimentSpec {
                game: fixtures::block_pushing(),
                trials: 50,
                ..spec(
                    LearnerConfig::blind(0.001),
                    vec![TeacherFlag::Delayed(0)],
                    Axis::SwitchK {
                        values: (0..=40).map(|k| k * 250).collect(),
                        h: 1.0,
                        c_factor: 2.0,
                    },
                    vec![10_000],
                )
            },
            ExperimentId::Custom => {
                return Err(Error::Config("custom experiments are read from a spec file".into()))
            }
        })
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.iterations.is_empty() || self.iterations.contains(&0) {
            return Err(Error::Config("iterations must be non-empty and positive".into()));
        }
        if self.teachers.is_empty() {
            return Err(Error::Config("at least one teacher is required".into()));
        }
        self.schedule.validate()?;
        self.game.validate()?;
        Ok(())
    }

    fn label(&self, teacher: TeacherFlag) -> String {
        if self.teachers.len() == 1 {
            self.id.to_string()
        } else {
            format!("{}/{}", self.id, teacher)
        }
    }

    /// Strategy for `flag` at a fixed temperature, or under a schedule when
    /// `temperature` is `None`.
    fn strategy(&self, flag: TeacherFlag, temperature: Option<f64>) -> Result<TeacherStrategy> {
        flag.resolve(&self.game, || match temperature {
            Some(t) => Ok(TeacherStrategy::Policy(Arc::new(self.policies.load(
                &self.game,
                t,
                self.student.alpha,
            )?))),
            None => match self.schedule {
                TemperatureSchedule::Fixed { temperature } => Ok(TeacherStrategy::Policy(Arc::new(
                    self.policies.load(&self.game, temperature, self.student.alpha)?,
                ))),
                TemperatureSchedule::Decay { .. } => Ok(TeacherStrategy::PolicyBank(Arc::new(
                    self.policies.load_bank(&self.game, self.student.alpha)?,
                ))),
            },
        })
    }
}

/// Run an experiment and return its rows in a fixed order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    match &spec.axis {
        Axis::Temperature { values } => {
            for &flag in &spec.teachers {
                let label = spec.label(flag);
                for &t in values {
                    let strategy = spec.strategy(flag, Some(t))?;
                    let setup = SweepSetup {
                        game: &spec.game,
                        student: spec.student,
                        teacher: &strategy,
                        trials: spec.trials,
                        seed: spec.seed,
                    };
                    rows.extend(temperature_sweep(&setup, &label, t, &spec.iterations)?);
                }
            }
        }
        Axis::Time { window } => {
            let iterations = *spec.iterations.iter().max().expect("validated");
            for &flag in &spec.teachers {
                let strategy = spec.strategy(flag, None)?;
                let setup = SweepSetup {
                    game: &spec.game,
                    student: spec.student,
                    teacher: &strategy,
                    trials: spec.trials,
                    seed: spec.seed,
                };
                rows.extend(time_series(&setup, &spec.label(flag), spec.schedule, iterations, *window)?);
            }
        }
        Axis::Dif { gammas, matrices } => {
            let matrices = matrices.clone().unwrap_or_else(|| {
                let mut m = fixtures::dif_matrices();
                m.push(fixtures::flat_game(0.0));
                m
            });
            let iterations = *spec.iterations.iter().max().expect("validated");
            for &flag in &spec.teachers {
                let strategy = spec.strategy(flag, None)?;
                let points = dif_sweep(
                    &matrices,
                    gammas,
                    spec.student,
                    &strategy,
                    spec.schedule,
                    iterations,
                    spec.trials,
                    spec.seed,
                )?;
                let label = spec.label(flag);
                rows.extend(points.into_iter().map(|p| ResultRow {
                    experiment: label.clone(),
                    x: p.dif,
                    iterations,
                    mean: p.mean,
                    sd: p.sd,
                    trials: spec.trials,
                    seed: spec.seed,
                }));
            }
        }
        Axis::SwitchK { values, h, c_factor } => {
            let config = BlockPushConfig {
                h: *h,
                c_factor: *c_factor,
                iterations: *spec.iterations.iter().max().expect("validated"),
                alpha: spec.student.alpha,
                schedule: spec.schedule,
                trials: spec.trials,
                seed: spec.seed,
            };
            let result = blockpush(&spec.game, &config, values)?;
            rows.extend(result.rows(spec.id.as_str()));
        }
    }
    Ok(rows)
}

//! Punishment design and embedded teaching for partially controlled
//! multi-agent systems.
//!
//! Two ways of steering agents we do not control:
//!
//! - [`punishment`]: size and equip a population of punishers so that
//!   deviating from a social law never pays ([`population`] simulates it).
//! - [`teaching`] and [`tmdp`]: a teacher that shapes the behavior of a
//!   reinforcement learner ([`learner`]) it repeatedly plays against,
//!   including the optimal policy of the teacher's MDP.
//!
//! [`experiment`] runs the seeded batch experiments and writes CSV. The
//! crate's `examples/` directory has one runnable program per capability.

pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod game;
pub mod learner;
pub mod population;
pub mod punishment;
pub mod rng;
pub mod teaching;
pub mod tmdp;
pub mod zero_sum;

pub use error::{Error, Result};
pub use game::{JointAction, MatrixGame, Player, ZeroSumGame};
pub use learner::{Learner, LearnerConfig, TemperatureSchedule};
pub use punishment::{deterrence_report, punishment_plan, DeterrenceReport, PunishmentPlan};
pub use teaching::{TeacherStrategy, TeachingGame};
pub use zero_sum::{solve_zero_sum, MixedStrategy, ZeroSumSolution};

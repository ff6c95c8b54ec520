//! Solve the teacher's MDP for a blind Q-learner and teach with the result.

use std::sync::Arc;

use pcmas::fixtures;
use pcmas::learner::{LearnerConfig, TemperatureSchedule};
use pcmas::teaching::{run_session, Session, TeacherStrategy};
use pcmas::tmdp::{Policy, QGrid};

fn main() -> pcmas::Result<()> {
    let game = fixtures::teaching_pd();
    let grid = QGrid::for_game(&game, 100)?;
    let policy = Arc::new(Policy::solve(&game, grid, 1.0, 0.1, 0.99, 1e-6)?);
    println!("discounted coop value from q = (0, 0): {:.2}", policy.value_at([0.0, 0.0]));
    for q in [[-5.0, 5.0], [0.0, 0.0], [5.0, -5.0]] {
        println!("student q {q:?}: teacher plays {}", policy.action_for(q));
    }

    let teacher = TeacherStrategy::Policy(policy);
    let session = Session {
        game: &game,
        student: LearnerConfig::blind(0.1),
        teacher: &teacher,
        iterations: 10_000,
        schedule: TemperatureSchedule::fixed(1.0),
    };
    println!("coop rate over 10000 plays: {:.3}", run_session(&session, 3)?.coop_rate());
    Ok(())
}

//! One teacher and one student playing the teaching prisoner's dilemma.

use pcmas::fixtures;
use pcmas::learner::{LearnerConfig, TemperatureSchedule};
use pcmas::teaching::{run_session, Session, TeacherStrategy};

fn main() -> pcmas::Result<()> {
    let game = fixtures::teaching_pd();
    println!("game class: {:?}", game.classify());
    let teachers = [
        ("tft", TeacherStrategy::Tft),
        ("2tft", TeacherStrategy::TwoTft),
        ("learner", TeacherStrategy::Learner(None)),
    ];
    for (name, teacher) in &teachers {
        let session = Session {
            game: &game,
            student: LearnerConfig::q(1, 0.1, 0.9),
            teacher,
            iterations: 10_000,
            schedule: TemperatureSchedule::fixed(3.0),
        };
        let log = run_session(&session, 1)?;
        println!("{name:8} coop rate {:.3}, last window {:.3?}", log.coop_rate(), log.windowed_coop(2500));
    }
    Ok(())
}

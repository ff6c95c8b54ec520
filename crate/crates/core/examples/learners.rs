//! Blind and memory-based Q-learners with Boltzmann exploration.

use pcmas::learner::{boltzmann, LearnerConfig, TemperatureSchedule};
use pcmas::rng::rng_from_seed;

fn main() -> pcmas::Result<()> {
    for t in [0.25, 1.0, 5.0] {
        println!("T = {t}: p = {:?}", boltzmann(&[1.0, 0.0], t)?);
    }

    let decay = TemperatureSchedule::standard_decay();
    let temps: Vec<f64> = decay.iter().take(60).step_by(10).collect();
    println!("decay schedule: {temps:.3?}");

    let mut rng = rng_from_seed(7);
    let mut student = LearnerConfig::q(2, 0.1, 0.9).build(&mut rng)?;
    for _ in 0..1000 {
        let a = student.act(1.0, &mut rng);
        // partner always cooperates
        let reward = if a == 0 { 10.0 } else { 13.0 };
        student.observe(a, 0, reward);
    }
    println!("Q-values in the current state: {:?}", student.current_q());
    Ok(())
}

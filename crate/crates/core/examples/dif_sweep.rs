//! Coop rate under TFT against the DIF predictor over a family of games.

use pcmas::experiment::dif_sweep;
use pcmas::fixtures;
use pcmas::learner::{LearnerConfig, TemperatureSchedule};
use pcmas::teaching::TeacherStrategy;

fn main() -> pcmas::Result<()> {
    let matrices: Vec<_> = fixtures::dif_matrices().into_iter().step_by(8).collect();
    let points = dif_sweep(
        &matrices,
        &fixtures::DIF_GAMMAS,
        LearnerConfig::q(1, 0.1, 0.9),
        &TeacherStrategy::Tft,
        TemperatureSchedule::standard_decay(),
        10_000,
        20,
        1996,
    )?;
    for p in points {
        println!("{:?} gamma {:.1}: DIF {:7.2} coop {:.3}", p.entries, p.gamma, p.dif, p.mean);
    }
    Ok(())
}

//! Random pairwise encounters between punishers, conformers and a malicious agent.

use pcmas::fixtures;
use pcmas::population::{run_population, MaliciousPolicy, PopulationConfig};
use pcmas::JointAction;

fn main() -> pcmas::Result<()> {
    for punishers in [0, 4, 9] {
        let config = PopulationConfig {
            n: 16,
            punishers,
            conformers: 15 - punishers,
            malicious: 1,
            game: fixtures::prisoners_dilemma(),
            law: JointAction::new(0, 0),
            malicious_policy: MaliciousPolicy::Exploit,
            mal_vs_mal_payoff: 0.0,
            iterations: 100_000,
            seed: 42,
        };
        let stats = run_population(&config)?;
        println!(
            "p = {punishers}: malicious earns {:.3} per encounter (se {:.3}), verdict {:?}",
            stats.malicious.mean,
            stats.malicious.standard_error(),
            stats.verdict
        );
    }
    Ok(())
}

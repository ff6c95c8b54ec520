//! Minimax punishment strategies for a prisoner's dilemma.

use pcmas::fixtures;
use pcmas::punishment_plan;

fn main() {
    let game = fixtures::prisoners_dilemma();
    let plan = punishment_plan(&game);
    println!("punisher in seat 1 plays {:?}", plan.punish_as_p1.probs());
    println!("punisher in seat 2 plays {:?}", plan.punish_as_p2.probs());
    println!("v = {}, v' = {}", plan.v, plan.v_prime);
    println!("minimized malicious payoff: {}", plan.minimized_malicious_payoff());
}

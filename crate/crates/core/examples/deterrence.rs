//! How many punishers it takes to make deviation from a social law irrational.

use pcmas::fixtures;
use pcmas::punishment::{best_social_law, deterrence_report, incentive};
use pcmas::JointAction;

fn main() -> pcmas::Result<()> {
    let pd = fixtures::prisoners_dilemma();
    for n in [4, 16, 64] {
        let r = deterrence_report(&pd, JointAction::new(0, 0), n)?;
        println!("n = {n:2}: p_min = {:?}", r.p_min);
    }

    let g = fixtures::three_efficient_dilemma();
    for law in g.efficient_solutions() {
        println!("law {law}: incentive to deviate {}", incentive(&g, law)?.total());
    }
    println!("cheapest law to enforce: {}", best_social_law(&g));
    Ok(())
}

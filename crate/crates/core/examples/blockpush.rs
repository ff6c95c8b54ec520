//! Delayed switching teacher in the block-pushing game.

use pcmas::experiment::{blockpush, BlockPushConfig};
use pcmas::fixtures;

fn main() -> pcmas::Result<()> {
    let config = BlockPushConfig { trials: 10, ..BlockPushConfig::default() };
    let ks: Vec<usize> = (0..=10).map(|k| k * 1000).collect();
    let result = blockpush(&fixtures::block_pushing(), &config, &ks)?;
    println!("two learners: {:.0} hard pushes", result.baseline.hard_mean);
    for p in &result.curve {
        println!("switch at K = {:5}: {:.0} hard pushes, distance {:.0}", p.k.unwrap_or(0), p.hard_mean, p.distance_mean);
    }
    Ok(())
}

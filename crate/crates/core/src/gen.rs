//! Random instance generation for tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::SrInstance;

/// Instance with `num_agents` agents whose lists are independent uniform
/// permutations.
pub fn random_instance<R: Rng + ?Sized>(num_agents: usize, rng: &mut R) -> SrInstance {
    let rows = (0..num_agents)
        .map(|a| {
            let mut row: Vec<usize> = (0..num_agents).filter(|&b| b != a).collect();
            row.shuffle(rng);
            row
        })
        .collect();
    SrInstance::new(rows).expect("shuffled rows are permutations")
}

/// Random instance with an even agent count drawn from `2..=max_agents`.
pub fn random_instance_up_to<R: Rng + ?Sized>(max_agents: usize, rng: &mut R) -> SrInstance {
    let m = 2 * rng.gen_range(1..=max_agents / 2);
    random_instance(m, rng)
}

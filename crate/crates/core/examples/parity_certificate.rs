//! Prints the three parity witnesses for a few random odd fields.

use antipodal::scenarios::random_odd_map;
use antipodal::{find_coincidences, SolverConfig};

fn main() -> antipodal::Result<()> {
    let cfg = SolverConfig::default();
    for seed in 0..8 {
        let set = find_coincidences(&random_odd_map(seed, 5)?, &cfg)?;
        let indices: Vec<_> = set.pairs.iter().map(|p| p.local_index.unwrap_or(0)).collect();
        let c = &set.certificate;
        println!(
            "seed {seed}: {} pairs, indices {indices:?}, index sum mod 2 = {}, regular value = {:?}, consistent = {}",
            set.pair_count(),
            c.index_sum_mod2,
            c.regular_value_parity,
            c.consistent
        );
    }
    Ok(())
}

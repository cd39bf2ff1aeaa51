//! Builds maps with 2k + 1 coincidence pairs and checks them against the
//! analytic points.

use antipodal::scenarios::{equally_spaced, multiplicity_map, multiplicity_representatives};
use antipodal::{find_coincidences, SolverConfig};

fn main() -> antipodal::Result<()> {
    let cfg = SolverConfig::default();
    for k in [0, 1, 2, 3, 6, 10] {
        let cs = equally_spaced(k);
        let set = find_coincidences(&multiplicity_map(&cs), &cfg)?;
        let worst = multiplicity_representatives(&cs)
            .iter()
            .map(|want| {
                set.pairs
                    .iter()
                    .map(|p| p.representative.pair_distance(want))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        println!(
            "k = {k:2}: {:2} pairs, worst distance to analytic point {worst:.1e}",
            set.pair_count()
        );
    }
    Ok(())
}

//! Solves the classic case: a map whose odd part is (x, y) / 2 plus an even
//! part that does not affect the coincidences.

use antipodal::scenarios::lookup;
use antipodal::{find_coincidences, SolverConfig};

fn main() -> antipodal::Result<()> {
    let f = lookup("classic")?.family.current();
    let set = find_coincidences(&f, &SolverConfig::default())?;
    for pair in &set.pairs {
        let [x, y, z] = pair.representative.to_array();
        println!(
            "f(p) = f(-p) at p = ({x:.6}, {y:.6}, {z:.6}), det = {:.3}",
            pair.jacobian_det
        );
    }
    println!("{} pair(s), generic = {}", set.pair_count(), set.genericity_ok);
    Ok(())
}

//! Counts solutions of F(x) = v z for several small v. The pair count
//! changes with v but its parity does not.

use antipodal::index::{field_scale, regular_value_parity};
use antipodal::poly::difference_field;
use antipodal::scenarios::{multiplicity_map, random_odd_map};
use antipodal::zeros::solve_zero_set;
use antipodal::SolverConfig;
use nalgebra::{Vector2, Vector3};

fn main() -> antipodal::Result<()> {
    let cfg = SolverConfig::default();
    for (name, f) in [
        ("quintuple", multiplicity_map(&[0.2, 0.7])),
        ("random", random_odd_map(11, 5)?),
    ] {
        let field = difference_field(&f);
        let bound = 0.1 * field_scale(&field);
        for angle in [0.0f64, 1.0, 2.0, 3.0] {
            let v = Vector2::new(angle.cos(), angle.sin()) * (0.8 * bound);
            let count = solve_zero_set(&field.shifted_linear(v, Vector3::z()), &cfg)?.len();
            let parity = regular_value_parity(&field, v, &cfg)?;
            println!("{name}: v = ({:+.4}, {:+.4}): {count} pairs, parity {parity}", v.x, v.y);
        }
    }
    Ok(())
}

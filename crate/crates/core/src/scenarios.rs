//! Built-in map families.
//!
//! The multiplicity families use `F = (x * prod_i (z^2 - c_i), y)`. The
//! second component forces `y = 0`; on that great circle the first vanishes
//! at the poles and at `z = ±sqrt(c_i)`, so `k` distinct `c_i` in `(0, 1)`
//! give exactly `2k + 1` antipodal pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::{MapFamily, Poly3, PolyMap2, Term, MAX_DEGREE};
use crate::sphere::SpherePoint;

pub const RANDOM_ODD_SEED: u64 = 42;
pub const RANDOM_ODD_DEGREE: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub family: MapFamily,
    pub expected_pairs: Option<usize>,
    pub description: String,
}

impl Scenario {
    fn new(name: &str, family: MapFamily, expected_pairs: Option<usize>, description: &str) -> Self {
        Self {
            name: name.into(),
            family,
            expected_pairs,
            description: description.into(),
        }
    }
}

fn term(coeff: f64, exps: [u32; 3]) -> Term {
    Term { coeff, exps }
}

/// `prod_i (z^2 - c_i)`.
fn z_factor(cs: &[f64]) -> Poly3 {
    cs.iter().fold(Poly3::constant(1.0), |acc, &c| {
        let f = Poly3::from_terms([term(1.0, [0, 0, 2]), term(-c, [0, 0, 0])]).expect("degree 2");
        acc.mul(&f).expect("multiplicity family degree within cap")
    })
}

/// A map whose difference field is `(x * prod (z^2 - c_i), y)`.
pub fn multiplicity_map(cs: &[f64]) -> PolyMap2 {
    let comp1 = Poly3::x().mul(&z_factor(cs)).expect("degree within cap").scale(0.5);
    PolyMap2::new(comp1, Poly3::y().scale(0.5))
}

/// Analytic representatives of the multiplicity family, canonical order.
pub fn multiplicity_representatives(cs: &[f64]) -> Vec<SpherePoint> {
    let mut sorted = cs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut reps = vec![SpherePoint::from_xyz(0.0, 0.0, 1.0).expect("pole")];
    for c in sorted {
        let (x, z) = ((1.0 - c).sqrt(), c.sqrt());
        reps.push(SpherePoint::from_xyz(x, 0.0, z).expect("unit"));
        reps.push(SpherePoint::from_xyz(-x, 0.0, z).expect("unit"));
    }
    reps
}

/// `c_i = i / (k + 1)` for `i = 1..=k`.
pub fn equally_spaced(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

/// `F_eps = (x (z^2 - (eps - shift)), y)`: one pair for `eps < shift`, three
/// for `eps > shift`.
pub fn pitchfork_family(shift: f64, epsilon: f64) -> MapFamily {
    let base = PolyMap2::new(
        Poly3::from_terms([term(0.5 * shift, [1, 0, 0]), term(0.5, [1, 0, 2])]).expect("degree 3"),
        Poly3::y().scale(0.5),
    );
    let direction = PolyMap2::new(Poly3::x().scale(-0.5), Poly3::zero());
    MapFamily::new(base, direction, epsilon)
}

/// `F_eps = (x (z^2 - 0.5)(z^2 - (0.1 - eps)), y)`: five pairs for
/// `eps < 0.1`, three after the inner circle pair collapses onto the
/// equator.
pub fn collapse_family(epsilon: f64) -> MapFamily {
    let outer = z_factor(&[0.5]);
    let base = multiplicity_map(&[0.5, 0.1]);
    let direction = PolyMap2::new(Poly3::x().mul(&outer).expect("degree 3").scale(0.5), Poly3::zero());
    MapFamily::new(base, direction, epsilon)
}

/// Odd part of a random map: every odd-total-degree monomial up to `degree`
/// gets an i.i.d. uniform coefficient in `[-1, 1]` drawn from ChaCha8 seeded
/// with `seed`, first for `comp1`, then for `comp2`, in exponent order.
pub fn random_odd_map(seed: u64, degree: u32) -> Result<PolyMap2> {
    if degree == 0 {
        return Err(Error::InvalidArgument(
            "degree must be at least 1 (no odd monomials of degree 0)".into(),
        ));
    }
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooLarge {
            degree,
            max: MAX_DEGREE,
        });
    }
    let mut exps = Vec::new();
    for i in 0..=degree {
        for j in 0..=degree - i {
            for k in 0..=degree - i - j {
                if (i + j + k) % 2 == 1 {
                    exps.push([i, j, k]);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut component =
        || Poly3::from_terms(exps.iter().map(|&e| term(rng.random_range(-1.0..=1.0), e))).expect("degree checked");
    let comp1 = component();
    let comp2 = component();
    Ok(PolyMap2::new(comp1, comp2))
}

pub fn random_odd_scenario(seed: u64, degree: u32) -> Result<Scenario> {
    Ok(Scenario::new(
        "random-odd",
        MapFamily::constant(random_odd_map(seed, degree)?),
        None,
        "seeded random odd polynomial field",
    ))
}

fn with_even_part(f: PolyMap2, even: PolyMap2) -> PolyMap2 {
    debug_assert!(even.is_even());
    f.add(&even)
}

pub fn registry() -> Vec<Scenario> {
    let classic = with_even_part(
        PolyMap2::new(Poly3::x().scale(0.5), Poly3::y().scale(0.5)),
        PolyMap2::new(
            Poly3::from_terms([term(0.3, [0, 2, 0]), term(-0.1, [0, 0, 0])]).expect("degree 2"),
            Poly3::from_terms([term(0.2, [1, 0, 1])]).expect("degree 2"),
        ),
    );
    let triple = with_even_part(
        multiplicity_map(&[0.25]),
        PolyMap2::new(
            Poly3::from_terms([term(0.5, [2, 0, 0])]).expect("degree 2"),
            Poly3::from_terms([term(-0.4, [0, 1, 1]), term(0.1, [2, 2, 0])]).expect("degree 4"),
        ),
    );
    vec![
        Scenario::new(
            "classic",
            MapFamily::constant(classic),
            Some(1),
            "F = (x, y): the single pole pair",
        ),
        Scenario::new("triple", MapFamily::constant(triple), Some(3), "F = (x(z^2 - 0.25), y)"),
        Scenario::new(
            "quintuple",
            MapFamily::constant(multiplicity_map(&[0.2, 0.7])),
            Some(5),
            "F = (x(z^2 - 0.2)(z^2 - 0.7), y)",
        ),
        Scenario::new(
            "septuple",
            MapFamily::constant(multiplicity_map(&[0.2, 0.5, 0.8])),
            Some(7),
            "F = (x(z^2 - 0.2)(z^2 - 0.5)(z^2 - 0.8), y)",
        ),
        Scenario::new(
            "many-21",
            MapFamily::constant(multiplicity_map(&equally_spaced(10))),
            Some(21),
            "F = (x prod_{i=1..10}(z^2 - i/11), y)",
        ),
        Scenario::new(
            "pitchfork",
            pitchfork_family(0.0, 0.05),
            None,
            "F_eps = (x(z^2 - eps), y): 1 pair for eps < 0, 3 for eps > 0",
        ),
        Scenario::new(
            "shifted-pitchfork",
            pitchfork_family(0.3, 0.35),
            None,
            "F_eps = (x(z^2 - (eps - 0.3)), y): splits at eps = 0.3",
        ),
        Scenario::new(
            "quintuple-collapse",
            collapse_family(0.0),
            None,
            "F_eps = (x(z^2 - 0.5)(z^2 - (0.1 - eps)), y): 5 pairs drop to 3 at eps = 0.1",
        ),
        random_odd_scenario(RANDOM_ODD_SEED, RANDOM_ODD_DEGREE).expect("default degree is valid"),
    ]
}

pub fn lookup(name: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

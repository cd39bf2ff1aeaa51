//! Local winding indices of zeros and the mod-2 parity certificate.
//!
//! Three witnesses are computed for "the number of antipodal pairs is odd":
//! the pair count itself, the sum of `|index|` over pairs mod 2, and the
//! pair count of a re-solved, odd-perturbed field `F(x) - v z`. The last one
//! is the preimage count of the regular value `v` under the map
//! `x -> F(x) / z` on the upper hemisphere, which is a chart of the
//! projective plane. Only mod-2 data is global; signed indices depend on the
//! chosen member of each pair and are kept for diagnostics.

use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::OddField;
use crate::sphere::{retract, tangent_frame, SpherePoint, SymmetricMesh, TangentFrame};
use crate::zeros::{solve_zero_set, CoincidencePair, SolverConfig};

pub const MIN_SAMPLES: usize = 64;
pub const MAX_SAMPLES: usize = 4096;
pub const MAX_RADIUS: f64 = 0.1;

/// `|F|` below this on the winding circle means the circle hit a zero.
pub const ZERO_ON_CIRCLE: f64 = 1e-13;

/// Regular values are capped at this fraction of `max |F|`.
pub const REGULAR_VALUE_FRACTION: f64 = 0.1;
pub const REGULAR_VALUE_RETRIES: usize = 10;
pub const REGULAR_VALUE_SEED: u64 = 0x00b0_75c4_0dd5;

/// Mesh level used to estimate `max |F|`.
const SCALE_LEVEL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularValueParity {
    Even,
    Odd,
    Unknown,
}

impl RegularValueParity {
    pub fn from_count(n: usize) -> Self {
        if n % 2 == 1 {
            Self::Odd
        } else {
            Self::Even
        }
    }
}

impl Serialize for RegularValueParity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Even => s.serialize_u8(0),
            Self::Odd => s.serialize_u8(1),
            Self::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for RegularValueParity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bit(u8),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bit(0) => Ok(Self::Even),
            Raw::Bit(1) => Ok(Self::Odd),
            Raw::Word(w) if w == "unknown" => Ok(Self::Unknown),
            _ => Err(serde::de::Error::custom("expected 0, 1 or \"unknown\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCertificate {
    pub pair_count_odd: bool,
    pub index_sum_mod2: u8,
    pub regular_value_parity: RegularValueParity,
    /// All available witnesses agree.
    pub consistent: bool,
    #[serde(default)]
    pub degenerate_present: bool,
}

/// Half the distance from pair `i` to the nearest other zero, capped at
/// [`MAX_RADIUS`].
pub fn isolation_radius(pairs: &[CoincidencePair], i: usize) -> f64 {
    let rep = &pairs[i].representative;
    pairs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, other)| 0.5 * rep.pair_distance(&other.representative))
        .fold(MAX_RADIUS, f64::min)
}

/// Accumulated angle of `F` over `n` samples, or `None` when some step
/// reaches a quarter turn.
fn accumulated_angle(
    field: &OddField,
    p: SpherePoint,
    frame: &TangentFrame,
    radius: f64,
    n: usize,
) -> Result<Option<f64>> {
    let angle = |k: usize| -> Result<f64> {
        let t = TAU * k as f64 / n as f64;
        let q = retract(p, Vector2::new(t.cos(), t.sin()) * radius, frame)?;
        let v = field.eval(&q);
        if v.norm() < ZERO_ON_CIRCLE {
            return Err(Error::ZeroOnCircle { value: v.norm() });
        }
        Ok(v.y.atan2(v.x))
    };
    let mut prev = angle(0)?;
    let mut total = 0.0;
    for k in 1..=n {
        let a = angle(k)?;
        let mut d = a - prev;
        if d > PI {
            d -= TAU;
        } else if d <= -PI {
            d += TAU;
        }
        if d.abs() >= PI / 2.0 {
            return Ok(None);
        }
        total += d;
        prev = a;
    }
    Ok(Some(total))
}

/// Winding number of `F` around the circle of radius `radius` centred at `p`,
/// oriented by the tangent frame at `p`.
pub fn winding_number(field: &OddField, p: SpherePoint, radius: f64, samples: usize) -> Result<i32> {
    let frame = tangent_frame(p);
    let mut n = samples.max(MIN_SAMPLES);
    while n <= MAX_SAMPLES {
        if let Some(total) = accumulated_angle(field, p, &frame, radius, n)? {
            return Ok((total / TAU).round() as i32);
        }
        n *= 2;
    }
    Err(Error::StepTooLarge {
        max_samples: MAX_SAMPLES,
    })
}

pub fn local_index(field: &OddField, pair: &CoincidencePair, radius: f64, samples: usize) -> Result<i32> {
    winding_number(field, pair.representative, radius, samples)
}

/// Fills `local_index` for every pair using its isolation radius.
pub fn assign_local_indices(field: &OddField, pairs: &mut [CoincidencePair]) -> Result<()> {
    let radii: Vec<f64> = (0..pairs.len()).map(|i| isolation_radius(pairs, i)).collect();
    for (pair, radius) in pairs.iter_mut().zip(radii) {
        pair.local_index = Some(local_index(field, pair, radius, MIN_SAMPLES)?);
    }
    Ok(())
}

/// Assembles the certificate. Pairs without a computed index count as
/// `|index| = 1` when nondegenerate.
pub fn certify_parity(pairs: &[CoincidencePair], regular: RegularValueParity) -> ParityCertificate {
    let pair_count_odd = pairs.len() % 2 == 1;
    let index_sum: u64 = pairs
        .iter()
        .map(|p| match p.local_index {
            Some(i) => u64::from(i.unsigned_abs()),
            None => u64::from(!p.degenerate),
        })
        .sum();
    let index_sum_mod2 = (index_sum % 2) as u8;
    let degenerate_present = pairs.iter().any(|p| p.degenerate);
    let regular_value_parity = if degenerate_present {
        RegularValueParity::Unknown
    } else {
        regular
    };
    let regular_agrees = match regular_value_parity {
        RegularValueParity::Unknown => true,
        RegularValueParity::Odd => pair_count_odd,
        RegularValueParity::Even => !pair_count_odd,
    };
    ParityCertificate {
        pair_count_odd,
        index_sum_mod2,
        regular_value_parity,
        consistent: pair_count_odd == (index_sum_mod2 == 1) && regular_agrees,
        degenerate_present,
    }
}

/// `max |F|` over the vertices of the level-4 mesh.
pub fn field_scale(field: &OddField) -> f64 {
    let mesh = SymmetricMesh::shared(SCALE_LEVEL).expect("level 4 is within the cap");
    mesh.vertices().iter().map(|p| field.eval(p).norm()).fold(0.0, f64::max)
}

/// Parity of the number of solutions of `F(x) = v z` counted once per
/// antipodal pair, i.e. of `F(x)/z = v` on the upper hemisphere.
///
/// Fails with [`Error::NotRegular`] when a solution is degenerate.
pub fn regular_value_parity(field: &OddField, v: Vector2<f64>, cfg: &SolverConfig) -> Result<u8> {
    let bound = REGULAR_VALUE_FRACTION * field_scale(field);
    if !(v.norm() > 0.0) {
        return Err(Error::InvalidRegularValue("v must be nonzero".into()));
    }
    if v.norm() > bound {
        return Err(Error::InvalidRegularValue(format!(
            "|v| = {} exceeds {REGULAR_VALUE_FRACTION} max|F| = {bound}",
            v.norm()
        )));
    }
    let shifted = field.shifted_linear(v, Vector3::z());
    let pairs = solve_zero_set(&shifted, cfg)?;
    if pairs.iter().any(|p| p.degenerate) {
        return Err(Error::NotRegular([v.x, v.y]));
    }
    Ok((pairs.len() % 2) as u8)
}

/// Draws small values `v` from a seeded ChaCha8 stream until one is regular.
pub fn draw_regular_value_parity(field: &OddField, cfg: &SolverConfig, seed: u64) -> RegularValueParity {
    let bound = REGULAR_VALUE_FRACTION * field_scale(field);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..=REGULAR_VALUE_RETRIES {
        let theta = rng.random_range(0.0..TAU);
        let r = bound * rng.random_range(0.1..1.0);
        let v = Vector2::new(theta.cos(), theta.sin()) * r;
        if let Ok(bit) = regular_value_parity(field, v, cfg) {
            return RegularValueParity::from_count(bit as usize);
        }
    }
    RegularValueParity::Unknown
}

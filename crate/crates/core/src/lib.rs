//! Numerical laboratory for antipodal coincidences of maps `S^2 -> R^2`.
//!
//! For a polynomial map `f`, the points with `f(x) = f(-x)` are the zeros of
//! the odd field `F(x) = f(x) - f(-x)`. They come in antipodal pairs, and
//! for generic `f` the number of pairs is odd. This crate finds those pairs,
//! certifies the parity with independent witnesses, and follows the pairs
//! through one-parameter families `f0 + eps * g`.
//!
//! ```
//! use antipodal::{scenarios, zeros::{find_coincidences, SolverConfig}};
//!
//! let triple = scenarios::lookup("triple").unwrap().family.current();
//! let set = find_coincidences(&triple, &SolverConfig::default()).unwrap();
//! assert_eq!(set.pairs.len(), 3);
//! ```

// `!(a < b)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod error;
pub mod index;
pub mod poly;
pub mod scenarios;
pub mod sphere;
pub mod zeros;

pub use error::{Error, Result};
pub use poly::{difference_field, MapFamily, OddField, Poly3, PolyMap2};
pub use sphere::SpherePoint;
pub use zeros::{find_coincidences, CoincidencePair, CoincidenceSet, SolverConfig};

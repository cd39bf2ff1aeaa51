//! Brute-force zero counter used as a reference for the solver.
//!
//! It takes the piecewise-linear interpolant of a field on a fine
//! icosahedral mesh and solves every triangle for its barycentric zero. No
//! Newton iteration, no candidate heuristics. Zeros found by several
//! triangles (on shared edges or vertices) are merged by chord distance.

#![allow(dead_code)]

use antipodal::poly::OddField;
use antipodal::sphere::{SpherePoint, SymmetricMesh};
use nalgebra::{Matrix3, Vector2, Vector3};

pub const ORACLE_LEVEL: u32 = 8;
/// Zeros closer than this are the same zero. Copies of one zero found by
/// neighbouring triangles agree to rounding; distinct zeros closer than a
/// quarter of the level-8 edge (about 4e-3) are not resolved anyway.
pub const CLUSTER_TOL: f64 = 1e-3;
const BARY_SLACK: f64 = 1e-12;

fn pl_zero(pts: [&Vector3<f64>; 3], vals: [Vector2<f64>; 3]) -> Option<Vector3<f64>> {
    let m = Matrix3::new(
        vals[0].x, vals[1].x, vals[2].x, //
        vals[0].y, vals[1].y, vals[2].y, //
        1.0, 1.0, 1.0,
    );
    let lambda = m.lu().solve(&Vector3::new(0.0, 0.0, 1.0))?;
    if lambda.iter().any(|l| !l.is_finite() || *l < -BARY_SLACK) {
        return None;
    }
    let v = pts[0] * lambda[0] + pts[1] * lambda[1] + pts[2] * lambda[2];
    Some(v.normalize())
}

fn cluster(points: Vec<Vector3<f64>>, dist: impl Fn(&Vector3<f64>, &Vector3<f64>) -> f64) -> Vec<Vector3<f64>> {
    let mut reps: Vec<Vector3<f64>> = Vec::new();
    for p in points {
        if !reps.iter().any(|r| dist(r, &p) < CLUSTER_TOL) {
            reps.push(p);
        }
    }
    reps
}

/// Zeros of an arbitrary (not necessarily odd) field on the unit sphere.
pub fn oracle_zeros_of(level: u32, f: impl Fn(&Vector3<f64>) -> Vector2<f64>) -> Vec<Vector3<f64>> {
    let mesh = SymmetricMesh::shared(level).expect("oracle mesh");
    let values: Vec<Vector2<f64>> = mesh.vertices().iter().map(|v| f(v.coords())).collect();
    let raw: Vec<Vector3<f64>> = mesh
        .triangles()
        .iter()
        .filter_map(|&[a, b, c]| {
            let vs = mesh.vertices();
            pl_zero(
                [vs[a].coords(), vs[b].coords(), vs[c].coords()],
                [values[a], values[b], values[c]],
            )
        })
        .collect();
    cluster(raw, |a, b| (a - b).norm())
}

/// Antipodal pairs of zeros of an odd field, one canonical member each.
pub fn oracle_pairs(field: &OddField) -> Vec<SpherePoint> {
    let zeros = oracle_zeros_of(ORACLE_LEVEL, |v| field.eval_ambient(v));
    cluster(zeros, |a, b| (a - b).norm().min((a + b).norm()))
        .into_iter()
        .map(|v| SpherePoint::new(v).expect("unit").canonical())
        .collect()
}

pub fn oracle_pair_count(field: &OddField) -> usize {
    oracle_pairs(field).len()
}

//! Locating, refining and folding the zeros of an odd field into antipodal
//! pairs.
//!
//! The pipeline is: flag candidate mesh triangles, run a Newton iteration on
//! the sphere from each candidate centroid, cluster the converged points
//! modulo `p ~ -p`, then classify every pair by its tangent Jacobian.

use std::cmp::Ordering;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{self, ParityCertificate, RegularValueParity};
use crate::poly::{difference_field, MapFamily, OddField, PolyMap2};
use crate::sphere::{retract, tangent_frame, SpherePoint, SymmetricMesh, MAX_MESH_LEVEL};

/// Coarsest mesh on which candidate search is allowed.
pub const MIN_SEARCH_LEVEL: u32 = 3;

/// Largest residual `|F|` accepted at a reported zero and at its antipode.
pub const TOL_RESIDUAL: f64 = 1e-10;

/// Newton stops with [`Error::SingularJacobian`] below this `|det|`.
pub const SINGULAR_DET: f64 = 1e-14;

/// Longest tangent step taken by one Newton iteration.
pub const MAX_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub mesh_level: u32,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub merge_tol: f64,
    pub degeneracy_tol: f64,
    pub lambda: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mesh_level: 6,
            newton_tol: 1e-12,
            max_iter: 50,
            merge_tol: 1e-8,
            degeneracy_tol: 1e-8,
            lambda: 2.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_level < MIN_SEARCH_LEVEL {
            return Err(Error::MeshTooCoarse {
                level: self.mesh_level,
                min: MIN_SEARCH_LEVEL,
            });
        }
        if self.mesh_level > MAX_MESH_LEVEL {
            return Err(Error::LevelTooLarge {
                level: self.mesh_level,
                max: MAX_MESH_LEVEL,
            });
        }
        let positive = [
            ("newton_tol", self.newton_tol),
            ("merge_tol", self.merge_tol),
            ("degeneracy_tol", self.degeneracy_tol),
            ("lambda", self.lambda),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One antipodal pair `{p, -p}` of zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidencePair {
    #[serde(rename = "rep")]
    pub representative: SpherePoint,
    pub residual: f64,
    #[serde(rename = "jac_det")]
    pub jacobian_det: f64,
    /// `det M / sigma_max(M)^2`, the determinant after scaling `F` to unit
    /// gradient norm at the zero.
    #[serde(skip)]
    pub conditioning: f64,
    pub degenerate: bool,
    #[serde(rename = "index")]
    pub local_index: Option<i32>,
}

impl CoincidencePair {
    fn new(representative: SpherePoint, residual: f64) -> Self {
        Self {
            representative,
            residual,
            jacobian_det: f64::NAN,
            conditioning: f64::NAN,
            degenerate: false,
            local_index: None,
        }
    }

    pub fn members(&self) -> [SpherePoint; 2] {
        [self.representative, self.representative.antipode()]
    }
}

/// The solved zero set at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceSet {
    pub epsilon: f64,
    pub pairs: Vec<CoincidencePair>,
    pub certificate: ParityCertificate,
    pub genericity_ok: bool,
}

impl CoincidenceSet {
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// An even pair count, or witnesses that disagree.
    pub fn parity_violation(&self) -> bool {
        !self.certificate.pair_count_odd || !self.certificate.consistent
    }

    /// Recomputes the certificate from the stored pairs (the regular-value
    /// witness is carried over, it needs the field).
    pub fn recertify(&self) -> ParityCertificate {
        index::certify_parity(&self.pairs, self.certificate.regular_value_parity)
    }
}

/// Newton history for diagnostics: residual `|F|` at every iterate.
#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub point: SpherePoint,
    pub residuals: Vec<f64>,
}

impl NewtonReport {
    pub fn iterations(&self) -> usize {
        self.residuals.len() - 1
    }
}

fn newton_step(value: Vector2<f64>, jac: &Matrix2<f64>) -> Result<Vector2<f64>> {
    let det = jac.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::SingularJacobian { det });
    }
    let inv = Matrix2::new(jac[(1, 1)], -jac[(0, 1)], -jac[(1, 0)], jac[(0, 0)]) / det;
    let mut step = -(inv * value);
    let len = step.norm();
    if len > MAX_STEP {
        step *= MAX_STEP / len;
    }
    Ok(step)
}

/// Newton on the sphere: `p <- retract(p, -M^-1 F(p))` until `|F(p)| <= tol`.
pub fn refine_newton_traced(field: &OddField, start: SpherePoint, tol: f64, max_iter: usize) -> Result<NewtonReport> {
    let mut p = start;
    let mut residuals = Vec::with_capacity(max_iter + 1);
    for _ in 0..max_iter {
        let frame = tangent_frame(p);
        let (value, jac) = field.eval_with_jacobian(&frame);
        residuals.push(value.norm());
        if value.norm() <= tol {
            return Ok(NewtonReport { point: p, residuals });
        }
        let step = newton_step(value, &jac)?;
        p = retract(p, step, &frame)?;
    }
    let residual = field.eval(&p).norm();
    residuals.push(residual);
    if residual <= tol {
        Ok(NewtonReport { point: p, residuals })
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

pub fn refine_newton(field: &OddField, start: SpherePoint, tol: f64, max_iter: usize) -> Result<SpherePoint> {
    refine_newton_traced(field, start, tol, max_iter).map(|r| r.point)
}

/// Keeps iterating from a converged zero while the step length shrinks.
///
/// At a regular zero this stops after one or two steps at rounding level.
/// At a degenerate zero Newton is only linear, and the extra steps pull the
/// iterates from every start onto one point, so they cluster and the
/// vanishing determinant becomes visible.
pub fn polish(field: &OddField, zero: SpherePoint, tol: f64, budget: usize) -> SpherePoint {
    let mut p = zero;
    let mut last_len = f64::INFINITY;
    for _ in 0..budget {
        let frame = tangent_frame(p);
        let (value, jac) = field.eval_with_jacobian(&frame);
        let Ok(step) = newton_step(value, &jac) else { break };
        let len = step.norm();
        if !(len < last_len) || len == 0.0 {
            break;
        }
        let Ok(q) = retract(p, step, &frame) else { break };
        if field.eval(&q).norm() > tol {
            break;
        }
        p = q;
        last_len = len;
    }
    p
}

/// Triangles that may contain a zero: a component changes sign over the
/// vertices, or `min |F| <= lambda * h * L` with `h` the longest edge and `L`
/// the largest vertex Jacobian norm.
pub fn locate_candidates(field: &OddField, mesh: &SymmetricMesh, lambda: f64) -> Result<Vec<usize>> {
    if mesh.level() < MIN_SEARCH_LEVEL {
        return Err(Error::MeshTooCoarse {
            level: mesh.level(),
            min: MIN_SEARCH_LEVEL,
        });
    }
    let samples: Vec<(Vector2<f64>, f64)> = mesh
        .vertices()
        .par_iter()
        .map(|&v| {
            let (value, jac) = field.eval_with_jacobian(&tangent_frame(v));
            (value, jac.norm())
        })
        .collect();

    let candidates: Vec<usize> = mesh
        .triangles()
        .par_iter()
        .enumerate()
        .filter_map(|(t, tri)| {
            let s = tri.map(|i| samples[i]);
            let changes_sign = (0..2).any(|c| {
                let lo = s.iter().map(|(v, _)| v[c]).fold(f64::INFINITY, f64::min);
                let hi = s.iter().map(|(v, _)| v[c]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            });
            if changes_sign {
                return Some(t);
            }
            let min_abs = s.iter().map(|(v, _)| v.norm()).fold(f64::INFINITY, f64::min);
            let lipschitz = s.iter().map(|(_, l)| *l).fold(0.0, f64::max);
            (min_abs <= lambda * mesh.longest_edge(t) * lipschitz).then_some(t)
        })
        .collect();

    if candidates.is_empty() {
        return Err(Error::SuspectMiss);
    }
    Ok(candidates)
}

/// Clusters zeros modulo `p ~ -p` and returns one pair per cluster, each
/// member re-verified.
pub fn fold_pairs(field: &OddField, points: &[(SpherePoint, f64)], merge_tol: f64) -> Result<Vec<CoincidencePair>> {
    // (first member, best member, best residual)
    let mut clusters: Vec<(SpherePoint, SpherePoint, f64)> = Vec::new();
    for &(p, residual) in points {
        match clusters
            .iter_mut()
            .find(|(first, _, _)| first.pair_distance(&p) <= merge_tol)
        {
            Some(cluster) => {
                if residual < cluster.2 {
                    cluster.1 = p;
                    cluster.2 = residual;
                }
            }
            None => clusters.push((p, p, residual)),
        }
    }

    let mut pairs = Vec::with_capacity(clusters.len());
    for (_, best, _) in clusters {
        let rep = best.canonical();
        let residual = field.eval(&rep).norm();
        let mirror = field.eval(&rep.antipode()).norm();
        if !(residual <= TOL_RESIDUAL && mirror <= TOL_RESIDUAL) {
            return Err(Error::AsymmetricZeroSet {
                residual: residual.max(mirror),
            });
        }
        pairs.push(CoincidencePair::new(rep, residual));
    }
    sort_pairs(&mut pairs);
    Ok(pairs)
}

fn order_key(p: &SpherePoint) -> [i64; 3] {
    // Quantized so rounding noise in the last bits does not reorder pairs.
    let q = |v: f64| -(v * 1e9).round() as i64;
    [q(p.z()), q(p.y()), q(p.x())]
}

/// Canonical output order: `z` descending, then `y`, then `x`.
pub fn sort_pairs(pairs: &mut [CoincidencePair]) {
    pairs.sort_by(|a, b| {
        let (pa, pb) = (&a.representative, &b.representative);
        order_key(pa).cmp(&order_key(pb)).then_with(|| {
            pb.to_array()
                .iter()
                .rev()
                .zip(pa.to_array().iter().rev())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
}

/// `det M / sigma_max^2`.
pub fn conditioning(jac: &Matrix2<f64>) -> f64 {
    let det = jac.determinant();
    let half = jac.norm_squared() / 2.0;
    let sigma_max_sq = half + (half * half - det * det).max(0.0).sqrt();
    if sigma_max_sq > 0.0 {
        det / sigma_max_sq
    } else {
        0.0
    }
}

pub fn classify(field: &OddField, pair: &mut CoincidencePair, degeneracy_tol: f64) {
    let (_, jac) = field.eval_with_jacobian(&tangent_frame(pair.representative));
    pair.jacobian_det = jac.determinant();
    pair.conditioning = conditioning(&jac);
    pair.degenerate = pair.conditioning.abs() <= degeneracy_tol;
}

/// Zeros of `field` as classified antipodal pairs, without indices or a
/// certificate.
pub fn solve_zero_set(field: &OddField, cfg: &SolverConfig) -> Result<Vec<CoincidencePair>> {
    cfg.validate()?;
    if field.is_zero() {
        return Err(Error::InvalidArgument("difference field vanishes identically".into()));
    }
    let mesh = SymmetricMesh::shared(cfg.mesh_level)?;
    let candidates = locate_candidates(field, &mesh, cfg.lambda)?;
    let zeros: Vec<(SpherePoint, f64)> = candidates
        .par_iter()
        .filter_map(|&t| {
            let p = refine_newton(field, mesh.centroid(t), cfg.newton_tol, cfg.max_iter).ok()?;
            let p = polish(field, p, cfg.newton_tol, cfg.max_iter);
            Some((p, field.eval(&p).norm()))
        })
        .collect();
    if zeros.is_empty() {
        return Err(Error::SuspectMiss);
    }
    let mut pairs = fold_pairs(field, &zeros, cfg.merge_tol)?;
    for pair in &mut pairs {
        classify(field, pair, cfg.degeneracy_tol);
    }
    Ok(pairs)
}

/// Full solve of one odd field: pairs, local indices and parity certificate.
pub fn solve_field(field: &OddField, epsilon: f64, cfg: &SolverConfig) -> Result<CoincidenceSet> {
    let mut pairs = solve_zero_set(field, cfg)?;
    index::assign_local_indices(field, &mut pairs)?;
    let genericity_ok = pairs.iter().all(|p| !p.degenerate);
    let regular = if genericity_ok {
        index::draw_regular_value_parity(field, cfg, index::REGULAR_VALUE_SEED)
    } else {
        RegularValueParity::Unknown
    };
    let certificate = index::certify_parity(&pairs, regular);
    Ok(CoincidenceSet {
        epsilon,
        pairs,
        certificate,
        genericity_ok,
    })
}

/// Antipodal coincidences of `f`: the zeros of `f(x) - f(-x)`.
pub fn find_coincidences(f: &PolyMap2, cfg: &SolverConfig) -> Result<CoincidenceSet> {
    solve_field(&difference_field(f), 0.0, cfg)
}

pub fn find_coincidences_at(family: &MapFamily, eps: f64, cfg: &SolverConfig) -> Result<CoincidenceSet> {
    solve_field(&difference_field(&family.at(eps)), eps, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Poly3, Term};
    use approx::assert_abs_diff_eq;

    fn p3(terms: &[(f64, [u32; 3])]) -> Poly3 {
        Poly3::from_terms(terms.iter().map(|&(coeff, exps)| Term { coeff, exps })).unwrap()
    }

    fn pt(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::from_xyz(x, y, z).unwrap()
    }

    fn identity_field() -> OddField {
        OddField::new(Poly3::x(), Poly3::y()).unwrap()
    }

    fn triple_field() -> OddField {
        OddField::new(p3(&[(1.0, [1, 0, 2]), (-0.25, [1, 0, 0])]), Poly3::y()).unwrap()
    }

    fn xz2_field() -> OddField {
        OddField::new(p3(&[(1.0, [1, 0, 2])]), Poly3::y()).unwrap()
    }

    #[test]
    fn newton_converges_quadratically_to_pole() {
        let report = refine_newton_traced(&identity_field(), pt(0.1, 0.1, 0.99), 1e-12, 50).unwrap();
        assert!(report.iterations() <= 6, "{:?}", report.residuals);
        assert!(report.point.chord_distance(&pt(0.0, 0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn newton_finds_triple_root() {
        let p = refine_newton(&triple_field(), pt(0.87, 0.01, 0.49), 1e-12, 50).unwrap();
        assert_abs_diff_eq!(p.x(), 0.8660254037844386, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.z(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn newton_at_degenerate_zero_is_flagged() {
        // Newton converges only linearly onto the double zero at (1,0,0); it
        // either gives up or lands on a point classified as degenerate.
        let field = xz2_field();
        match refine_newton(&field, pt(0.99, 0.01, 0.05), 1e-12, 50) {
            Err(Error::SingularJacobian { .. } | Error::NoConvergence { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
            Ok(p) => {
                assert!(p.chord_distance(&pt(1.0, 0.0, 0.0)) < 1e-5);
                let p = polish(&field, p, 1e-12, 50);
                let mut pair = CoincidencePair::new(p, field.eval(&p).norm());
                classify(&field, &mut pair, 1e-8);
                assert!(pair.degenerate, "conditioning {}", pair.conditioning);
            }
        }
    }

    #[test]
    fn newton_reports_singular_jacobian() {
        // grad of x^3 vanishes on x = 0, so the Jacobian at the pole is rank one.
        let field = OddField::new(p3(&[(1.0, [3, 0, 0])]), Poly3::y()).unwrap();
        assert!(matches!(
            refine_newton(&field, pt(0.0, 0.3, 0.9), 1e-12, 50),
            Err(Error::SingularJacobian { .. })
        ));
        assert!(matches!(
            refine_newton(&triple_field(), pt(0.3, 0.4, 0.5), 1e-12, 1),
            Err(Error::NoConvergence { iterations: 1, .. })
        ));
    }

    #[test]
    fn candidates_for_identity_field_surround_poles() {
        let mesh = SymmetricMesh::shared(4).unwrap();
        let cands = locate_candidates(&identity_field(), &mesh, 2.0).unwrap();
        let poles = [pt(0.0, 0.0, 1.0), pt(0.0, 0.0, -1.0)];
        assert!(cands.iter().any(|&t| mesh.centroid(t).chord_distance(&poles[0]) < 0.1));
        assert!(cands.iter().any(|&t| mesh.centroid(t).chord_distance(&poles[1]) < 0.1));
        let coarse = SymmetricMesh::shared(2).unwrap();
        assert!(matches!(
            locate_candidates(&identity_field(), &coarse, 2.0),
            Err(Error::MeshTooCoarse { level: 2, .. })
        ));
    }

    #[test]
    fn triple_candidates_cluster_near_six_zeros() {
        let mesh = SymmetricMesh::shared(5).unwrap();
        let field = triple_field();
        let cands = locate_candidates(&field, &mesh, 2.0).unwrap();
        let s = 0.75f64.sqrt();
        let zeros = [
            pt(0.0, 0.0, 1.0),
            pt(0.0, 0.0, -1.0),
            pt(s, 0.0, 0.5),
            pt(-s, 0.0, -0.5),
            pt(-s, 0.0, 0.5),
            pt(s, 0.0, -0.5),
        ];
        for z in &zeros {
            assert!(
                cands.iter().any(|&t| mesh.centroid(t).chord_distance(z) < 0.05),
                "{z:?}"
            );
        }
    }

    #[test]
    fn fold_examples() {
        let field = identity_field();
        let n = pt(0.0, 0.0, 1.0);
        let pairs = fold_pairs(&field, &[(n, 0.0), (n.antipode(), 0.0)], 1e-8).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].representative, n);

        let nearby = pt(1e-11, 0.0, 1.0);
        let pairs = fold_pairs(&field, &[(n, 0.0), (nearby, 1e-11)], 1e-8).unwrap();
        assert_eq!(pairs.len(), 1);

        let s = 0.75f64.sqrt();
        let triple = triple_field();
        let six = [
            pt(0.0, 0.0, 1.0),
            pt(0.0, 0.0, -1.0),
            pt(s, 0.0, 0.5),
            pt(-s, 0.0, -0.5),
            pt(s, 0.0, -0.5),
            pt(-s, 0.0, 0.5),
        ];
        let pts: Vec<_> = six.iter().map(|&p| (p, triple.eval(&p).norm())).collect();
        let pairs = fold_pairs(&triple, &pts, 1e-8).unwrap();
        let reps: Vec<_> = pairs.iter().map(|p| p.representative).collect();
        assert_eq!(reps.len(), 3);
        assert!(reps[0].chord_distance(&pt(0.0, 0.0, 1.0)) < 1e-12);
        assert!(reps[1].chord_distance(&pt(s, 0.0, 0.5)) < 1e-12);
        assert!(reps[2].chord_distance(&pt(-s, 0.0, 0.5)) < 1e-12);

        let off = pt(0.3, 0.2, 0.9);
        assert!(matches!(
            fold_pairs(&field, &[(off, 0.0)], 1e-8),
            Err(Error::AsymmetricZeroSet { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let mut pair = CoincidencePair::new(pt(0.0, 0.0, 1.0), 0.0);
        classify(&identity_field(), &mut pair, 1e-8);
        assert_eq!(pair.jacobian_det, 1.0);
        assert!(!pair.degenerate);

        let mut pair = CoincidencePair::new(pt(1.0, 0.0, 0.0), 0.0);
        classify(&xz2_field(), &mut pair, 1e-8);
        assert_eq!(pair.jacobian_det, 0.0);
        assert!(pair.degenerate);

        // At (sqrt(3)/2, 0, 1/2): grad F1 = (0, 0, 2xz), e1 = y-axis,
        // e2 = (-1/2, 0, sqrt(3)/2), so det = -(2xz)(sqrt(3)/2) = -3/4.
        let s = 0.75f64.sqrt();
        let mut pair = CoincidencePair::new(pt(s, 0.0, 0.5), 0.0);
        classify(&triple_field(), &mut pair, 1e-8);
        assert_abs_diff_eq!(pair.jacobian_det, -0.75, epsilon = 1e-12);
        assert!(!pair.degenerate);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"mesh_level": 5}"#).unwrap();
        assert_eq!(
            cfg,
            SolverConfig {
                mesh_level: 5,
                ..SolverConfig::default()
            }
        );
        assert!(SolverConfig { mesh_level: 2, ..cfg }.validate().is_err());
        assert!(SolverConfig { merge_tol: 0.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn identically_zero_field_is_rejected() {
        let f = PolyMap2::new(p3(&[(1.0, [2, 0, 0])]), Poly3::constant(3.0));
        assert!(matches!(
            find_coincidences(&f, &SolverConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn classic_configuration_has_one_pair() {
        let f = PolyMap2::new(Poly3::x().scale(0.5), Poly3::y().scale(0.5));
        let set = find_coincidences(&f, &SolverConfig::default()).unwrap();
        assert_eq!(set.pairs.len(), 1);
        assert!(set.pairs[0].representative.chord_distance(&pt(0.0, 0.0, 1.0)) < 1e-12);
        assert!(set.genericity_ok);
        assert!(!set.parity_violation());
    }
}

//! Parameter sweeps: re-solve on an epsilon grid, match pairs between
//! consecutive grid points, record where the pair count changes and
//! localize those changes by bisection.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{difference_field, MapFamily};
use crate::sphere::SpherePoint;
use crate::zeros::{find_coincidences_at, solve_zero_set, CoincidencePair, CoincidenceSet, SolverConfig};

/// Largest distance a branch may move between two grid points.
pub const MATCHING_CAP: f64 = 0.3;
/// Safety factor on `grid step * branch speed`.
pub const MATCHING_FACTOR: f64 = 5.0;
/// Width of the bracket returned by [`detect_degenerate_crossing`].
pub const CROSSING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    /// Position in the sweep grid.
    pub step: usize,
    pub epsilon: f64,
    pub representative: SpherePoint,
    pub jacobian_det: f64,
    pub local_index: Option<i32>,
}

/// One pair followed across consecutive grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub id: usize,
    pub points: Vec<BranchPoint>,
    pub alive: bool,
}

impl Branch {
    pub fn last(&self) -> &BranchPoint {
        self.points.last().expect("branches are created with one point")
    }

    fn matching_tol(&self, d_eps: f64) -> f64 {
        match self.points.as_slice() {
            [.., a, b] => {
                let speed = a.representative.pair_distance(&b.representative) / (b.epsilon - a.epsilon).abs();
                (MATCHING_FACTOR * d_eps * speed.max(1.0)).min(MATCHING_CAP)
            }
            _ => MATCHING_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub eps_lo: f64,
    pub eps_hi: f64,
    /// Pair count at the grid point visited first.
    pub count_before: usize,
    pub count_after: usize,
}

impl BifurcationEvent {
    /// Generic sweeps change the pair count by an even amount.
    pub fn conserves_parity(&self) -> bool {
        self.count_before.abs_diff(self.count_after).is_multiple_of(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridStatus {
    Solved { pair_count: usize, genericity_ok: bool },
    Unsolved(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRecord {
    pub epsilon: f64,
    pub status: GridStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationTrace {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
    pub grid: Vec<GridRecord>,
}

impl BifurcationTrace {
    /// Every solved generic grid point has an odd count and every event
    /// changes the count by an even amount.
    pub fn parity_conserved(&self) -> bool {
        let counts_odd = self.grid.iter().all(|g| match g.status {
            GridStatus::Solved {
                pair_count,
                genericity_ok: true,
            } => pair_count % 2 == 1,
            _ => true,
        });
        counts_odd && self.events.iter().all(BifurcationEvent::conserves_parity)
    }

    /// Writes `epsilon,branch_id,rep_x,rep_y,rep_z,jacobian_det,local_index`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows: Vec<(&BranchPoint, usize)> = self
            .branches
            .iter()
            .flat_map(|b| b.points.iter().map(move |p| (p, b.id)))
            .collect();
        rows.sort_by_key(|(p, id)| (p.step, *id));
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "epsilon",
            "branch_id",
            "rep_x",
            "rep_y",
            "rep_z",
            "jacobian_det",
            "local_index",
        ])?;
        for (p, id) in rows {
            let [x, y, z] = p.representative.to_array();
            let index = p.local_index.map(|i| i.to_string()).unwrap_or_default();
            w.write_record([
                p.epsilon.to_string(),
                id.to_string(),
                x.to_string(),
                y.to_string(),
                z.to_string(),
                p.jacobian_det.to_string(),
                index,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn events_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.events)?)
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidGrid("non-finite epsilon".into()));
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidGrid("epsilon grid must be strictly monotone".into()));
    }
    Ok(())
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

fn branch_point(step: usize, epsilon: f64, pair: &CoincidencePair) -> BranchPoint {
    BranchPoint {
        step,
        epsilon,
        representative: pair.representative,
        jacobian_det: pair.jacobian_det,
        local_index: pair.local_index,
    }
}

/// Greedy nearest-first matching of live branches to the pairs at a new
/// grid point.
fn match_step(
    branches: &mut Vec<Branch>,
    live: &mut Vec<usize>,
    step: usize,
    epsilon: f64,
    d_eps: f64,
    pairs: &[CoincidencePair],
) {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (slot, &b) in live.iter().enumerate() {
        let branch = &branches[b];
        let tol = branch.matching_tol(d_eps);
        for (j, pair) in pairs.iter().enumerate() {
            let d = branch.last().representative.pair_distance(&pair.representative);
            if d <= tol {
                candidates.push((d, slot, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut branch_taken = vec![false; live.len()];
    let mut pair_taken = vec![false; pairs.len()];
    for (_, slot, j) in candidates {
        if branch_taken[slot] || pair_taken[j] {
            continue;
        }
        branch_taken[slot] = true;
        pair_taken[j] = true;
        branches[live[slot]].points.push(branch_point(step, epsilon, &pairs[j]));
    }

    let mut next_live = Vec::with_capacity(pairs.len());
    for (slot, &b) in live.iter().enumerate() {
        if branch_taken[slot] {
            next_live.push(b);
        } else {
            branches[b].alive = false;
        }
    }
    for (j, pair) in pairs.iter().enumerate() {
        if !pair_taken[j] {
            let id = branches.len();
            branches.push(Branch {
                id,
                points: vec![branch_point(step, epsilon, pair)],
                alive: true,
            });
            next_live.push(id);
        }
    }
    *live = next_live;
}

/// Solves the family at every grid value and links the results into
/// branches. The grid may run in either direction.
pub fn sweep(family: &MapFamily, eps_grid: &[f64], cfg: &SolverConfig) -> Result<BifurcationTrace> {
    validate_grid(eps_grid)?;
    cfg.validate()?;
    let solved: Vec<Result<CoincidenceSet>> = eps_grid
        .par_iter()
        .map(|&eps| find_coincidences_at(family, eps, cfg))
        .collect();

    let mut branches = Vec::new();
    let mut live = Vec::new();
    let mut grid = Vec::with_capacity(eps_grid.len());
    let mut last_solved: Option<f64> = None;
    let mut gap = 0;
    for (step, (&epsilon, result)) in eps_grid.iter().zip(solved).enumerate() {
        match result {
            Err(e) => {
                grid.push(GridRecord {
                    epsilon,
                    status: GridStatus::Unsolved(e.to_string()),
                });
                gap += 1;
                if gap >= 2 {
                    for &b in &live {
                        let branch: &mut Branch = &mut branches[b];
                        branch.alive = false;
                    }
                    live.clear();
                }
            }
            Ok(set) => {
                let d_eps = last_solved.map_or(0.0, |prev| (epsilon - prev).abs());
                match_step(&mut branches, &mut live, step, epsilon, d_eps, &set.pairs);
                grid.push(GridRecord {
                    epsilon,
                    status: GridStatus::Solved {
                        pair_count: set.pairs.len(),
                        genericity_ok: set.genericity_ok,
                    },
                });
                last_solved = Some(epsilon);
                gap = 0;
            }
        }
    }

    let mut events = Vec::new();
    let mut prev: Option<(f64, usize)> = None;
    for record in &grid {
        if let GridStatus::Solved {
            pair_count,
            genericity_ok: true,
        } = record.status
        {
            if let Some((eps, count)) = prev {
                if count != pair_count {
                    events.push(BifurcationEvent {
                        eps_lo: eps.min(record.epsilon),
                        eps_hi: eps.max(record.epsilon),
                        count_before: count,
                        count_after: pair_count,
                    });
                }
            }
            prev = Some((record.epsilon, pair_count));
        }
    }

    Ok(BifurcationTrace { branches, events, grid })
}

fn min_conditioning(pairs: &[CoincidencePair]) -> f64 {
    pairs.iter().map(|p| p.conditioning.abs()).fold(f64::INFINITY, f64::min)
}

/// Bisects one event bracket down to [`CROSSING_TOL`].
///
/// The smallest `|det|` jumps at a bifurcation: on one side the colliding
/// pairs do not exist, on the other their determinant tends to zero. The
/// bracket therefore keeps the two pair counts on its two ends, stops early
/// when a midpoint is itself degenerate, and finally checks that the
/// determinant on the many-pair side has decreased toward the threshold.
fn bisect_event(family: &MapFamily, event: &BifurcationEvent, cfg: &SolverConfig) -> Result<f64> {
    let solve = |eps: f64| solve_zero_set(&difference_field(&family.at(eps)), cfg);
    let (mut lo, mut hi) = (event.eps_lo, event.eps_hi);
    let lo_pairs = solve(lo)?;
    let hi_pairs = solve(hi)?;
    let (n_lo, n_hi) = (lo_pairs.len(), hi_pairs.len());
    if n_lo == n_hi {
        return Err(Error::NoSignChange { lo, hi });
    }
    let many_on_hi = n_hi > n_lo;
    let initial = min_conditioning(if many_on_hi { &hi_pairs } else { &lo_pairs });
    let mut current = initial;

    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        let pairs = solve(mid)?;
        if pairs.iter().any(|p| p.degenerate) {
            return Ok(mid);
        }
        if pairs.len() == n_lo {
            lo = mid;
            if !many_on_hi {
                current = min_conditioning(&pairs);
            }
        } else if pairs.len() == n_hi {
            hi = mid;
            if many_on_hi {
                current = min_conditioning(&pairs);
            }
        } else {
            return Err(Error::NoSignChange { lo, hi });
        }
    }
    if !(current < initial) {
        return Err(Error::NoSignChange { lo, hi });
    }
    Ok(0.5 * (lo + hi))
}

/// Refined parameter values at which each recorded event becomes degenerate.
pub fn detect_degenerate_crossing(
    trace: &BifurcationTrace,
    family: &MapFamily,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    if trace.events.is_empty() {
        return Err(Error::InvalidArgument("trace has no events to refine".into()));
    }
    trace.events.iter().map(|e| bisect_event(family, e, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Poly3, PolyMap2, Term};

    fn p3(terms: &[(f64, [u32; 3])]) -> Poly3 {
        Poly3::from_terms(terms.iter().map(|&(coeff, exps)| Term { coeff, exps })).unwrap()
    }

    /// `F_eps = (x (z^2 - (eps - shift)), y)`.
    fn pitchfork(shift: f64) -> MapFamily {
        let base = PolyMap2::new(p3(&[(0.5, [1, 0, 2]), (0.5 * shift, [1, 0, 0])]), Poly3::y().scale(0.5));
        let dir = PolyMap2::new(Poly3::x().scale(-0.5), Poly3::zero());
        MapFamily::new(base, dir, 0.0)
    }

    #[test]
    fn grid_validation() {
        let fam = pitchfork(0.0);
        let cfg = SolverConfig::default();
        assert!(matches!(sweep(&fam, &[0.1], &cfg), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            sweep(&fam, &[0.1, 0.2, 0.15], &cfg),
            Err(Error::InvalidGrid(_))
        ));
        assert_eq!(linspace(-0.1, 0.1, 41)[20], 0.0);
    }

    #[test]
    fn pitchfork_four_point_sweep() {
        let trace = sweep(&pitchfork(0.0), &[-0.1, -0.05, 0.05, 0.1], &SolverConfig::default()).unwrap();
        assert_eq!(
            trace.events,
            vec![BifurcationEvent {
                eps_lo: -0.05,
                eps_hi: 0.05,
                count_before: 1,
                count_after: 3
            }]
        );
        assert!(trace.parity_conserved());
        let pole = trace
            .branches
            .iter()
            .find(|b| b.points[0].representative.z() > 0.999)
            .unwrap();
        assert_eq!(pole.points.len(), 4);
        assert!(pole.alive);
    }

    #[test]
    fn constant_family_has_no_events() {
        let f = PolyMap2::new(p3(&[(0.5, [1, 0, 2]), (-0.125, [1, 0, 0])]), Poly3::y().scale(0.5));
        let trace = sweep(
            &MapFamily::constant(f.clone()),
            &linspace(0.0, 1.0, 5),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(trace.events.is_empty());
        assert_eq!(trace.branches.len(), 3);
        assert!(trace.branches.iter().all(|b| b.alive && b.points.len() == 5));
        assert!(detect_degenerate_crossing(&trace, &MapFamily::constant(f), &SolverConfig::default()).is_err());
    }

    #[test]
    fn shifted_pitchfork_crossing() {
        let fam = pitchfork(0.3);
        let cfg = SolverConfig::default();
        let trace = sweep(&fam, &linspace(0.21, 0.41, 6), &cfg).unwrap();
        assert_eq!(trace.events.len(), 1);
        let eps = detect_degenerate_crossing(&trace, &fam, &cfg).unwrap();
        assert!((eps[0] - 0.3).abs() <= 1e-6, "{eps:?}");
    }

    #[test]
    fn csv_and_events_format() {
        let trace = sweep(&pitchfork(0.0), &[-0.1, 0.1], &SolverConfig::default()).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epsilon,branch_id,rep_x,rep_y,rep_z,jacobian_det,local_index"
        );
        assert_eq!(lines.count(), 4);
        let json = trace.events_json().unwrap();
        let events: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
        assert_eq!(events.len(), 1);
        for key in ["eps_lo", "eps_hi", "count_before", "count_after"] {
            assert!(events[0].get(key).is_some(), "{key}");
        }
    }
}

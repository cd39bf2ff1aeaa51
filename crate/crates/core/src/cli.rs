//! Command implementations behind the `antipodal` binary.
//!
//! Every command returns a process exit code: 0 on success, 1 on operational
//! failure (bad input, solver error), 2 when the solve succeeded but the
//! result is non-generic or its parity witnesses disagree.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::continuation::{linspace, sweep};
use crate::error::{Error, Result};
use crate::index::RegularValueParity;
use crate::poly::{MapFamily, PolyMap2};
use crate::scenarios::{self, RANDOM_ODD_DEGREE, RANDOM_ODD_SEED};
use crate::zeros::{find_coincidences, find_coincidences_at, CoincidenceSet, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARITY: i32 = 2;

/// Where the map comes from.
#[derive(Debug, Clone)]
pub enum MapSource {
    Scenario {
        name: String,
        seed: Option<u64>,
        degree: Option<u32>,
    },
    File(PathBuf),
}

pub fn load_config(path: Option<&Path>) -> Result<SolverConfig> {
    let cfg = match path {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => SolverConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses either a `MapFamily` (has a `base` key) or a bare `PolyMap2`.
pub fn parse_map_json(text: &str) -> Result<MapFamily> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("base").is_some() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(MapFamily::constant(serde_json::from_value::<PolyMap2>(value)?))
    }
}

pub fn load_family(source: &MapSource) -> Result<MapFamily> {
    match source {
        MapSource::File(path) => parse_map_json(&fs::read_to_string(path)?),
        MapSource::Scenario { name, seed, degree } if name == "random-odd" => Ok(scenarios::random_odd_scenario(
            seed.unwrap_or(RANDOM_ODD_SEED),
            degree.unwrap_or(RANDOM_ODD_DEGREE),
        )?
        .family),
        MapSource::Scenario { name, .. } => Ok(scenarios::lookup(name)?.family),
    }
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn fail(stderr: &mut dyn Write, err: &Error) -> i32 {
    let _ = writeln!(stderr, "error: {err}");
    EXIT_FAILURE
}

pub fn run_solve(
    source: &MapSource,
    epsilon: Option<f64>,
    cfg: &SolverConfig,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let result = (|| -> Result<CoincidenceSet> {
        let family = load_family(source)?;
        let set = find_coincidences_at(&family, epsilon.unwrap_or(family.epsilon), cfg)?;
        write_output(out, &serde_json::to_string_pretty(&set)?, stdout)?;
        Ok(set)
    })();
    match result {
        Ok(set) if set.parity_violation() || !set.genericity_ok => {
            let _ = writeln!(
                stderr,
                "warning: {} pairs, genericity_ok = {}, certificate consistent = {}",
                set.pair_count(),
                set.genericity_ok,
                set.certificate.consistent
            );
            EXIT_PARITY
        }
        Ok(_) => EXIT_OK,
        Err(e) => fail(stderr, &e),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    source: &MapSource,
    eps_lo: f64,
    eps_hi: f64,
    steps: usize,
    cfg: &SolverConfig,
    out_dir: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    if !(eps_lo < eps_hi) {
        return fail(
            stderr,
            &Error::InvalidGrid(format!("need LO < HI, got {eps_lo} >= {eps_hi}")),
        );
    }
    if steps < 2 {
        return fail(
            stderr,
            &Error::InvalidGrid(format!("need at least 2 steps, got {steps}")),
        );
    }
    let result = (|| -> Result<bool> {
        let family = load_family(source)?;
        let trace = sweep(&family, &linspace(eps_lo, eps_hi, steps), cfg)?;
        fs::create_dir_all(out_dir)?;
        trace.write_csv(fs::File::create(out_dir.join("trace.csv"))?)?;
        fs::write(out_dir.join("events.json"), trace.events_json()? + "\n")?;
        writeln!(
            stdout,
            "{} branches, {} events",
            trace.branches.len(),
            trace.events.len()
        )?;
        for e in &trace.events {
            writeln!(
                stdout,
                "  ({}, {}): {} -> {}",
                e.eps_lo, e.eps_hi, e.count_before, e.count_after
            )?;
        }
        Ok(trace.parity_conserved())
    })();
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "warning: pair-count parity not conserved across the sweep");
            EXIT_PARITY
        }
        Err(e) => fail(stderr, &e),
    }
}

/// Per-trial seeds derived from one master ChaCha8 stream.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.random()).collect()
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub set: Result<CoincidenceSet, String>,
}

impl TrialOutcome {
    /// Failed trials and generic trials with an even count or disagreeing
    /// witnesses.
    pub fn is_bad(&self) -> bool {
        match &self.set {
            Ok(s) => s.genericity_ok && s.parity_violation(),
            Err(_) => true,
        }
    }
}

pub fn verify_trials(trials: usize, seed: u64, degree: u32, cfg: &SolverConfig) -> Result<Vec<TrialOutcome>> {
    // Surface bad degrees before spending time on trials.
    scenarios::random_odd_map(seed, degree)?;
    Ok(trial_seeds(seed, trials)
        .into_par_iter()
        .enumerate()
        .map(|(trial, s)| {
            let set = scenarios::random_odd_map(s, degree)
                .and_then(|f| find_coincidences(&f, cfg))
                .map_err(|e| e.to_string());
            TrialOutcome { trial, seed: s, set }
        })
        .collect())
}

fn parity_label(p: RegularValueParity) -> &'static str {
    match p {
        RegularValueParity::Even => "0",
        RegularValueParity::Odd => "1",
        RegularValueParity::Unknown => "?",
    }
}

pub fn run_verify(
    trials: usize,
    seed: u64,
    degree: u32,
    cfg: &SolverConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    if trials == 0 {
        return fail(stderr, &Error::InvalidArgument("trials must be at least 1".into()));
    }
    let outcomes = match verify_trials(trials, seed, degree, cfg) {
        Ok(o) => o,
        Err(e) => return fail(stderr, &e),
    };
    let result = (|| -> std::io::Result<bool> {
        writeln!(
            stdout,
            "{:>5}  {:>20}  {:>5}  {:>7}  {:>6}  {:>8}  {:>3}  {:>10}",
            "trial", "seed", "pairs", "generic", "parity", "idx_mod2", "rv", "consistent"
        )?;
        let mut all_ok = true;
        for o in &outcomes {
            match &o.set {
                Ok(s) => {
                    let c = &s.certificate;
                    writeln!(
                        stdout,
                        "{:>5}  {:>20}  {:>5}  {:>7}  {:>6}  {:>8}  {:>3}  {:>10}",
                        o.trial,
                        o.seed,
                        s.pair_count(),
                        s.genericity_ok,
                        if c.pair_count_odd { "odd" } else { "even" },
                        c.index_sum_mod2,
                        parity_label(c.regular_value_parity),
                        c.consistent
                    )?;
                }
                Err(e) => writeln!(stdout, "{:>5}  {:>20}  error: {e}", o.trial, o.seed)?,
            }
            all_ok &= !o.is_bad();
        }
        let generic = outcomes
            .iter()
            .filter(|o| matches!(&o.set, Ok(s) if s.genericity_ok))
            .count();
        let bad = outcomes.iter().filter(|o| o.is_bad()).count();
        writeln!(stdout, "{trials} trials, {generic} generic, {bad} failing")?;
        Ok(all_ok)
    })();
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => fail(stderr, &e.into()),
    }
}

pub fn run_list(stdout: &mut dyn Write) -> i32 {
    for s in scenarios::registry() {
        let expected = s.expected_pairs.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        if writeln!(stdout, "{:<20} {:>3}  {}", s.name, expected, s.description).is_err() {
            return EXIT_FAILURE;
        }
    }
    EXIT_OK
}

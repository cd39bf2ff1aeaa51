//! Sweeps the pitchfork family through its degenerate parameter and
//! localizes the split.

use antipodal::continuation::{detect_degenerate_crossing, linspace, sweep};
use antipodal::scenarios::pitchfork_family;
use antipodal::SolverConfig;

fn main() -> antipodal::Result<()> {
    let family = pitchfork_family(0.0, 0.0);
    let cfg = SolverConfig::default();
    let trace = sweep(&family, &linspace(-0.1, 0.1, 41), &cfg)?;
    for e in &trace.events {
        println!(
            "count {} -> {} between eps = {:.4} and {:.4}",
            e.count_before, e.count_after, e.eps_lo, e.eps_hi
        );
    }
    let crossing = detect_degenerate_crossing(&trace, &family, &cfg)?;
    println!("degenerate at eps = {:.2e}", crossing[0]);
    for b in &trace.branches {
        let first = b.points[0].representative.to_array();
        println!(
            "branch {} from eps = {:+.3} at {first:.3?}, {} points",
            b.id,
            b.points[0].epsilon,
            b.points.len()
        );
    }
    trace.write_csv(std::io::stdout().lock())?;
    Ok(())
}

//! Reads a map from JSON, solves it and writes the result as JSON.

use antipodal::cli::parse_map_json;
use antipodal::{find_coincidences, CoincidenceSet, SolverConfig};

const MAP: &str = r#"{
  "comp1": [[1.0, 3, 0, 0], [-0.5, 1, 0, 2], [0.3, 1, 0, 0], [2.0, 2, 0, 0]],
  "comp2": [[1.0, 0, 1, 0], [0.2, 0, 0, 3], [-1.0, 0, 0, 0]]
}"#;

fn main() -> antipodal::Result<()> {
    let family = parse_map_json(MAP)?;
    let set = find_coincidences(&family.current(), &SolverConfig::default())?;
    let json = serde_json::to_string_pretty(&set)?;
    println!("{json}");

    let back: CoincidenceSet = serde_json::from_str(&json)?;
    assert_eq!(back.recertify(), set.certificate);
    Ok(())
}

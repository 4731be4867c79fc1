//! London to New York through eight relay stations, with inter-satellite
//! links off and then on, compared side by side.

use leosim::engine::compare_runs;
use leosim::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    let results = ["simple_c1.toml", "simple_c2.toml"]
        .iter()
        .map(|f| Ok(run_scenario(&ScenarioConfig::from_file(&std::path::Path::new(dir).join(f))?)?))
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    print!("{}", compare_runs(&results)?.to_text());
    Ok(())
}

//! Builds one topology snapshot for London and New York over a 6 x 60 shell
//! and prints the shortest route with and without inter-satellite links.

use leosim::topology::{build_snapshot, LinkRules, Route};
use leosim::{build_constellation, ConstellationSpec, GeoPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sats = build_constellation(&ConstellationSpec::new(6, 60, 600.0))?;
    let ground = [GeoPoint::surface(51.5074, -0.1278)?, GeoPoint::surface(40.7128, -74.0060)?];
    for isl in [false, true] {
        let snap = build_snapshot(0.0, &sats, &ground, &LinkRules::new(isl, 25.0), 0.0);
        println!("ISL {}: {} nodes, {} edges", if isl { "on" } else { "off" }, snap.node_count(), snap.graph().edge_count());
        match snap.route(0, 1)? {
            Route::Unreachable => println!("  London -> New York unreachable"),
            Route::Path(path) => {
                let hops: Vec<String> = path
                    .iter()
                    .map(|&n| if n < ground.len() { format!("GS{n}") } else { sats[n - ground.len()].name.clone() })
                    .collect();
                println!("  {} ({:.3} ms one way)", hops.join(" -> "), snap.path_delay_ms(&path)?);
            }
        }
    }
    Ok(())
}

//! Parses a two-line element file and prints the orbit it describes.
//!
//! `cargo run --example parse_tle -- [path]` (defaults to the bundled NOAA 14 set).

use leosim::orbits::{elements_from_tle, parse_tle_file, propagate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/noaa14.tle").to_string());
    let text = std::fs::read_to_string(&path)?;
    for record in parse_tle_file(&text)? {
        let el = elements_from_tle(&record)?;
        println!("{} (#{})", record.name, record.satellite_number);
        println!(
            "  inclination {:.4}°  RAAN {:.4}°  e {:.7}  mean motion {:.8} rev/day  revolution {}",
            record.inclination_deg,
            record.raan_deg,
            record.eccentricity,
            record.mean_motion_rev_per_day,
            record.revolution_number
        );
        println!("  altitude {:.1} km, period {:.2} s", el.altitude_km(), el.period_s());
        let p = propagate(&el, 0.0)?;
        println!("  ECI at epoch: ({:.1}, {:.1}, {:.1}) km", p.x_km, p.y_km, p.z_km);
    }
    Ok(())
}

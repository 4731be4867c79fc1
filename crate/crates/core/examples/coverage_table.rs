//! Prints the footprint geometry for a 600 km shell at a 25° mask, then the
//! full coverage grid.

use leosim::geodesy::{DEFAULT_TABLE_ALTITUDES_KM, DEFAULT_TABLE_ELEVATIONS_DEG};
use leosim::{coverage_geometry, coverage_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = coverage_geometry(600.0, 25.0)?;
    println!(
        "600 km / 25°: nadir {:.2}°, central {:.2}°, slant {:.1} km, footprint radius {:.1} km, coverage {:.2}%",
        g.nadir_deg,
        g.central_deg,
        g.slant_range_km,
        g.footprint_radius_km,
        g.coverage_percent()
    );
    println!();
    let table = coverage_table(&DEFAULT_TABLE_ALTITUDES_KM, &DEFAULT_TABLE_ELEVATIONS_DEG)?;
    print!("{}", table.to_csv());
    Ok(())
}

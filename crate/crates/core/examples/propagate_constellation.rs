//! Builds a 6 x 60 Walker-Delta shell and tracks how many satellites London
//! sees above 25° over one orbital period.

use leosim::geodesy::{geodetic_to_eci, is_visible};
use leosim::orbits::{period_from_altitude, propagate};
use leosim::{build_constellation, ConstellationSpec, GeoPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ConstellationSpec::new(6, 60, 600.0);
    let sats = build_constellation(&spec)?;
    let london = GeoPoint::surface(51.5074, -0.1278)?;
    let period = period_from_altitude(spec.altitude_km)?;
    println!("{} satellites, period {:.1} s", sats.len(), period);
    let mut t = 0.0;
    while t < period {
        let gs = geodetic_to_eci(&london, t, 0.0);
        let mut visible = Vec::new();
        for s in &sats {
            if is_visible(&gs, &propagate(&s.elements, t)?, spec.min_elevation_deg)? {
                visible.push(s.name.as_str());
            }
        }
        println!("t = {:>6.0} s  visible {:>2}  {}", t, visible.len(), visible.join(" "));
        t += 300.0;
    }
    Ok(())
}

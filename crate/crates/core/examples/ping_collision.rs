//! Two co-located senders share a satellite. Sending at the same instant
//! loses the second ping; staggering by more than the channel occupancy
//! delivers both.

use leosim::orbits::OrbitalElements;
use leosim::topology::{build_snapshot, LinkRules};
use leosim::traffic::{transmit, ChannelParams, NodeChannels};
use leosim::GeoPoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Equatorial orbit, directly above (0°, 0°) at t = 0.
    let sat = leosim::orbits::Satellite {
        name: "SAT".into(),
        plane: 0,
        slot: 0,
        plane_size: 1,
        elements: OrbitalElements::circular(600.0, 0.0, 0.0, 0.0)?,
    };
    let ground = [
        GeoPoint::surface(0.0, 0.0)?,
        GeoPoint::surface(0.0, 0.001)?,
        GeoPoint::surface(0.0, 3.0)?,
    ];
    let snap = build_snapshot(0.0, &[sat], &ground, &LinkRules::new(false, 25.0), 0.0);
    let params = ChannelParams::default();
    for offset in [0.0, 0.002] {
        let mut channels = NodeChannels::new(snap.node_count());
        let a = transmit(0, 2, 0, 0.0, &snap, &mut channels, &params);
        let b = transmit(1, 2, 0, offset, &snap, &mut channels, &params);
        println!("second sender offset {:.3} s: A {:?}, B {:?}", offset, a.status, b.status);
    }
    Ok(())
}

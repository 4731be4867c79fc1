//! Orbital elements, Walker-style constellations and two-body circular
//! propagation.

mod tle;

pub use tle::{parse_tle, parse_tle_file, tle_checksum, TleError, TleLine, TleRecord};

use serde::Serialize;
use thiserror::Error;

use crate::geodesy::{EciPosition, EARTH_RADIUS_KM};

/// Standard gravitational parameter of the Earth.
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Orbits at or above this eccentricity are not propagated.
pub const MAX_CIRCULAR_ECCENTRICITY: f64 = 0.01;

/// Periods beyond this belong to deep-space objects.
pub const DEEP_SPACE_PERIOD_S: f64 = 225.0 * 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("orbit altitude must be > 0 km, got {0}")]
    InvalidAltitude(f64),
    #[error("eccentricity {0} is not supported by the circular propagator (must be < {MAX_CIRCULAR_ECCENTRICITY})")]
    UnsupportedEccentricity(f64),
    #[error("orbital period of {period_min:.1} min exceeds 225 min; deep-space objects are not supported")]
    DeepSpace { period_min: f64 },
    #[error("mean motion must be > 0 rev/day, got {0}")]
    InvalidMeanMotion(f64),
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),
}

/// Keplerian elements of one satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitalElements {
    pub semimajor_axis_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    /// Mean anomaly at `epoch_s`.
    pub mean_anomaly_deg: f64,
    pub mean_motion_rev_per_day: f64,
    pub epoch_s: f64,
}

impl OrbitalElements {
    /// Circular orbit at `altitude_km` with epoch at simulation time 0.
    pub fn circular(
        altitude_km: f64,
        inclination_deg: f64,
        raan_deg: f64,
        mean_anomaly_deg: f64,
    ) -> Result<Self, OrbitError> {
        if !(altitude_km.is_finite() && altitude_km > 0.0) {
            return Err(OrbitError::InvalidAltitude(altitude_km));
        }
        let a = EARTH_RADIUS_KM + altitude_km;
        Ok(Self {
            semimajor_axis_km: a,
            inclination_deg,
            raan_deg: normalize_deg(raan_deg),
            eccentricity: 0.0,
            arg_perigee_deg: 0.0,
            mean_anomaly_deg: normalize_deg(mean_anomaly_deg),
            mean_motion_rev_per_day: mean_motion_from_semimajor_axis(a),
            epoch_s: 0.0,
        })
    }

    pub fn altitude_km(&self) -> f64 {
        self.semimajor_axis_km - EARTH_RADIUS_KM
    }

    pub fn period_s(&self) -> f64 {
        SECONDS_PER_DAY / self.mean_motion_rev_per_day
    }

    /// Mean motion in rad/s.
    pub fn angular_rate(&self) -> f64 {
        self.mean_motion_rev_per_day * std::f64::consts::TAU / SECONDS_PER_DAY
    }
}

/// Wraps an angle into [0, 360).
pub fn normalize_deg(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Kepler's third law for a circular orbit at `altitude_km`.
pub fn period_from_altitude(altitude_km: f64) -> Result<f64, OrbitError> {
    if !(altitude_km.is_finite() && altitude_km > 0.0) {
        return Err(OrbitError::InvalidAltitude(altitude_km));
    }
    Ok(period_from_semimajor_axis(EARTH_RADIUS_KM + altitude_km))
}

pub fn period_from_semimajor_axis(a_km: f64) -> f64 {
    std::f64::consts::TAU * (a_km.powi(3) / EARTH_MU_KM3_S2).sqrt()
}

pub fn mean_motion_from_semimajor_axis(a_km: f64) -> f64 {
    SECONDS_PER_DAY / period_from_semimajor_axis(a_km)
}

pub fn semimajor_axis_from_mean_motion(rev_per_day: f64) -> Result<f64, OrbitError> {
    if !(rev_per_day.is_finite() && rev_per_day > 0.0) {
        return Err(OrbitError::InvalidMeanMotion(rev_per_day));
    }
    let n = rev_per_day * std::f64::consts::TAU / SECONDS_PER_DAY;
    Ok((EARTH_MU_KM3_S2 / (n * n)).cbrt())
}

/// Design parameters of a Walker-style constellation: `num_planes` planes
/// spread over `raan_spread_deg`, each with `sats_per_plane` equally phased
/// satellites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstellationSpec {
    pub num_planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_spread_deg: f64,
    pub phase_factor: u32,
    pub min_elevation_deg: f64,
}

impl ConstellationSpec {
    pub const DEFAULT_INCLINATION_DEG: f64 = 53.0;
    pub const DEFAULT_RAAN_SPREAD_DEG: f64 = 360.0;

    /// Walker-Delta defaults: 53° inclination, full RAAN spread, F = 0,
    /// 25° elevation mask.
    pub fn new(num_planes: u32, sats_per_plane: u32, altitude_km: f64) -> Self {
        Self {
            num_planes,
            sats_per_plane,
            altitude_km,
            inclination_deg: Self::DEFAULT_INCLINATION_DEG,
            raan_spread_deg: Self::DEFAULT_RAAN_SPREAD_DEG,
            phase_factor: 0,
            min_elevation_deg: 25.0,
        }
    }

    pub fn num_sats(&self) -> usize {
        self.num_planes as usize * self.sats_per_plane as usize
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        if self.num_planes == 0 || self.sats_per_plane == 0 {
            return Err(OrbitError::InvalidConstellation(format!(
                "need at least one plane and one satellite per plane, got {}x{}",
                self.num_planes, self.sats_per_plane
            )));
        }
        if !(self.altitude_km.is_finite() && self.altitude_km > 0.0) {
            return Err(OrbitError::InvalidAltitude(self.altitude_km));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(OrbitError::InvalidConstellation(format!(
                "inclination must lie in [0, 180] degrees, got {}",
                self.inclination_deg
            )));
        }
        if !(self.raan_spread_deg.is_finite() && self.raan_spread_deg > 0.0 && self.raan_spread_deg <= 360.0) {
            return Err(OrbitError::InvalidConstellation(format!(
                "raan spread must lie in (0, 360] degrees, got {}",
                self.raan_spread_deg
            )));
        }
        if !(0.0..=90.0).contains(&self.min_elevation_deg) {
            return Err(OrbitError::InvalidConstellation(format!(
                "minimum elevation must lie in [0, 90] degrees, got {}",
                self.min_elevation_deg
            )));
        }
        Ok(())
    }
}

/// A satellite with its place in the constellation.
///
/// Satellites loaded from TLE files have no known plane; each gets a plane
/// of its own so intra-plane links never form between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Satellite {
    pub name: String,
    pub plane: u32,
    pub slot: u32,
    /// Number of slots in this satellite's plane.
    pub plane_size: u32,
    pub elements: OrbitalElements,
}

/// Lays out `P·S` circular orbits. Plane `j` sits at RAAN `j·spread/P`;
/// slot `k` of plane `j` starts at mean anomaly `k·360/S + j·F·360/(P·S)`.
pub fn build_constellation(spec: &ConstellationSpec) -> Result<Vec<Satellite>, OrbitError> {
    spec.validate()?;
    let planes = spec.num_planes as f64;
    let per_plane = spec.sats_per_plane as f64;
    let total = planes * per_plane;
    let mut sats = Vec::with_capacity(spec.num_sats());
    for j in 0..spec.num_planes {
        let raan = j as f64 * spec.raan_spread_deg / planes;
        for k in 0..spec.sats_per_plane {
            let anomaly = k as f64 * 360.0 / per_plane + (j as f64) * (spec.phase_factor as f64) * 360.0 / total;
            sats.push(Satellite {
                name: format!("sat[{}]", sats.len()),
                plane: j,
                slot: k,
                plane_size: spec.sats_per_plane,
                elements: OrbitalElements::circular(spec.altitude_km, spec.inclination_deg, raan, anomaly)?,
            });
        }
    }
    Ok(sats)
}

/// Position at simulation time `t_s` under two-body circular motion.
pub fn propagate(el: &OrbitalElements, t_s: f64) -> Result<EciPosition, OrbitError> {
    if !(0.0..MAX_CIRCULAR_ECCENTRICITY).contains(&el.eccentricity) {
        return Err(OrbitError::UnsupportedEccentricity(el.eccentricity));
    }
    Ok(position_at(el, t_s))
}

/// Unchecked propagation; callers have validated the eccentricity.
pub(crate) fn position_at(el: &OrbitalElements, t_s: f64) -> EciPosition {
    let a = el.semimajor_axis_km;
    // argument of latitude: perigee + anomaly advanced along the circle
    let u = (el.arg_perigee_deg + el.mean_anomaly_deg).to_radians() + el.angular_rate() * (t_s - el.epoch_s);
    let (x_orb, y_orb) = (a * u.cos(), a * u.sin());

    let (sin_i, cos_i) = el.inclination_deg.to_radians().sin_cos();
    let (y_inc, z_inc) = (y_orb * cos_i, y_orb * sin_i);

    let (sin_o, cos_o) = el.raan_deg.to_radians().sin_cos();
    EciPosition::new(x_orb * cos_o - y_inc * sin_o, x_orb * sin_o + y_inc * cos_o, z_inc, t_s)
}

/// Elements for a parsed TLE. The TLE epoch becomes simulation time 0.
pub fn elements_from_tle(record: &TleRecord) -> Result<OrbitalElements, OrbitError> {
    let a = semimajor_axis_from_mean_motion(record.mean_motion_rev_per_day)?;
    let period = SECONDS_PER_DAY / record.mean_motion_rev_per_day;
    if period > DEEP_SPACE_PERIOD_S {
        return Err(OrbitError::DeepSpace {
            period_min: period / 60.0,
        });
    }
    Ok(OrbitalElements {
        semimajor_axis_km: a,
        inclination_deg: record.inclination_deg,
        raan_deg: normalize_deg(record.raan_deg),
        eccentricity: record.eccentricity,
        arg_perigee_deg: normalize_deg(record.arg_perigee_deg),
        mean_anomaly_deg: normalize_deg(record.mean_anomaly_deg),
        mean_motion_rev_per_day: record.mean_motion_rev_per_day,
        epoch_s: 0.0,
    })
}

/// One satellite per TLE record, each in its own plane.
pub fn satellites_from_tles(records: &[TleRecord]) -> Result<Vec<Satellite>, OrbitError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Satellite {
                name: if r.name.is_empty() {
                    format!("{:05}", r.satellite_number)
                } else {
                    r.name.clone()
                },
                plane: i as u32,
                slot: 0,
                plane_size: 1,
                elements: elements_from_tle(r)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::{dot, norm, sub};

    #[test]
    fn kepler_periods() {
        // direct oracle: 2π·sqrt(a³/μ)
        let a: f64 = 6378.0 + 600.0;
        let oracle = 2.0 * std::f64::consts::PI * (a * a * a / 398_600.441_8).sqrt();
        let t = period_from_altitude(600.0).unwrap();
        assert_eq!(t, oracle);
        assert!((t - 5801.06).abs() < 0.01);
        let geo = period_from_altitude(35786.0).unwrap();
        // sidereal day, 23 h 56 min 4 s
        assert!((geo - 86164.0).abs() < 1.0, "{geo}");
        assert_eq!(period_from_altitude(0.0), Err(OrbitError::InvalidAltitude(0.0)));
    }

    #[test]
    fn period_scales_with_three_halves_power() {
        let t1 = period_from_semimajor_axis(EARTH_RADIUS_KM);
        let t4 = period_from_semimajor_axis(EARTH_RADIUS_KM * 4f64.cbrt());
        assert!((t4 / t1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_motion_inverse() {
        for h in [200.0, 600.0, 1200.0, 5000.0] {
            let a = EARTH_RADIUS_KM + h;
            let back = semimajor_axis_from_mean_motion(mean_motion_from_semimajor_axis(a)).unwrap();
            assert!((back - a).abs() / a < 1e-9);
        }
    }

    #[test]
    fn constellation_layout() {
        let sats = build_constellation(&ConstellationSpec::new(6, 60, 600.0)).unwrap();
        assert_eq!(sats.len(), 360);
        assert_eq!(sats[60].elements.raan_deg, 60.0);
        assert!((sats[1].elements.mean_anomaly_deg - 6.0).abs() < 1e-12);
        assert_eq!((sats[61].plane, sats[61].slot), (1, 1));

        assert_eq!(build_constellation(&ConstellationSpec::new(15, 10, 600.0)).unwrap().len(), 150);

        let one = build_constellation(&ConstellationSpec::new(1, 1, 550.0)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].elements.raan_deg, 0.0);
        assert_eq!(one[0].elements.mean_anomaly_deg, 0.0);

        assert!(build_constellation(&ConstellationSpec::new(0, 5, 600.0)).is_err());
    }

    #[test]
    fn phase_factor_offsets_planes() {
        let mut spec = ConstellationSpec::new(3, 4, 600.0);
        spec.phase_factor = 1;
        let sats = build_constellation(&spec).unwrap();
        // j·F·360/(P·S) = 30° per plane
        assert!((sats[4].elements.mean_anomaly_deg - 30.0).abs() < 1e-12);
        assert!((sats[8].elements.mean_anomaly_deg - 60.0).abs() < 1e-12);
        assert!((sats[11].elements.mean_anomaly_deg - 330.0).abs() < 1e-12);
    }

    #[test]
    fn in_plane_structure() {
        let sats = build_constellation(&ConstellationSpec::new(5, 7, 600.0)).unwrap();
        for plane in sats.chunks(7) {
            for s in plane {
                assert_eq!(s.elements.raan_deg, plane[0].elements.raan_deg);
                assert_eq!(s.elements.inclination_deg, plane[0].elements.inclination_deg);
            }
            for w in plane.windows(2) {
                let gap = normalize_deg(w[1].elements.mean_anomaly_deg - w[0].elements.mean_anomaly_deg);
                assert!((gap - 360.0 / 7.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn epoch_position_and_periodicity() {
        let el = OrbitalElements::circular(600.0, 53.0, 40.0, 0.0).unwrap();
        let p0 = propagate(&el, 0.0).unwrap();
        // mean anomaly 0 sits on the ascending node
        let node = 40f64.to_radians();
        assert!((p0.x_km - el.semimajor_axis_km * node.cos()).abs() < 1e-9);
        assert!((p0.y_km - el.semimajor_axis_km * node.sin()).abs() < 1e-9);
        assert!(p0.z_km.abs() < 1e-9);

        let p1 = propagate(&el, el.period_s()).unwrap();
        assert!(p0.distance_km(&p1) < 1e-6);
    }

    #[test]
    fn quarter_period_is_quarter_turn() {
        let el = OrbitalElements::circular(600.0, 53.0, 75.0, 20.0).unwrap();
        let p0 = propagate(&el, 0.0).unwrap().as_array();
        let pq = propagate(&el, el.period_s() / 4.0).unwrap().as_array();
        // oracle: orbit normal h = p0 × v0 direction; rotating p0 by +90°
        // about h gives ĥ × p0.
        let eps = 1e-3;
        let pe = propagate(&el, eps).unwrap().as_array();
        let v = sub(pe, p0);
        let h = cross(p0, v);
        let hn = norm(h);
        let h_hat = [h[0] / hn, h[1] / hn, h[2] / hn];
        let expect = cross(h_hat, p0);
        assert!(norm(sub(expect, pq)) < 1e-6, "{:?} vs {:?}", expect, pq);
    }

    fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    #[test]
    fn rejects_elliptical() {
        let mut el = OrbitalElements::circular(600.0, 53.0, 0.0, 0.0).unwrap();
        el.eccentricity = 0.01;
        assert_eq!(propagate(&el, 0.0), Err(OrbitError::UnsupportedEccentricity(0.01)));
        el.eccentricity = 0.0009;
        assert!(propagate(&el, 0.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn radius_conserved_and_velocity_orthogonal(
                h in 200.0..2000.0f64,
                inc in 0.0..180.0f64,
                raan in 0.0..360.0f64,
                m in 0.0..360.0f64,
                t in 0.0..200_000.0f64,
            ) {
                let el = OrbitalElements::circular(h, inc, raan, m).unwrap();
                let p = propagate(&el, t).unwrap();
                prop_assert!((p.norm_km() - el.semimajor_axis_km).abs() / el.semimajor_axis_km < 1e-9);
                let dt = 1e-3;
                let a = propagate(&el, t - dt).unwrap().as_array();
                let b = propagate(&el, t + dt).unwrap().as_array();
                let v = sub(b, a);
                let cos = dot(p.as_array(), v) / (p.norm_km() * norm(v));
                let angle = cos.clamp(-1.0, 1.0).acos().to_degrees();
                prop_assert!((angle - 90.0).abs() < 1e-3, "angle {}", angle);
            }
        }
    }
}

//! Spherical-Earth geometry: ground coordinates, inertial positions,
//! line-of-sight elevation and the satellite footprint relations.
//!
//! The Earth is a sphere of radius [`EARTH_RADIUS_KM`]. No flattening, no
//! refraction, no terrain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used throughout the simulator.
pub const EARTH_RADIUS_KM: f64 = 6378.0;

/// Sidereal rotation rate of the Earth.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// Speed of light in vacuum.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Default coverage table grid.
pub const DEFAULT_TABLE_ALTITUDES_KM: [f64; 8] = [160.0, 500.0, 600.0, 700.0, 800.0, 900.0, 1000.0, 1500.0];
pub const DEFAULT_TABLE_ELEVATIONS_DEG: [f64; 8] = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 25.0, 40.0];

/// Separation below which an elevation angle is meaningless (1 m).
const MIN_SEPARATION_KM: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesyError {
    #[error("satellite altitude must be > 0 km, got {0}")]
    InvalidAltitude(f64),
    #[error("elevation angle must lie in [0, 90] degrees, got {0}")]
    InvalidElevation(f64),
    #[error("latitude must lie in [-90, 90] degrees, got {0}")]
    InvalidLatitude(f64),
    #[error("longitude must lie in [-180, 180] degrees, got {0}")]
    InvalidLongitude(f64),
    #[error("ground altitude must be finite and >= 0 m, got {0}")]
    InvalidGroundAltitude(f64),
    #[error("satellite and ground station are {0} km apart; elevation undefined")]
    Degenerate(f64),
    #[error("coverage table needs at least one altitude and one elevation")]
    EmptyGrid,
}

/// A geodetic position on (or above) the spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
}

impl GeoPoint {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self, GeodesyError> {
        if !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(GeodesyError::InvalidLatitude(latitude_deg));
        }
        if !(-180.0..=180.0).contains(&longitude_deg) {
            return Err(GeodesyError::InvalidLongitude(longitude_deg));
        }
        if !altitude_m.is_finite() || altitude_m < 0.0 {
            return Err(GeodesyError::InvalidGroundAltitude(altitude_m));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg,
            altitude_m,
        })
    }

    /// Surface point (altitude 0).
    pub fn surface(latitude_deg: f64, longitude_deg: f64) -> Result<Self, GeodesyError> {
        Self::new(latitude_deg, longitude_deg, 0.0)
    }
}

/// Position in the Earth-centred inertial frame, kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EciPosition {
    pub x_km: f64,
    pub y_km: f64,
    pub z_km: f64,
    pub epoch_s: f64,
}

impl EciPosition {
    pub fn new(x_km: f64, y_km: f64, z_km: f64, epoch_s: f64) -> Self {
        Self {
            x_km,
            y_km,
            z_km,
            epoch_s,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x_km, self.y_km, self.z_km]
    }

    pub fn norm_km(&self) -> f64 {
        norm(self.as_array())
    }

    pub fn distance_km(&self, other: &EciPosition) -> f64 {
        norm(sub(other.as_array(), self.as_array()))
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// The footprint variables of a satellite at altitude `H` seen at the
/// minimum elevation `ε₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageGeometry {
    pub altitude_km: f64,
    /// ε₀
    pub elevation_deg: f64,
    /// α₀
    pub nadir_deg: f64,
    /// β₀
    pub central_deg: f64,
    /// d, ground station to satellite at the footprint edge.
    pub slant_range_km: f64,
    /// h, height of the spherical cap under the footprint.
    pub cap_height_km: f64,
    /// Footprint area over the whole Earth surface, in [0, 0.5].
    pub coverage_fraction: f64,
    /// Arc radius of the footprint on the surface.
    pub footprint_radius_km: f64,
}

impl CoverageGeometry {
    pub fn orbit_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    pub fn coverage_percent(&self) -> f64 {
        self.coverage_fraction * 100.0
    }
}

/// Footprint geometry for a satellite at `altitude_km` and a ground
/// elevation mask of `elevation_deg`.
pub fn coverage_geometry(altitude_km: f64, elevation_deg: f64) -> Result<CoverageGeometry, GeodesyError> {
    if !(altitude_km.is_finite() && altitude_km > 0.0) {
        return Err(GeodesyError::InvalidAltitude(altitude_km));
    }
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(GeodesyError::InvalidElevation(elevation_deg));
    }
    let re = EARTH_RADIUS_KM;
    let r = re + altitude_km;
    let eps = elevation_deg.to_radians();

    // sin α₀ = Rₑ / (Rₑ + H) · cos ε₀
    let nadir = (re / r * eps.cos()).clamp(-1.0, 1.0).asin();
    // ε₀ + α₀ + β₀ = 90°, evaluated in degrees so the identity holds exactly.
    let nadir_deg = nadir.to_degrees();
    let central_deg = (90.0 - elevation_deg - nadir_deg).max(0.0);
    let central = central_deg.to_radians();

    // r² = Rₑ² + d² − 2·Rₑ·d·cos(90° + ε₀), positive root.
    let sin_eps = eps.sin();
    let slant = -re * sin_eps + (re * re * sin_eps * sin_eps + r * r - re * re).sqrt();

    let cap_height = re * (1.0 - central.cos());
    let coverage_fraction = 0.5 * (1.0 - central.cos());

    Ok(CoverageGeometry {
        altitude_km,
        elevation_deg,
        nadir_deg,
        central_deg,
        slant_range_km: slant,
        cap_height_km: cap_height,
        coverage_fraction,
        footprint_radius_km: re * central,
    })
}

/// Coverage percentages over an altitude × elevation grid. Rows follow
/// `altitudes_km`, columns follow `elevations_deg`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageTable {
    pub altitudes_km: Vec<f64>,
    pub elevations_deg: Vec<f64>,
    pub percent: Vec<Vec<f64>>,
}

impl CoverageTable {
    /// Cell value rounded to two decimals, as displayed.
    pub fn display_cell(&self, row: usize, col: usize) -> String {
        format!("{:.2}", self.percent[row][col])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("altitude_km");
        for e in &self.elevations_deg {
            out.push(',');
            out.push_str(&e.to_string());
        }
        out.push('\n');
        for (i, h) in self.altitudes_km.iter().enumerate() {
            out.push_str(&h.to_string());
            for j in 0..self.elevations_deg.len() {
                out.push(',');
                out.push_str(&self.display_cell(i, j));
            }
            out.push('\n');
        }
        out
    }
}

pub fn coverage_table(altitudes_km: &[f64], elevations_deg: &[f64]) -> Result<CoverageTable, GeodesyError> {
    if altitudes_km.is_empty() || elevations_deg.is_empty() {
        return Err(GeodesyError::EmptyGrid);
    }
    let percent = altitudes_km
        .iter()
        .map(|&h| {
            elevations_deg
                .iter()
                .map(|&e| coverage_geometry(h, e).map(|g| g.coverage_percent()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoverageTable {
        altitudes_km: altitudes_km.to_vec(),
        elevations_deg: elevations_deg.to_vec(),
        percent,
    })
}

/// Haversine arc length on the sphere of radius [`EARTH_RADIUS_KM`].
/// Altitudes are ignored.
pub fn great_circle_distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lat2) = (a.latitude_deg.to_radians(), b.latitude_deg.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.longitude_deg - a.longitude_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Earth-fixed position rotated into the inertial frame at simulation time
/// `t_s`. The rotation phase is `θ₀ + ω_e·t`.
pub fn geodetic_to_eci(p: &GeoPoint, t_s: f64, theta0_deg: f64) -> EciPosition {
    let r = EARTH_RADIUS_KM + p.altitude_m / 1000.0;
    let lat = p.latitude_deg.to_radians();
    let lon = p.longitude_deg.to_radians();
    let theta = theta0_deg.to_radians() + EARTH_ROTATION_RAD_S * t_s;
    // Rotating the longitude is the same as rotating the ECEF vector about z.
    let lon_inertial = lon + theta;
    EciPosition::new(
        r * lat.cos() * lon_inertial.cos(),
        r * lat.cos() * lon_inertial.sin(),
        r * lat.sin(),
        t_s,
    )
}

/// Angle of `sat` above the local horizon of the ground station `gs`, in
/// degrees within [−90, 90].
pub fn elevation_angle(gs: &EciPosition, sat: &EciPosition) -> Result<f64, GeodesyError> {
    let gs_v = gs.as_array();
    let los = sub(sat.as_array(), gs_v);
    let range = norm(los);
    if range < MIN_SEPARATION_KM {
        return Err(GeodesyError::Degenerate(range));
    }
    // atan2 of the radial and horizontal components stays accurate near zenith.
    let up = norm(gs_v);
    let radial = dot(gs_v, los) / up;
    let horizontal = norm(cross(gs_v, los)) / up;
    Ok(radial.atan2(horizontal).to_degrees())
}

/// Closed threshold: a satellite exactly at the mask counts as visible.
pub fn is_visible(gs: &EciPosition, sat: &EciPosition, min_elevation_deg: f64) -> Result<bool, GeodesyError> {
    Ok(elevation_angle(gs, sat)? >= min_elevation_deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE_ALTITUDES: [f64; 8] = DEFAULT_TABLE_ALTITUDES_KM;
    const TABLE_ELEVATIONS: [f64; 8] = DEFAULT_TABLE_ELEVATIONS_DEG;

    #[test]
    fn table_anchor_cells() {
        let g = coverage_geometry(600.0, 25.0).unwrap();
        assert!((g.coverage_fraction - 0.0062).abs() < 0.0001);
        assert!((g.footprint_radius_km - 1008.0).abs() < 8.0, "{}", g.footprint_radius_km);
        let g0 = coverage_geometry(600.0, 0.0).unwrap();
        assert_eq!(format!("{:.2}", g0.coverage_percent()), "4.30");
    }

    #[test]
    fn nadir_only_geometry() {
        let g = coverage_geometry(750.0, 90.0).unwrap();
        assert!(g.nadir_deg.abs() < 1e-12);
        assert!(g.central_deg.abs() < 1e-12);
        assert_eq!(g.coverage_fraction, 0.0);
        assert!((g.slant_range_km - 750.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_domain() {
        assert_eq!(coverage_geometry(0.0, 10.0), Err(GeodesyError::InvalidAltitude(0.0)));
        assert_eq!(coverage_geometry(600.0, -1.0), Err(GeodesyError::InvalidElevation(-1.0)));
        assert_eq!(coverage_geometry(600.0, 90.5), Err(GeodesyError::InvalidElevation(90.5)));
        assert_eq!(coverage_table(&[], &[1.0]), Err(GeodesyError::EmptyGrid));
        assert!(GeoPoint::new(91.0, 0.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -181.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn angle_identity_and_residuals_on_table_grid() {
        for &h in &TABLE_ALTITUDES {
            for &e in &TABLE_ELEVATIONS {
                let g = coverage_geometry(h, e).unwrap();
                assert!((g.elevation_deg + g.nadir_deg + g.central_deg - 90.0).abs() < 1e-9);
                let r = g.orbit_radius_km();
                let d = g.slant_range_km;
                let (eps, alpha, beta) = (e.to_radians(), g.nadir_deg.to_radians(), g.central_deg.to_radians());
                // d·cos ε₀ = r·sin β₀
                let lhs = d * eps.cos();
                assert!((lhs - r * beta.sin()).abs() <= 1e-9 * lhs.abs().max(1.0));
                // d·sin α₀ = Rₑ·sin β₀
                let lhs = d * alpha.sin();
                assert!((lhs - EARTH_RADIUS_KM * beta.sin()).abs() <= 1e-9 * lhs.abs().max(1.0));
                // law of cosines
                let rhs = EARTH_RADIUS_KM.powi(2) + d * d
                    - 2.0 * EARTH_RADIUS_KM * d * (std::f64::consts::FRAC_PI_2 + eps).cos();
                assert!((r * r - rhs).abs() <= 1e-9 * r * r);
            }
        }
    }

    #[test]
    fn monotone_over_grid() {
        let t = coverage_table(&TABLE_ALTITUDES, &TABLE_ELEVATIONS).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if j + 1 < 8 {
                    assert!(t.percent[i][j] > t.percent[i][j + 1]);
                }
                if i + 1 < 8 {
                    assert!(t.percent[i][j] < t.percent[i + 1][j]);
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let t = coverage_table(&[1500.0, 160.0, 600.0], &[0.0, 40.0, 90.0]).unwrap();
        let csv = t.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "altitude_km,0,40,90");
        assert!(lines[1].starts_with("1500,9.52,"));
        assert_eq!(lines[2].split(',').nth(2), Some("0.02"));
        assert!(lines[3].ends_with(",0.00"));
    }

    #[test]
    fn eci_fixed_points() {
        let p = geodetic_to_eci(&GeoPoint::surface(0.0, 0.0).unwrap(), 0.0, 0.0);
        assert!((p.x_km - EARTH_RADIUS_KM).abs() < 1e-9 && p.y_km.abs() < 1e-9 && p.z_km.abs() < 1e-9);
        for t in [0.0, 1234.5, 86400.0] {
            let pole = geodetic_to_eci(&GeoPoint::surface(90.0, 37.0).unwrap(), t, 12.0);
            assert!(pole.x_km.abs() < 1e-9 && pole.y_km.abs() < 1e-9);
            assert!((pole.z_km - EARTH_RADIUS_KM).abs() < 1e-9);
        }
        let east = geodetic_to_eci(&GeoPoint::surface(0.0, 90.0).unwrap(), 0.0, 0.0);
        assert!(east.x_km.abs() < 1e-9 && (east.y_km - EARTH_RADIUS_KM).abs() < 1e-9);
        // a quarter sidereal rotation carries lon 0 to the +y axis
        let quarter = std::f64::consts::FRAC_PI_2 / EARTH_ROTATION_RAD_S;
        let q = geodetic_to_eci(&GeoPoint::surface(0.0, 0.0).unwrap(), quarter, 0.0);
        assert!(q.x_km.abs() < 1e-6 && (q.y_km - EARTH_RADIUS_KM).abs() < 1e-6);
    }

    #[test]
    fn elevation_cases() {
        let gs = EciPosition::new(EARTH_RADIUS_KM, 0.0, 0.0, 0.0);
        for h in [1.0, 600.0, 35786.0] {
            let sat = EciPosition::new(EARTH_RADIUS_KM + h, 0.0, 0.0, 0.0);
            assert!((elevation_angle(&gs, &sat).unwrap() - 90.0).abs() < 1e-9);
            assert!(is_visible(&gs, &sat, 25.0).unwrap());
        }
        let tangent = EciPosition::new(EARTH_RADIUS_KM, 10.0, 0.0, 0.0);
        assert!(elevation_angle(&gs, &tangent).unwrap().abs() < 1e-9);

        let below = EciPosition::new(-EARTH_RADIUS_KM - 600.0, 0.0, 0.0, 0.0);
        assert!(!is_visible(&gs, &below, 0.0).unwrap());

        let same = EciPosition::new(EARTH_RADIUS_KM, 0.0, 0.0005, 0.0);
        assert!(matches!(elevation_angle(&gs, &same), Err(GeodesyError::Degenerate(_))));
    }

    #[test]
    fn elevation_inverts_coverage_geometry() {
        let g = coverage_geometry(600.0, 25.0).unwrap();
        let beta = g.central_deg.to_radians();
        let r = g.orbit_radius_km();
        let gs = EciPosition::new(EARTH_RADIUS_KM, 0.0, 0.0, 0.0);
        let sat = EciPosition::new(r * beta.cos(), r * beta.sin(), 0.0, 0.0);
        let el = elevation_angle(&gs, &sat).unwrap();
        assert!((el - 25.0).abs() < 1e-6, "{el}");
        assert!((gs.distance_km(&sat) - g.slant_range_km).abs() < 1e-6);
    }

    #[test]
    fn closed_visibility_threshold() {
        let g = coverage_geometry(600.0, 25.0).unwrap();
        let beta = g.central_deg.to_radians();
        let r = g.orbit_radius_km();
        let gs = EciPosition::new(EARTH_RADIUS_KM, 0.0, 0.0, 0.0);
        let sat = EciPosition::new(r * beta.cos(), r * beta.sin(), 0.0, 0.0);
        let el = elevation_angle(&gs, &sat).unwrap();
        // exactly at the mask, whatever rounding produced
        assert!(is_visible(&gs, &sat, el).unwrap());
        assert!(!is_visible(&gs, &sat, el + 1e-9).unwrap());
    }

    #[test]
    fn distance_fixtures() {
        let london = GeoPoint::surface(51.5074, -0.1278).unwrap();
        let new_york = GeoPoint::surface(40.7128, -74.0060).unwrap();
        let sw_ireland = GeoPoint::surface(51.75, -9.6582).unwrap();
        assert_eq!(great_circle_distance(&london, &london), 0.0);
        let d = great_circle_distance(&london, &new_york);
        assert!((d - 5571.97).abs() / 5571.97 < 1e-3, "{d}");
        let d = great_circle_distance(&london, &sw_ireland);
        assert!((d - 658.64).abs() < 0.1, "{d}");
        let antipode = GeoPoint::surface(-51.5074, 179.8722).unwrap();
        let d = great_circle_distance(&london, &antipode);
        assert!((d - EARTH_RADIUS_KM * std::f64::consts::PI).abs() < 1e-6);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = GeoPoint> {
            (-90.0..=90.0f64, -180.0..=180.0f64).prop_map(|(la, lo)| GeoPoint::surface(la, lo).unwrap())
        }

        proptest! {
            #[test]
            fn symmetric_and_triangle(a in point(), b in point(), c in point()) {
                let ab = great_circle_distance(&a, &b);
                prop_assert!((ab - great_circle_distance(&b, &a)).abs() < 1e-9);
                let ac = great_circle_distance(&a, &c);
                let cb = great_circle_distance(&c, &b);
                prop_assert!(ab <= ac + cb + 1e-6);
            }

            #[test]
            fn zenith_is_ninety(p in point(), t in 0.0..86400.0f64, h in 0.01..40000.0f64) {
                let gs = geodetic_to_eci(&p, t, 0.0);
                let k = (EARTH_RADIUS_KM + h) / gs.norm_km();
                let sat = EciPosition::new(gs.x_km * k, gs.y_km * k, gs.z_km * k, t);
                prop_assert!((elevation_angle(&gs, &sat).unwrap() - 90.0).abs() < 1e-6);
            }

            #[test]
            fn eci_radius_preserved(p in point(), t in 0.0..1e6f64) {
                let e = geodetic_to_eci(&p, t, 33.0);
                prop_assert!((e.norm_km() - EARTH_RADIUS_KM).abs() < 1e-9);
            }
        }
    }
}

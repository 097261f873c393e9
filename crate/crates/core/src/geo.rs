//! GPS fixes and great-circle distance.

use serde::{Deserialize, Serialize};

/// Mean Earth radius used by [`haversine_m`].
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

pub const MAX_LAT_E7: i32 = 900_000_000;
pub const MAX_LON_E7: i32 = 1_800_000_000;

/// A GPS fix with coordinates stored as degrees × 1e7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GpsFix {
    pub lat_e7: i32,
    pub lon_e7: i32,
    pub timestamp_ms: u64,
}

impl GpsFix {
    pub fn new(lat_e7: i32, lon_e7: i32, timestamp_ms: u64) -> Self {
        Self {
            lat_e7,
            lon_e7,
            timestamp_ms,
        }
    }

    /// Builds a fix from decimal degrees, rounding to the nearest 1e-7 degree.
    pub fn from_degrees(lat: f64, lon: f64, timestamp_ms: u64) -> Self {
        Self {
            lat_e7: (lat * 1e7).round() as i32,
            lon_e7: (lon * 1e7).round() as i32,
            timestamp_ms,
        }
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_e7 as f64 / 1e7
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_e7 as f64 / 1e7
    }

    pub fn is_valid(&self) -> bool {
        self.lat_e7.unsigned_abs() <= MAX_LAT_E7 as u32 && self.lon_e7.unsigned_abs() <= MAX_LON_E7 as u32
    }

    pub fn with_timestamp(self, timestamp_ms: u64) -> Self {
        Self {
            timestamp_ms,
            ..self
        }
    }
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
///
/// Timestamps are ignored.
pub fn haversine_m(a: &GpsFix, b: &GpsFix) -> f64 {
    if a.lat_e7 == b.lat_e7 && a.lon_e7 == b.lon_e7 {
        return 0.0;
    }
    let (lat1, lat2) = (a.lat_deg().to_radians(), b.lat_deg().to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon_deg() - a.lon_deg()).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Spherical law of cosines, used as an independent route.
    fn cosine_law_m(a: &GpsFix, b: &GpsFix) -> f64 {
        let (p1, p2) = (a.lat_deg().to_radians(), b.lat_deg().to_radians());
        let dl = (b.lon_deg() - a.lon_deg()).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_M * c.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn identical_points_are_zero() {
        let a = GpsFix::from_degrees(48.8566, 2.3522, 5);
        assert_eq!(haversine_m(&a, &a.with_timestamp(99)), 0.0);
    }

    #[test]
    fn paris_short_hop() {
        let a = GpsFix::from_degrees(48.8566, 2.3522, 0);
        let b = GpsFix::from_degrees(48.8570, 2.3522, 0);
        // 0.0004 degrees of latitude on R = 6371 km.
        let oracle = 0.0004_f64.to_radians() * EARTH_RADIUS_M;
        assert!((oracle - 44.478).abs() < 0.01);
        assert!((haversine_m(&a, &b) - 44.5).abs() < 0.5);
        assert!((haversine_m(&a, &b) - oracle).abs() < 1e-6);
    }

    #[test]
    fn antipodal() {
        let a = GpsFix::from_degrees(0.0, 0.0, 0);
        let b = GpsFix::from_degrees(0.0, 180.0, 0);
        let d = haversine_m(&a, &b);
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 100.0);
        assert!((d - 20_015_087.0).abs() < 100.0);
    }

    #[test]
    fn validity_bounds() {
        assert!(GpsFix::new(MAX_LAT_E7, -MAX_LON_E7, 0).is_valid());
        assert!(!GpsFix::new(MAX_LAT_E7 + 1, 0, 0).is_valid());
        assert!(!GpsFix::new(0, i32::MIN, 0).is_valid());
    }

    fn fix() -> impl Strategy<Value = GpsFix> {
        (-MAX_LAT_E7..=MAX_LAT_E7, -MAX_LON_E7..=MAX_LON_E7).prop_map(|(la, lo)| GpsFix::new(la, lo, 0))
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(a in fix(), b in fix()) {
            let (ab, ba) = (haversine_m(&a, &b), haversine_m(&b, &a));
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-6 * ab.max(1.0));
        }

        #[test]
        fn triangle_inequality(a in fix(), b in fix(), c in fix()) {
            let ac = haversine_m(&a, &c);
            let via = haversine_m(&a, &b) + haversine_m(&b, &c);
            prop_assert!(ac <= via * (1.0 + 1e-6) + 1e-6);
        }

        #[test]
        fn agrees_with_cosine_law(a in fix(), b in fix()) {
            let h = haversine_m(&a, &b);
            // The cosine law loses precision for short arcs.
            prop_assume!(h > 1_000.0);
            prop_assert!((h - cosine_law_m(&a, &b)).abs() < 1.0);
        }
    }
}

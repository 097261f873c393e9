use serde::{Deserialize, Serialize};

use crate::geo::GpsFix;
use crate::model::{Detection, DetectionKind, Observation};

use super::StoreError;

/// Inclusive latitude/longitude rectangle in 1e-7 degree units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoBox {
    pub min_lat_e7: i32,
    pub min_lon_e7: i32,
    pub max_lat_e7: i32,
    pub max_lon_e7: i32,
}

impl GeoBox {
    pub const WORLD: GeoBox = GeoBox {
        min_lat_e7: -900_000_000,
        min_lon_e7: -1_800_000_000,
        max_lat_e7: 900_000_000,
        max_lon_e7: 1_800_000_000,
    };

    pub fn from_degrees(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Self {
        let e7 = |d: f64| (d * 1e7).round() as i32;
        Self {
            min_lat_e7: e7(min_lat),
            min_lon_e7: e7(min_lon),
            max_lat_e7: e7(max_lat),
            max_lon_e7: e7(max_lon),
        }
    }

    /// Parses `minLat,minLon,maxLat,maxLon` in degrees.
    pub fn parse(s: &str) -> Result<Self, StoreError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| StoreError::BadFilter(format!("bbox {s:?} is not four numbers")))?;
        match parts[..] {
            [a, b, c, d] if parts.iter().all(|v| v.is_finite()) => Ok(Self::from_degrees(a, b, c, d)),
            _ => Err(StoreError::BadFilter(format!("bbox {s:?} is not four numbers"))),
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.min_lat_e7 <= self.max_lat_e7 && self.min_lon_e7 <= self.max_lon_e7
    }

    pub fn contains(&self, fix: &GpsFix) -> bool {
        (self.min_lat_e7..=self.max_lat_e7).contains(&fix.lat_e7)
            && (self.min_lon_e7..=self.max_lon_e7).contains(&fix.lon_e7)
    }
}

/// Conjunction of optional predicates. Time bounds are inclusive and apply
/// to `detected_at_ms`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionFilter {
    pub kind: Option<DetectionKind>,
    pub value: Option<Observation>,
    pub t_from: Option<u64>,
    pub t_to: Option<u64>,
    pub bbox: Option<GeoBox>,
}

impl DetectionFilter {
    /// Builds a filter from query-string style parts. A value needs a kind
    /// to be interpreted.
    pub fn parse(
        kind: Option<&str>,
        value: Option<&str>,
        from: Option<&str>,
        to: Option<&str>,
        bbox: Option<&str>,
    ) -> Result<Self, StoreError> {
        let bad = |what: &str, v: &str| StoreError::BadFilter(format!("{what} {v:?}"));
        let kind = kind
            .map(|k| k.parse::<DetectionKind>().map_err(|_| bad("kind", k)))
            .transpose()?;
        let value = match (kind, value) {
            (_, None) => None,
            (None, Some(v)) => return Err(bad("value without kind", v)),
            (Some(DetectionKind::Gps), Some(v)) => return Err(bad("gps detections carry no value", v)),
            (Some(k), Some(v)) => Some(Observation::parse(k, v).map_err(|_| bad("value", v))?),
        };
        let time = |name: &str, t: Option<&str>| {
            t.map(|t| t.trim().parse::<u64>().map_err(|_| bad(name, t))).transpose()
        };
        let f = Self {
            kind,
            value,
            t_from: time("from", from)?,
            t_to: time("to", to)?,
            bbox: bbox.map(GeoBox::parse).transpose()?,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if let (Some(a), Some(b)) = (self.t_from, self.t_to) {
            if a > b {
                return Err(StoreError::BadFilter(format!("from {a} is after to {b}")));
            }
        }
        if let Some(b) = &self.bbox {
            if !b.is_ordered() {
                return Err(StoreError::BadFilter("bbox minimum exceeds maximum".into()));
            }
        }
        if let (Some(k), Some(v)) = (self.kind, &self.value) {
            if v.kind() != k {
                return Err(StoreError::BadFilter(format!("value is not a {k:?}")));
            }
        }
        Ok(())
    }

    pub fn matches(&self, d: &Detection) -> bool {
        self.kind.is_none_or(|k| d.kind() == k)
            && self.value.as_ref().is_none_or(|v| &d.observation == v)
            && self.t_from.is_none_or(|t| d.detected_at_ms >= t)
            && self.t_to.is_none_or(|t| d.detected_at_ms <= t)
            && self.bbox.as_ref().is_none_or(|b| b.contains(&d.fix))
    }
}

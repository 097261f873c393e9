use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::ops::Bound;

use parking_lot::RwLock;

use crate::model::{Detection, DetectionKind, FaceCode, Observation, PlateCode};

use super::filter::{DetectionFilter, GeoBox};
use super::StoreError;

/// Geo index cell edge, 0.001 degrees in 1e-7 degree units.
pub const GRID_CELL_E7: i32 = 10_000;
/// Above this many cells a box query walks another index instead.
const MAX_GRID_CELLS: i64 = 4_096;

fn cell(lat_e7: i32, lon_e7: i32) -> (i32, i32) {
    (lat_e7.div_euclid(GRID_CELL_E7), lon_e7.div_euclid(GRID_CELL_E7))
}

#[derive(Debug, Default)]
struct Inner {
    log: Vec<Detection>,
    by_kind: HashMap<DetectionKind, Vec<usize>>,
    by_plate: HashMap<PlateCode, Vec<usize>>,
    by_face: HashMap<FaceCode, Vec<usize>>,
    by_time: BTreeMap<(u64, u64), usize>,
    by_cell: HashMap<(i32, i32), Vec<usize>>,
}

impl Inner {
    fn append(&mut self, mut d: Detection) -> u64 {
        let pos = self.log.len();
        let id = pos as u64 + 1;
        d.detection_id = id;
        self.by_kind.entry(d.kind()).or_default().push(pos);
        match d.observation {
            Observation::Plate(p) => self.by_plate.entry(p).or_default().push(pos),
            Observation::Face(f) => self.by_face.entry(f).or_default().push(pos),
            Observation::Gps => {}
        }
        self.by_time.insert((d.detected_at_ms, id), pos);
        self.by_cell.entry(cell(d.fix.lat_e7, d.fix.lon_e7)).or_default().push(pos);
        self.log.push(d);
        id
    }

    fn candidates(&self, f: &DetectionFilter) -> Vec<usize> {
        if let Some(v) = &f.value {
            let hits = match v {
                Observation::Plate(p) => self.by_plate.get(p),
                Observation::Face(c) => self.by_face.get(c),
                Observation::Gps => self.by_kind.get(&DetectionKind::Gps),
            };
            return hits.cloned().unwrap_or_default();
        }
        if let Some(b) = &f.bbox {
            if let Some(cells) = self.box_cells(b) {
                return cells;
            }
        }
        if f.t_from.is_some() || f.t_to.is_some() {
            let lo = f.t_from.map_or(Bound::Unbounded, |t| Bound::Included((t, 0)));
            let hi = f.t_to.map_or(Bound::Unbounded, |t| Bound::Included((t, u64::MAX)));
            return self.by_time.range((lo, hi)).map(|(_, &p)| p).collect();
        }
        if let Some(k) = f.kind {
            return self.by_kind.get(&k).cloned().unwrap_or_default();
        }
        (0..self.log.len()).collect()
    }

    fn box_cells(&self, b: &GeoBox) -> Option<Vec<usize>> {
        let (lat0, lon0) = cell(b.min_lat_e7, b.min_lon_e7);
        let (lat1, lon1) = cell(b.max_lat_e7, b.max_lon_e7);
        let n = (lat1 as i64 - lat0 as i64 + 1) * (lon1 as i64 - lon0 as i64 + 1);
        if n > MAX_GRID_CELLS || n > self.by_cell.len() as i64 {
            return None;
        }
        let mut out = Vec::new();
        for la in lat0..=lat1 {
            for lo in lon0..=lon1 {
                if let Some(v) = self.by_cell.get(&(la, lo)) {
                    out.extend_from_slice(v);
                }
            }
        }
        Some(out)
    }
}

/// Append-only detection log. Writers serialize on the lock; readers see
/// either all or none of an append.
#[derive(Debug, Default)]
pub struct DetectionStore {
    inner: RwLock<Inner>,
}

impl DetectionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `d`, overwriting its id with the next one (1-based).
    pub fn put_detection(&self, d: Detection) -> u64 {
        self.inner.write().append(d)
    }

    pub fn len(&self) -> usize {
        self.inner.read().log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, detection_id: u64) -> Option<Detection> {
        let inner = self.inner.read();
        detection_id.checked_sub(1).and_then(|i| inner.log.get(i as usize).cloned())
    }

    /// Snapshot of the log in append order.
    pub fn all(&self) -> Vec<Detection> {
        self.inner.read().log.clone()
    }

    /// Detections with ids in `after+1 ..`, in append order.
    pub fn since(&self, after: u64) -> Vec<Detection> {
        let inner = self.inner.read();
        inner.log.get(after as usize..).map(<[_]>::to_vec).unwrap_or_default()
    }

    /// Every detection satisfying `f`, ordered by detection time then id.
    pub fn query_detections(&self, f: &DetectionFilter) -> Result<Vec<Detection>, StoreError> {
        f.validate()?;
        let inner = self.inner.read();
        let mut hits: Vec<&Detection> = inner
            .candidates(f)
            .into_iter()
            .map(|p| &inner.log[p])
            .filter(|d| f.matches(d))
            .collect();
        hits.sort_by_key(|d| (d.detected_at_ms, d.detection_id));
        Ok(hits.into_iter().cloned().collect())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), StoreError> {
        for d in self.inner.read().log.iter() {
            serde_json::to_writer(&mut w, d)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds a store from a snapshot. Ids must run 1, 2, ... in order.
    pub fn replay<R: BufRead>(r: R) -> Result<Self, StoreError> {
        let mut inner = Inner::default();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let d: Detection = serde_json::from_str(&line)?;
            let expected = inner.log.len() as u64 + 1;
            if d.detection_id != expected {
                return Err(StoreError::Corrupt(format!(
                    "line {}: detection_id {} where {expected} expected",
                    n + 1,
                    d.detection_id
                )));
            }
            inner.append(d);
        }
        Ok(Self {
            inner: RwLock::new(inner),
        })
    }
}

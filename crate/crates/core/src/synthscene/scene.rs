use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::GeoFrame;
use crate::geo::GpsFix;
use crate::model::Target;

use super::render::{self, Bitmap, BLACK, WHITE};
use super::SceneError;

pub const DEFAULT_BACKGROUND: u8 = 48;

fn default_background() -> u8 {
    DEFAULT_BACKGROUND
}

fn is_default_background(b: &u8) -> bool {
    *b == DEFAULT_BACKGROUND
}

/// A plate or face marker placed in a scene.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SceneItem {
    #[serde(flatten)]
    pub target: Target,
    #[serde(rename = "x")]
    pub origin_x: u32,
    #[serde(rename = "y")]
    pub origin_y: u32,
    pub scale: u32,
}

impl SceneItem {
    pub fn size(&self) -> (usize, usize) {
        let s = self.scale as usize;
        match self.target {
            Target::Plate(_) => render::plate_size(s),
            Target::Face(_) => render::face_size(s),
        }
    }

    /// `(x, y, w, h)` in frame pixels.
    pub fn bbox(&self) -> (usize, usize, usize, usize) {
        let (w, h) = self.size();
        (self.origin_x as usize, self.origin_y as usize, w, h)
    }

    pub fn render(&self) -> Result<Bitmap, SceneError> {
        let s = self.scale as usize;
        match &self.target {
            Target::Plate(p) => render::render_plate(p, s),
            Target::Face(f) => render::render_face(*f, s),
        }
    }

    fn overlaps(&self, other: &SceneItem) -> bool {
        let (ax, ay, aw, ah) = self.bbox();
        let (bx, by, bw, bh) = other.bbox();
        ax < bx + bw && bx < ax + aw && ay < by + bh && by < ay + ah
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SceneSpec {
    pub items: Vec<SceneItem>,
    #[serde(default = "default_background", skip_serializing_if = "is_default_background")]
    pub background: u8,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            items: Vec::new(),
            background: DEFAULT_BACKGROUND,
        }
    }
}

impl SceneSpec {
    pub fn new(items: Vec<SceneItem>) -> Self {
        Self {
            items,
            ..Default::default()
        }
    }

    /// Checks that every item fits in `width x height` and that no two overlap.
    pub fn validate(&self, width: usize, height: usize) -> Result<(), SceneError> {
        for (i, item) in self.items.iter().enumerate() {
            if item.scale == 0 {
                return Err(SceneError::BadScale);
            }
            let (x, y, w, h) = item.bbox();
            if x + w > width || y + h > height {
                return Err(SceneError::ItemOutOfBounds { index: i });
            }
            if let Some(j) = self.items[..i].iter().position(|o| o.overlaps(item)) {
                return Err(SceneError::ItemsOverlap { first: j, second: i });
            }
        }
        Ok(())
    }
}

/// Renders `spec` into a frame and applies salt-and-pepper noise to
/// `floor(noise_level * w * h)` distinct pixels chosen by `rng_seed`.
pub fn compose_frame(
    spec: &SceneSpec,
    fix: GpsFix,
    vehicle_id: u64,
    width: u16,
    height: u16,
    noise_level: f64,
    rng_seed: u64,
) -> Result<GeoFrame, SceneError> {
    let (w, h) = (width as usize, height as usize);
    if w == 0 || h == 0 {
        return Err(SceneError::Frame(crate::frame::FrameError::BadDimensions { width, height }));
    }
    if !(0.0..=1.0).contains(&noise_level) {
        return Err(SceneError::BadNoise(noise_level));
    }
    spec.validate(w, h)?;
    let mut canvas = Bitmap::filled(w, h, spec.background);
    for item in &spec.items {
        let patch = item.render()?;
        canvas.blit(&patch, item.origin_x as usize, item.origin_y as usize);
    }
    let n = w * h;
    let flips = (noise_level * n as f64).floor() as usize;
    if flips > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for idx in index::sample(&mut rng, n, flips.min(n)).into_vec() {
            canvas.pixels[idx] = if rng.random_bool(0.5) { WHITE } else { BLACK };
        }
    }
    Ok(GeoFrame::new(vehicle_id, fix, width, height, canvas.pixels)?)
}

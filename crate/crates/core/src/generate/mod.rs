//! Procedural scene generation, rasterization and dataset persistence.

mod dataset;
mod render;

pub use dataset::{read_dataset, read_manifest, scene_file_name, write_dataset, write_png, DatasetError, Manifest, DATASET_FORMAT_VERSION};
pub use render::{render_scene, Raster, Rendered};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::{SceneError, SceneObject, Scene, SchemaId, CANVAS_HEIGHT, CANVAS_WIDTH};
use crate::seed::SeedKey;

/// Placement attempts per object before giving up on a scene.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("scene {scene_index}: could not place object {object} after {attempts} attempts (config too dense)")]
    PlacementExhausted { scene_index: u64, object: usize, attempts: usize },
    #[error("expected a {expected} scene, got {found}")]
    SchemaMismatch { expected: SchemaId, found: SchemaId },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Radius range (pixels) of one size class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRanges {
    pub small: RadiusRange,
    pub large: RadiusRange,
}

impl Default for SizeRanges {
    fn default() -> Self {
        SizeRanges {
            small: RadiusRange { min: 12.0, max: 18.0 },
            large: RadiusRange { min: 24.0, max: 34.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub schema: SchemaId,
    pub min_objects: usize,
    pub max_objects: usize,
    /// (width, height) in pixels.
    pub canvas_px: (u32, u32),
    pub size_ranges: SizeRanges,
    pub background_gray: [u8; 3],
    /// Extra clearance between bounding circles, in pixels.
    pub margin_px: f64,
    pub base_seed: u64,
}

impl GenConfig {
    pub fn new(schema: SchemaId, base_seed: u64) -> Self {
        let (min_objects, max_objects) = match schema {
            SchemaId::ClevrAttr => (3, 10),
            SchemaId::Clevr2d => (3, 7),
        };
        GenConfig {
            schema,
            min_objects,
            max_objects,
            canvas_px: (CANVAS_WIDTH, CANVAS_HEIGHT),
            size_ranges: SizeRanges::default(),
            background_gray: [40, 40, 40],
            margin_px: 2.0,
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let k_max = self.schema.schema().k_max;
        if self.min_objects < 1 || self.min_objects > self.max_objects || self.max_objects > k_max {
            return Err(GenError::InvalidConfig(format!(
                "need 1 <= min_objects ({}) <= max_objects ({}) <= {k_max}",
                self.min_objects, self.max_objects
            )));
        }
        let SizeRanges { small, large } = self.size_ranges;
        if !(small.min > 0.0 && small.min <= small.max && large.min <= large.max && large.min > small.max) {
            return Err(GenError::InvalidConfig("size ranges must be positive, ordered and disjoint".into()));
        }
        if self.canvas_px.0 == 0 || self.canvas_px.1 == 0 {
            return Err(GenError::InvalidConfig("empty canvas".into()));
        }
        Ok(())
    }

    fn radius_range(&self, size_value: u8) -> RadiusRange {
        if size_value == 0 {
            self.size_ranges.small
        } else {
            self.size_ranges.large
        }
    }
}

/// Generate scene `scene_index`; a pure function of `(config, scene_index)`.
pub fn generate_scene(config: &GenConfig, scene_index: u64) -> Result<Scene, GenError> {
    config.validate()?;
    let schema = config.schema.schema();
    let seed = SeedKey::new(config.base_seed).with(scene_index).value();
    let mut rng = SeedKey::new(seed).rng();
    let count = rng.random_range(config.min_objects..=config.max_objects);
    let size_concept = schema.concept_index("size").expect("every schema has a size concept");
    let (w, h) = (f64::from(config.canvas_px.0), f64::from(config.canvas_px.1));

    let mut placed: Vec<(f64, f64, f64)> = Vec::with_capacity(count);
    let mut objects = Vec::with_capacity(count);
    for id in 0..count {
        let attributes: Vec<u8> = schema.concepts.iter().map(|c| rng.random_range(0..c.arity()) as u8).collect();
        let range = config.radius_range(attributes[size_concept]);
        let r = rng.random_range(range.min..=range.max);
        let mut spot = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let x = rng.random_range(r..=(w - r).max(r));
            let y = rng.random_range(r..=(h - r).max(r));
            let clear = placed
                .iter()
                .all(|&(px, py, pr)| ((x - px).powi(2) + (y - py).powi(2)).sqrt() > r + pr + config.margin_px);
            if clear {
                spot = Some((x, y));
                break;
            }
        }
        let (x, y) = spot.ok_or(GenError::PlacementExhausted {
            scene_index,
            object: id,
            attempts: MAX_PLACEMENT_ATTEMPTS,
        })?;
        placed.push((x, y, r));
        let mut position = vec![x / w, y / h];
        if schema.position_dims == 3 {
            position.push(rng.random::<f64>());
        }
        objects.push(SceneObject { id, attributes, position, bbox: None, radius_px: r });
    }
    Ok(Scene::new(scene_index, config.schema, objects, seed)?)
}

/// Scenes `0..count` in index order.
pub fn generate_scenes(config: &GenConfig, count: u64) -> Result<Vec<Scene>, GenError> {
    (0..count).map(|i| generate_scene(config, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_index() {
        let cfg = GenConfig::new(SchemaId::Clevr2d, 42);
        let a = generate_scene(&cfg, 0).unwrap();
        let b = generate_scene(&cfg, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, generate_scene(&cfg, 1).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = GenConfig::new(SchemaId::Clevr2d, 0);
        cfg.max_objects = 8;
        assert!(matches!(cfg.validate(), Err(GenError::InvalidConfig(_))));
        let mut cfg = GenConfig::new(SchemaId::ClevrAttr, 0);
        cfg.size_ranges.large.min = 10.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn overdense_config_exhausts_placement() {
        let mut cfg = GenConfig::new(SchemaId::ClevrAttr, 0);
        cfg.canvas_px = (80, 80);
        cfg.min_objects = 10;
        cfg.max_objects = 10;
        let err = generate_scene(&cfg, 0).unwrap_err();
        assert!(matches!(err, GenError::PlacementExhausted { .. }), "{err}");
    }

    #[test]
    fn clevr_attr_scenes_are_three_dimensional() {
        let cfg = GenConfig::new(SchemaId::ClevrAttr, 3);
        for i in 0..50 {
            let s = generate_scene(&cfg, i).unwrap();
            assert!((3..=10).contains(&s.objects().len()));
            assert!(s.objects().iter().all(|o| o.position.len() == 3));
        }
    }
}

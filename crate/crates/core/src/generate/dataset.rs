//! On-disk layout: `manifest.json`, `scenes/scene_%06d.json`, `images/scene_%06d.png`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{render_scene, GenConfig, GenError, Raster};
use crate::scene::{Scene, SchemaId};

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{path}: png encoding failed: {message}")]
    Png { path: PathBuf, message: String },
    #[error("{path}: unsupported dataset format version {found} (expected {expected})")]
    Version { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: scene id {found} does not match manifest entry {expected}")]
    IdMismatch { path: PathBuf, expected: u64, found: u64 },
    #[error(transparent)]
    Generate(#[from] GenError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub schema: SchemaId,
    pub count: usize,
    pub scene_ids: Vec<u64>,
    pub config: GenConfig,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

pub fn scene_file_name(id: u64) -> String {
    format!("scene_{id:06}")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| DatasetError::Parse { path: path.to_path_buf(), source })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| DatasetError::Parse { path: path.to_path_buf(), source })
}

pub fn write_png(path: &Path, image: &Raster) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), image.width, image.height);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| DatasetError::Png { path: path.to_path_buf(), message: e.to_string() };
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&image.data).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// Persist scenes (rendering PNGs for CLEVR_2D). Rendered bounding boxes are
/// written into the scene JSON.
pub fn write_dataset(scenes: &[Scene], config: &GenConfig, dir: &Path) -> Result<Manifest, DatasetError> {
    let scene_dir = dir.join("scenes");
    fs::create_dir_all(&scene_dir).map_err(io_err(&scene_dir))?;
    let image_dir = dir.join("images");
    if config.schema == SchemaId::Clevr2d {
        fs::create_dir_all(&image_dir).map_err(io_err(&image_dir))?;
    }
    for scene in scenes {
        let name = scene_file_name(scene.scene_id());
        let scene = if scene.schema_id() == SchemaId::Clevr2d {
            let rendered = render_scene(scene, config)?;
            write_png(&image_dir.join(format!("{name}.png")), &rendered.image)?;
            rendered.scene
        } else {
            scene.clone()
        };
        write_json(&scene_dir.join(format!("{name}.json")), &scene)?;
    }
    let manifest = Manifest {
        format_version: DATASET_FORMAT_VERSION,
        schema: config.schema,
        count: scenes.len(),
        scene_ids: scenes.iter().map(Scene::scene_id).collect(),
        config: config.clone(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, DatasetError> {
    let path = dir.join("manifest.json");
    let raw: serde_json::Value = read_json(&path)?;
    let found = raw.get("format_version").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
    if found != DATASET_FORMAT_VERSION {
        return Err(DatasetError::Version { path, found, expected: DATASET_FORMAT_VERSION });
    }
    serde_json::from_value(raw).map_err(|source| DatasetError::Parse { path, source })
}

/// Load every scene listed in the manifest, in manifest order.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, Vec<Scene>), DatasetError> {
    let manifest = read_manifest(dir)?;
    let mut scenes = Vec::with_capacity(manifest.count);
    for &id in &manifest.scene_ids {
        let path = dir.join("scenes").join(format!("{}.json", scene_file_name(id)));
        let scene: Scene = read_json(&path)?;
        if scene.scene_id() != id {
            return Err(DatasetError::IdMismatch { path, expected: id, found: scene.scene_id() });
        }
        scenes.push(scene);
    }
    Ok((manifest, scenes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_scenes, render_scene};

    #[test]
    fn round_trip_hundred_scenes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig::new(SchemaId::Clevr2d, 5);
        let scenes = generate_scenes(&cfg, 100).unwrap();
        let manifest = write_dataset(&scenes, &cfg, dir.path()).unwrap();
        assert_eq!(manifest.count, 100);
        let (read_manifest, back) = read_dataset(dir.path()).unwrap();
        assert_eq!(read_manifest, manifest);
        assert_eq!(back.len(), 100);
        for (orig, read) in scenes.iter().zip(&back) {
            // written scenes carry rendered boxes
            assert_eq!(read, &render_scene(orig, &cfg).unwrap().scene);
        }
        let decoder = png::Decoder::new(std::io::BufReader::new(File::open(dir.path().join("images/scene_000007.png")).unwrap()));
        let reader = decoder.read_info().unwrap();
        let info = reader.info();
        assert_eq!((info.width, info.height), (480, 320));
        assert_eq!(info.color_type, png::ColorType::Rgb);
    }

    #[test]
    fn symbolic_schema_has_no_images() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig::new(SchemaId::ClevrAttr, 5);
        let scenes = generate_scenes(&cfg, 10).unwrap();
        write_dataset(&scenes, &cfg, dir.path()).unwrap();
        assert!(!dir.path().join("images").exists());
        assert_eq!(read_dataset(dir.path()).unwrap().1, scenes);
    }

    #[test]
    fn corrupted_json_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig::new(SchemaId::ClevrAttr, 5);
        write_dataset(&generate_scenes(&cfg, 3).unwrap(), &cfg, dir.path()).unwrap();
        fs::write(dir.path().join("scenes/scene_000001.json"), "{ not json").unwrap();
        let err = read_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { .. }));
        assert!(err.to_string().contains("scene_000001.json"), "{err}");
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig::new(SchemaId::ClevrAttr, 5);
        write_dataset(&generate_scenes(&cfg, 2).unwrap(), &cfg, dir.path()).unwrap();
        let path = dir.path().join("manifest.json");
        let text = fs::read_to_string(&path).unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        fs::write(&path, text).unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(DatasetError::Version { found: 9, .. })));
    }
}

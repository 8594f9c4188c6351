//! WebAssembly bindings for `www/index.html`.
//!
//! Three operations: render a CLEVR_2D scene, perceive it through a noise
//! profile, and learn a rule from a small labeled CLEVR_ATTR dataset. The
//! plain functions return JSON strings so they can be tested natively.

use nesy_core::generate::{generate_scene, render_scene as rasterize, GenConfig};
use nesy_core::perception::{perceive, GroundedScene, NoiseProfile};
use nesy_core::reasoners::{EngineKind, FittedModel, IlpConfig, ReasonerConfig};
use nesy_core::rules::{build_labeled_dataset, DatasetRequest, RuleSpec};
use nesy_core::scene::{Atom, SchemaId, SymbolicScene};
use nesy_core::seed::SeedKey;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// ILP budget for the page; enough for every shipped combinatorial rule.
const DEMO_ILP_BUDGET: u64 = 60_000;

fn facts(scene: &SymbolicScene) -> Vec<String> {
    let schema = scene.schema();
    scene.atoms().iter().filter(|a| matches!(a, Atom::Attribute { .. })).map(|a| a.render(schema)).collect()
}

fn describe(scene: &GroundedScene) -> Vec<Value> {
    let schema = scene.symbolic.schema();
    scene
        .symbolic
        .rows()
        .iter()
        .zip(&scene.coords)
        .map(|(row, xy)| {
            let label: Vec<&str> = row.iter().enumerate().map(|(c, &v)| schema.value_name(c, v)).collect();
            json!({ "x": xy[0], "y": xy[1], "label": label.join(" ") })
        })
        .collect()
}

#[wasm_bindgen]
pub struct SceneImage {
    width: u32,
    height: u32,
    rgba: Vec<u8>,
    json: String,
}

#[wasm_bindgen]
impl SceneImage {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Pixels, RGBA row-major.
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// `{"facts": [...], "objects": [{"x", "y", "label"}]}` with normalized coordinates.
    #[wasm_bindgen(getter)]
    pub fn json(&self) -> String {
        self.json.clone()
    }
}

pub fn scene_image(seed: u32, index: u32) -> Result<SceneImage, String> {
    let cfg = GenConfig::new(SchemaId::Clevr2d, seed.into());
    let scene = generate_scene(&cfg, index.into()).map_err(|e| e.to_string())?;
    let rendered = rasterize(&scene, &cfg).map_err(|e| e.to_string())?;
    let truth = GroundedScene::from_truth(&rendered.scene);
    Ok(SceneImage {
        width: rendered.image.width,
        height: rendered.image.height,
        rgba: rendered.image.to_rgba(),
        json: json!({ "facts": facts(&truth.symbolic), "objects": describe(&truth) }).to_string(),
    })
}

/// The perceived grounding of the same scene under a built-in profile.
pub fn perceive_json(seed: u32, index: u32, profile: &str) -> Result<String, String> {
    let profile = NoiseProfile::builtin(profile).ok_or_else(|| format!("unknown profile `{profile}`"))?;
    let cfg = GenConfig::new(SchemaId::Clevr2d, seed.into());
    let scene = generate_scene(&cfg, index.into()).map_err(|e| e.to_string())?;
    let mut rng = SeedKey::new(seed.into()).with_str("perceive").with(index.into()).rng();
    let k = SchemaId::Clevr2d.schema().k_max;
    let g = perceive(&scene, &profile, k, &mut rng).map_err(|e| e.to_string())?;
    Ok(json!({ "facts": facts(&g.symbolic), "objects": describe(&g), "true_objects": scene.objects().len() }).to_string())
}

/// Fit one engine on 100 positive and 400 negative CLEVR_ATTR scenes
/// perceived through `profile`, and score it on held-out ground truth.
pub fn learn_json(rule: &str, engine: &str, profile: &str, seed: u32) -> Result<String, String> {
    let rule: RuleSpec = rule.parse().map_err(|e: nesy_core::rules::RuleError| e.to_string())?;
    let profile = NoiseProfile::builtin(profile).ok_or_else(|| format!("unknown profile `{profile}`"))?;
    let config = match engine {
        "ilp" => ReasonerConfig::Ilp(IlpConfig { max_iterations: DEMO_ILP_BUDGET, ..IlpConfig::default() }),
        "dt" => ReasonerConfig::default_for(EngineKind::Dt),
        "bn" => ReasonerConfig::default_for(EngineKind::Bn),
        other => return Err(format!("unknown engine `{other}` (ilp, dt, bn)")),
    };
    let gen = GenConfig::new(SchemaId::ClevrAttr, 0);
    let ds = build_labeled_dataset(&DatasetRequest {
        sample_budget: 200_000,
        ..DatasetRequest::new(&rule, &gen, &profile, 100, 400, seed.into())
    })
    .map_err(|e| e.to_string())?;
    let train: Vec<_> = ds.split.train.iter().map(|&i| &ds.items[i].vae).collect();
    let labels: Vec<bool> = ds.split.train.iter().map(|&i| ds.items[i].label).collect();
    let model = config.fit(&train, &labels, seed.into()).map_err(|e| e.to_string())?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for &i in &ds.split.test {
        let item = &ds.items[i];
        match (model.predict(&item.gt).map_err(|e| e.to_string())?, item.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
    let mut out = json!({ "engine": model.kind().label(), "f1": f1, "tp": tp, "fp": fp, "fn": fn_ });
    match &model {
        FittedModel::Ilp(m) => {
            out["program"] = m.hypothesis.as_ref().map(|h| h.program()).unwrap_or_else(|| "FAILURE".into()).into();
            out["iterations"] = m.iterations_used.into();
        }
        FittedModel::Dt { tree, .. } => out["depth"] = tree.depth().into(),
        _ => {}
    }
    Ok(out.to_string())
}

#[wasm_bindgen(js_name = renderScene)]
pub fn render_scene(seed: u32, index: u32) -> Result<SceneImage, JsError> {
    scene_image(seed, index).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = perceiveScene)]
pub fn perceive_scene(seed: u32, index: u32, profile: &str) -> Result<String, JsError> {
    perceive_json(seed, index, profile).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = learnRule)]
pub fn learn_rule(rule: &str, engine: &str, profile: &str, seed: u32) -> Result<String, JsError> {
    learn_json(rule, engine, profile, seed).map_err(|e| JsError::new(&e))
}

//! Scene graphs, grounded atoms and symbolic background knowledge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tie-break tolerance for spatial relations.
pub const RELATION_EPS: f64 = 1e-9;

/// Canvas size shared by both schemas (rendered for CLEVR_2D, virtual for CLEVR_ATTR).
pub const CANVAS_WIDTH: u32 = 480;
pub const CANVAS_HEIGHT: u32 = 320;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemaId {
    #[serde(rename = "CLEVR_ATTR")]
    ClevrAttr,
    #[serde(rename = "CLEVR_2D")]
    Clevr2d,
}

impl SchemaId {
    pub fn schema(self) -> &'static AttributeSchema {
        match self {
            SchemaId::ClevrAttr => &CLEVR_ATTR,
            SchemaId::Clevr2d => &CLEVR_2D,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemaId::ClevrAttr => "CLEVR_ATTR",
            SchemaId::Clevr2d => "CLEVR_2D",
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemaId {
    type Err = SceneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "CLEVR_ATTR" => Ok(SchemaId::ClevrAttr),
            "CLEVR_2D" => Ok(SchemaId::Clevr2d),
            _ => Err(SceneError::UnknownSchema(s.to_string())),
        }
    }
}

/// One categorical concept and its ordered value domain.
#[derive(Debug, PartialEq, Eq)]
pub struct Concept {
    pub name: &'static str,
    pub values: &'static [&'static str],
}

impl Concept {
    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, value: &str) -> Option<u8> {
        self.values.iter().position(|v| *v == value).map(|i| i as u8)
    }
}

/// Concept domains of a scene schema. Value order is the canonical index
/// used by categorical scores, feature vectors and rule literals.
#[derive(Debug, PartialEq, Eq)]
pub struct AttributeSchema {
    pub id: SchemaId,
    pub concepts: &'static [Concept],
    pub position_dims: usize,
    pub k_max: usize,
}

pub const COLORS: &[&str] = &[
    "gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow",
];

/// Fixed fill colors, indexed like [`COLORS`].
pub const COLOR_RGB: [[u8; 3]; 8] = [
    [87, 87, 87],
    [173, 35, 35],
    [42, 75, 215],
    [29, 105, 20],
    [129, 74, 25],
    [129, 38, 192],
    [41, 208, 208],
    [255, 238, 51],
];

pub static CLEVR_ATTR: AttributeSchema = AttributeSchema {
    id: SchemaId::ClevrAttr,
    concepts: &[
        Concept { name: "shape", values: &["cube", "sphere", "cylinder"] },
        Concept { name: "color", values: COLORS },
        Concept { name: "size", values: &["small", "large"] },
        Concept { name: "material", values: &["metal", "rubber"] },
    ],
    position_dims: 3,
    k_max: 10,
};

pub static CLEVR_2D: AttributeSchema = AttributeSchema {
    id: SchemaId::Clevr2d,
    concepts: &[
        Concept {
            name: "shape",
            values: &["circle", "square", "rectangle", "triangle", "hexagon", "octagon"],
        },
        Concept { name: "color", values: COLORS },
        Concept { name: "size", values: &["small", "large"] },
    ],
    position_dims: 2,
    k_max: 7,
};

impl AttributeSchema {
    pub fn concept_index(&self, name: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c.name == name)
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.name == name)
    }

    /// Axis used by `front_of`: screen-y for 2D scenes, axis 2 for 3D.
    pub fn depth_axis(&self) -> usize {
        if self.position_dims == 2 {
            1
        } else {
            2
        }
    }

    /// Total number of attribute values across all concepts.
    pub fn total_values(&self) -> usize {
        self.concepts.iter().map(Concept::arity).sum()
    }

    /// Offset of each concept's first value in a flat one-hot layout.
    pub fn value_offsets(&self) -> Vec<usize> {
        self.concepts
            .iter()
            .scan(0, |acc, c| {
                let start = *acc;
                *acc += c.arity();
                Some(start)
            })
            .collect()
    }

    pub fn value_name(&self, concept: usize, value: u8) -> &'static str {
        self.concepts[concept].values[value as usize]
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("unknown schema `{0}`")]
    UnknownSchema(String),
    #[error("scene has {count} objects, schema {schema} allows 1..={k_max}")]
    ObjectCount { count: usize, schema: SchemaId, k_max: usize },
    #[error("object ids must be 0..n-1 in order; found id {found} at position {position}")]
    ObjectIds { position: usize, found: usize },
    #[error("object {object}: {message}")]
    Attribute { object: usize, message: String },
    #[error("object {object}: position must have {expected} finite coordinates")]
    Position { object: usize, expected: usize },
    #[error("object {object}: degenerate bounding box")]
    BBox { object: usize },
    #[error("atom refers to object {0} which is not active")]
    DanglingObject(usize),
    #[error("object {object} has {count} atoms for concept `{concept}`")]
    AtomCount { object: usize, concept: String, count: usize },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("relation {relation}({a},{b}) is reflexive or contradicts its converse")]
    RelationShape { relation: Relation, a: usize, b: usize },
}

/// Tight pixel bounding box; maxima are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl From<[u32; 4]> for BBox {
    fn from(v: [u32; 4]) -> Self {
        BBox { x_min: v[0], y_min: v[1], x_max: v[2], y_max: v[3] }
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BBox {
    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: usize,
    /// Value index per schema concept, in schema order.
    pub attributes: Vec<u8>,
    /// Normalized coordinates in [0, 1] per axis.
    pub position: Vec<f64>,
    pub bbox: Option<BBox>,
    /// Radius in pixels of the placement circle (not part of the JSON contract).
    pub radius_px: f64,
}

/// A ground-truth scene graph. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneRecord", into = "SceneRecord")]
pub struct Scene {
    scene_id: u64,
    schema: SchemaId,
    objects: Vec<SceneObject>,
    rng_seed_used: u64,
}

impl Scene {
    pub fn new(
        scene_id: u64,
        schema: SchemaId,
        objects: Vec<SceneObject>,
        rng_seed_used: u64,
    ) -> Result<Self, SceneError> {
        let s = schema.schema();
        if objects.is_empty() || objects.len() > s.k_max {
            return Err(SceneError::ObjectCount { count: objects.len(), schema, k_max: s.k_max });
        }
        for (position, o) in objects.iter().enumerate() {
            if o.id != position {
                return Err(SceneError::ObjectIds { position, found: o.id });
            }
            validate_attributes(s, o.id, &o.attributes)?;
            if o.position.len() != s.position_dims || o.position.iter().any(|x| !x.is_finite()) {
                return Err(SceneError::Position { object: o.id, expected: s.position_dims });
            }
            if let Some(b) = o.bbox {
                if !b.is_valid() {
                    return Err(SceneError::BBox { object: o.id });
                }
            }
        }
        Ok(Scene { scene_id, schema, objects, rng_seed_used })
    }

    pub fn scene_id(&self) -> u64 {
        self.scene_id
    }

    pub fn schema_id(&self) -> SchemaId {
        self.schema
    }

    pub fn schema(&self) -> &'static AttributeSchema {
        self.schema.schema()
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn rng_seed_used(&self) -> u64 {
        self.rng_seed_used
    }

    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.objects.iter().map(|o| o.position.clone()).collect()
    }

    /// Replace the bounding boxes (used by the renderer).
    pub(crate) fn set_bboxes(&mut self, boxes: &[Option<BBox>]) {
        for (o, b) in self.objects.iter_mut().zip(boxes) {
            o.bbox = *b;
        }
    }
}

fn validate_attributes(s: &AttributeSchema, object: usize, attrs: &[u8]) -> Result<(), SceneError> {
    if attrs.len() != s.concepts.len() {
        return Err(SceneError::Attribute {
            object,
            message: format!("expected {} attributes, got {}", s.concepts.len(), attrs.len()),
        });
    }
    for (c, &v) in s.concepts.iter().zip(attrs) {
        if v as usize >= c.arity() {
            return Err(SceneError::Attribute {
                object,
                message: format!("value index {v} out of range for `{}`", c.name),
            });
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ObjectRecord {
    id: usize,
    attributes: BTreeMap<String, String>,
    position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bbox: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius_px: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SceneRecord {
    scene_id: u64,
    schema: SchemaId,
    #[serde(default)]
    rng_seed_used: u64,
    objects: Vec<ObjectRecord>,
}

impl From<Scene> for SceneRecord {
    fn from(scene: Scene) -> Self {
        let s = scene.schema();
        let objects = scene
            .objects
            .into_iter()
            .map(|o| ObjectRecord {
                id: o.id,
                attributes: s
                    .concepts
                    .iter()
                    .zip(&o.attributes)
                    .map(|(c, &v)| (c.name.to_string(), c.values[v as usize].to_string()))
                    .collect(),
                position: o.position,
                bbox: o.bbox,
                radius_px: Some(o.radius_px),
            })
            .collect();
        SceneRecord { scene_id: scene.scene_id, schema: scene.schema, rng_seed_used: scene.rng_seed_used, objects }
    }
}

impl TryFrom<SceneRecord> for Scene {
    type Error = SceneError;

    fn try_from(r: SceneRecord) -> Result<Self, Self::Error> {
        let s = r.schema.schema();
        let mut objects = Vec::with_capacity(r.objects.len());
        for o in r.objects {
            if o.attributes.len() != s.concepts.len() {
                return Err(SceneError::Attribute {
                    object: o.id,
                    message: format!("expected concepts {:?}", s.concepts.iter().map(|c| c.name).collect::<Vec<_>>()),
                });
            }
            let mut attributes = Vec::with_capacity(s.concepts.len());
            for c in s.concepts {
                let value = o.attributes.get(c.name).ok_or_else(|| SceneError::Attribute {
                    object: o.id,
                    message: format!("missing concept `{}`", c.name),
                })?;
                attributes.push(c.value_index(value).ok_or_else(|| SceneError::Attribute {
                    object: o.id,
                    message: format!("`{value}` is not a value of `{}`", c.name),
                })?);
            }
            objects.push(SceneObject {
                id: o.id,
                attributes,
                position: o.position,
                bbox: o.bbox,
                radius_px: o.radius_px.unwrap_or(0.0),
            });
        }
        Scene::new(r.scene_id, r.schema, objects, r.rng_seed_used)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftOf,
    FrontOf,
}

impl Relation {
    pub const ALL: [Relation; 2] = [Relation::LeftOf, Relation::FrontOf];

    pub fn name(self) -> &'static str {
        match self {
            Relation::LeftOf => "left_of",
            Relation::FrontOf => "front_of",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Relation::ALL.into_iter().find(|r| r.name() == s)
    }

    fn axis(self, schema: &AttributeSchema) -> usize {
        match self {
            Relation::LeftOf => 0,
            Relation::FrontOf => schema.depth_axis(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A grounded fact about one object or an ordered pair of objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Attribute { concept: usize, subject: usize, value: u8 },
    Relation { relation: Relation, subject: usize, object: usize },
}

impl Atom {
    pub fn render(&self, schema: &AttributeSchema) -> String {
        match *self {
            Atom::Attribute { concept, subject, value } => {
                format!("{}(obj{subject},{})", schema.concepts[concept].name, schema.value_name(concept, value))
            }
            Atom::Relation { relation, subject, object } => format!("{relation}(obj{subject},obj{object})"),
        }
    }
}

/// All relational atoms implied by a coordinate table.
///
/// `left_of(a,b)` holds iff `x_a + eps < x_b`; `front_of(a,b)` compares the
/// schema's depth axis the same way. Coincident coordinates yield neither.
pub fn derive_relations(schema: &AttributeSchema, coords: &[Vec<f64>]) -> BTreeSet<(Relation, usize, usize)> {
    let mut out = BTreeSet::new();
    for rel in Relation::ALL {
        let axis = rel.axis(schema);
        for (a, ca) in coords.iter().enumerate() {
            for (b, cb) in coords.iter().enumerate() {
                if a != b && ca[axis] + RELATION_EPS < cb[axis] {
                    out.insert((rel, a, b));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Source {
    GroundTruth,
    SimulatedVae,
}

/// Background knowledge for one image: one attribute atom per (object,
/// concept) plus the relational atoms. Active objects are always `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SymbolicRecord", into = "SymbolicRecord")]
pub struct SymbolicScene {
    scene_id: u64,
    schema: SchemaId,
    source: Source,
    objects: Vec<Vec<u8>>,
    relations: BTreeSet<(Relation, usize, usize)>,
}

impl SymbolicScene {
    /// Build from per-object attribute rows and coordinates; relations are derived.
    pub fn from_rows(
        scene_id: u64,
        schema: SchemaId,
        source: Source,
        rows: Vec<Vec<u8>>,
        coords: &[Vec<f64>],
    ) -> Self {
        debug_assert_eq!(rows.len(), coords.len());
        let relations = derive_relations(schema.schema(), coords);
        SymbolicScene { scene_id, schema, source, objects: rows, relations }
    }

    pub fn empty(scene_id: u64, schema: SchemaId, source: Source) -> Self {
        SymbolicScene { scene_id, schema, source, objects: Vec::new(), relations: BTreeSet::new() }
    }

    /// Assemble from a loose atom set, checking the structural invariants.
    pub fn from_atoms(
        scene_id: u64,
        schema: SchemaId,
        source: Source,
        active: &BTreeSet<usize>,
        atoms: impl IntoIterator<Item = Atom>,
    ) -> Result<Self, SceneError> {
        let s = schema.schema();
        let n = active.len();
        if let Some(pos) = active.iter().enumerate().find(|(i, id)| *i != **id) {
            return Err(SceneError::ObjectIds { position: pos.0, found: *pos.1 });
        }
        let mut slots: Vec<Vec<Vec<u8>>> = vec![vec![Vec::new(); s.concepts.len()]; n];
        let mut relations = BTreeSet::new();
        for atom in atoms {
            match atom {
                Atom::Attribute { concept, subject, value } => {
                    if subject >= n {
                        return Err(SceneError::DanglingObject(subject));
                    }
                    if concept >= s.concepts.len() || value as usize >= s.concepts[concept].arity() {
                        return Err(SceneError::Attribute { object: subject, message: "value out of domain".into() });
                    }
                    slots[subject][concept].push(value);
                }
                Atom::Relation { relation, subject, object } => {
                    for id in [subject, object] {
                        if id >= n {
                            return Err(SceneError::DanglingObject(id));
                        }
                    }
                    relations.insert((relation, subject, object));
                }
            }
        }
        for &(relation, a, b) in &relations {
            if a == b || relations.contains(&(relation, b, a)) {
                return Err(SceneError::RelationShape { relation, a, b });
            }
        }
        let mut objects = Vec::with_capacity(n);
        for (object, per_concept) in slots.into_iter().enumerate() {
            let mut row = Vec::with_capacity(per_concept.len());
            for (c, values) in per_concept.into_iter().enumerate() {
                if values.len() != 1 {
                    return Err(SceneError::AtomCount {
                        object,
                        concept: s.concepts[c].name.to_string(),
                        count: values.len(),
                    });
                }
                row.push(values[0]);
            }
            objects.push(row);
        }
        Ok(SymbolicScene { scene_id, schema, source, objects, relations })
    }

    pub fn scene_id(&self) -> u64 {
        self.scene_id
    }

    pub fn schema_id(&self) -> SchemaId {
        self.schema
    }

    pub fn schema(&self) -> &'static AttributeSchema {
        self.schema.schema()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn active_object_ids(&self) -> std::ops::Range<usize> {
        0..self.objects.len()
    }

    /// Attribute row (value index per concept) of an object.
    pub fn object(&self, id: usize) -> &[u8] {
        &self.objects[id]
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.objects
    }

    pub fn relations(&self) -> &BTreeSet<(Relation, usize, usize)> {
        &self.relations
    }

    pub fn holds(&self, relation: Relation, a: usize, b: usize) -> bool {
        self.relations.contains(&(relation, a, b))
    }

    pub fn attribute_atom_count(&self) -> usize {
        self.objects.len() * self.schema().concepts.len()
    }

    /// All atoms in canonical order (attribute atoms first).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = self
            .objects
            .iter()
            .enumerate()
            .flat_map(|(subject, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(concept, &value)| Atom::Attribute { concept, subject, value })
            })
            .collect();
        out.extend(
            self.relations
                .iter()
                .map(|&(relation, subject, object)| Atom::Relation { relation, subject, object }),
        );
        out
    }

    /// Copy with objects renumbered by `order` (new id i = old id order[i]).
    pub fn reindexed(&self, order: &[usize]) -> Self {
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        SymbolicScene {
            scene_id: self.scene_id,
            schema: self.schema,
            source: self.source,
            objects: order.iter().map(|&old| self.objects[old].clone()).collect(),
            relations: self.relations.iter().map(|&(r, a, b)| (r, inverse[a], inverse[b])).collect(),
        }
    }

    /// Same content, different provenance tag.
    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }
}

/// Oracle background knowledge straight from the scene graph.
pub fn symbolic_scene_from_ground_truth(scene: &Scene) -> SymbolicScene {
    let rows = scene.objects().iter().map(|o| o.attributes.clone()).collect();
    SymbolicScene::from_rows(scene.scene_id(), scene.schema_id(), Source::GroundTruth, rows, &scene.coords())
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    predicate: String,
    subject: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    object2: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct SymbolicRecord {
    scene_id: u64,
    schema: SchemaId,
    source: Source,
    active_object_ids: Vec<usize>,
    atoms: Vec<AtomRecord>,
}

impl From<SymbolicScene> for SymbolicRecord {
    fn from(s: SymbolicScene) -> Self {
        let schema = s.schema();
        let atoms = s
            .atoms()
            .into_iter()
            .map(|a| match a {
                Atom::Attribute { concept, subject, value } => AtomRecord {
                    predicate: schema.concepts[concept].name.to_string(),
                    subject,
                    value: Some(schema.value_name(concept, value).to_string()),
                    object2: None,
                },
                Atom::Relation { relation, subject, object } => AtomRecord {
                    predicate: relation.name().to_string(),
                    subject,
                    value: None,
                    object2: Some(object),
                },
            })
            .collect();
        SymbolicRecord {
            scene_id: s.scene_id,
            schema: s.schema,
            source: s.source,
            active_object_ids: s.active_object_ids().collect(),
            atoms,
        }
    }
}

impl TryFrom<SymbolicRecord> for SymbolicScene {
    type Error = SceneError;

    fn try_from(r: SymbolicRecord) -> Result<Self, Self::Error> {
        let schema = r.schema.schema();
        let mut atoms = Vec::with_capacity(r.atoms.len());
        for a in r.atoms {
            if let Some(relation) = Relation::from_name(&a.predicate) {
                let object = a.object2.ok_or_else(|| SceneError::UnknownPredicate(a.predicate.clone()))?;
                atoms.push(Atom::Relation { relation, subject: a.subject, object });
            } else {
                let concept =
                    schema.concept_index(&a.predicate).ok_or_else(|| SceneError::UnknownPredicate(a.predicate.clone()))?;
                let value = a
                    .value
                    .as_deref()
                    .and_then(|v| schema.concepts[concept].value_index(v))
                    .ok_or_else(|| SceneError::Attribute {
                        object: a.subject,
                        message: format!("bad value for `{}`", a.predicate),
                    })?;
                atoms.push(Atom::Attribute { concept, subject: a.subject, value });
            }
        }
        let active = r.active_object_ids.into_iter().collect();
        SymbolicScene::from_atoms(r.scene_id, r.schema, r.source, &active, atoms)
    }
}

use std::f64::consts::PI;

use super::{GenConfig, GenError};
use crate::scene::{BBox, Scene, SchemaId, COLOR_RGB};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Raster {
    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take((width * height * 3) as usize).collect();
        Raster { width, height, data }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y * self.width + x) * 3) as usize;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y * self.width + x) * 3) as usize;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// RGBA copy, e.g. for a browser `ImageData`.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.data.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: Raster,
    /// The input scene with tight bounding boxes filled in.
    pub scene: Scene,
}

/// Shape primitive drawn inside a bounding circle of radius `r`.
#[derive(Debug, Clone, Copy)]
enum Primitive {
    Circle,
    Box { half_w: f64, half_h: f64 },
    Polygon { sides: usize },
}

fn primitive(shape: &str, r: f64) -> Primitive {
    match shape {
        "circle" => Primitive::Circle,
        "square" => Primitive::Box { half_w: r / 2f64.sqrt(), half_h: r / 2f64.sqrt() },
        // 2:1 rectangle inscribed in the bounding circle
        "rectangle" => Primitive::Box { half_w: 2.0 * r / 5f64.sqrt(), half_h: r / 5f64.sqrt() },
        "triangle" => Primitive::Polygon { sides: 3 },
        "hexagon" => Primitive::Polygon { sides: 6 },
        "octagon" => Primitive::Polygon { sides: 8 },
        other => unreachable!("unknown CLEVR_2D shape {other}"),
    }
}

/// Vertices of a regular polygon with a horizontal top edge (screen coordinates, y down).
pub(crate) fn regular_polygon(cx: f64, cy: f64, r: f64, sides: usize) -> Vec<(f64, f64)> {
    let n = sides as f64;
    (0..sides)
        .map(|k| {
            let theta = -PI / 2.0 + PI / n + 2.0 * PI * k as f64 / n;
            (cx + r * theta.cos(), cy + r * theta.sin())
        })
        .collect()
}

/// Even-odd scanline fill sampled at pixel centers.
fn fill_polygon(vertices: &[(f64, f64)], width: u32, height: u32, mut plot: impl FnMut(u32, u32)) {
    let y_lo = vertices.iter().map(|v| v.1).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
    let y_hi = vertices.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max).ceil().min(f64::from(height)) as u32;
    let mut xs = Vec::with_capacity(vertices.len());
    for py in y_lo..y_hi {
        let sy = f64::from(py) + 0.5;
        xs.clear();
        for (i, &(x0, y0)) in vertices.iter().enumerate() {
            let (x1, y1) = vertices[(i + 1) % vertices.len()];
            if (y0 <= sy && sy < y1) || (y1 <= sy && sy < y0) {
                xs.push(x0 + (sy - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            // pixel px is inside when span[0] <= px + 0.5 <= span[1]
            let start = (span[0] - 0.5).ceil().max(0.0);
            let end = (span[1] - 0.5).floor().min(f64::from(width) - 1.0);
            if start <= end {
                for px in start as u32..=end as u32 {
                    plot(px, py);
                }
            }
        }
    }
}

/// Rasterize a CLEVR_2D scene and record each object's tight bounding box.
pub fn render_scene(scene: &Scene, config: &GenConfig) -> Result<Rendered, GenError> {
    if scene.schema_id() != SchemaId::Clevr2d {
        return Err(GenError::SchemaMismatch { expected: SchemaId::Clevr2d, found: scene.schema_id() });
    }
    let schema = scene.schema();
    let shape_c = schema.concept_index("shape").unwrap();
    let color_c = schema.concept_index("color").unwrap();
    let (w, h) = config.canvas_px;
    let mut image = Raster::filled(w, h, config.background_gray);
    let mut boxes = Vec::with_capacity(scene.objects().len());

    for o in scene.objects() {
        let rgb = COLOR_RGB[o.attributes[color_c] as usize];
        let cx = o.position[0] * f64::from(w);
        let cy = o.position[1] * f64::from(h);
        let r = o.radius_px;
        let mut bbox: Option<BBox> = None;
        let mut plot = |x: u32, y: u32| {
            image.put(x, y, rgb);
            let b = bbox.get_or_insert(BBox { x_min: x, y_min: y, x_max: x + 1, y_max: y + 1 });
            b.x_min = b.x_min.min(x);
            b.y_min = b.y_min.min(y);
            b.x_max = b.x_max.max(x + 1);
            b.y_max = b.y_max.max(y + 1);
        };
        match primitive(schema.value_name(shape_c, o.attributes[shape_c]), r) {
            Primitive::Circle => {
                let x0 = (cx - r).floor().max(0.0) as u32;
                let x1 = ((cx + r).ceil() as u32).min(w);
                let y0 = (cy - r).floor().max(0.0) as u32;
                let y1 = ((cy + r).ceil() as u32).min(h);
                for py in y0..y1 {
                    for px in x0..x1 {
                        let dx = f64::from(px) + 0.5 - cx;
                        let dy = f64::from(py) + 0.5 - cy;
                        if dx * dx + dy * dy <= r * r {
                            plot(px, py);
                        }
                    }
                }
            }
            Primitive::Box { half_w, half_h } => {
                let corners = [
                    (cx - half_w, cy - half_h),
                    (cx + half_w, cy - half_h),
                    (cx + half_w, cy + half_h),
                    (cx - half_w, cy + half_h),
                ];
                fill_polygon(&corners, w, h, plot);
            }
            Primitive::Polygon { sides } => {
                fill_polygon(&regular_polygon(cx, cy, r, sides), w, h, plot);
            }
        }
        boxes.push(bbox);
    }

    let mut scene = scene.clone();
    scene.set_bboxes(&boxes);
    Ok(Rendered { image, scene })
}

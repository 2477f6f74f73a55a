use super::patch::{gen_fbm_patch, gen_polygon_patch, FbmParams, PatchMask, PolygonParams};
use super::polyline::{draw_organic, gen_angular_polyline, gen_organic_polyline, render_polyline, OrganicDraw, Point};
use super::template::{PatchSpec, SceneTemplate, Span};
use crate::error::Result;
use crate::raster::{GeoRef, RasterGrid};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CLASS_BACKGROUND: u8 = 0;
pub const CLASS_LINEAR: u8 = 1;
pub const CLASS_NON_LINEAR: u8 = 2;

/// Placement retries per element when elements must not touch.
const PLACEMENT_RETRIES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Background,
    Linear,
    Large,
    Medium,
    Tiny,
}

impl Category {
    pub fn class(self) -> u8 {
        match self {
            Category::Background => CLASS_BACKGROUND,
            Category::Linear => CLASS_LINEAR,
            _ => CLASS_NON_LINEAR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineStyle {
    Angular,
    Organic(OrganicDraw),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Canvas,
    Polyline {
        vertices: Vec<Point>,
        width: f64,
        style: LineStyle,
    },
    Patch {
        /// Upper-left pixel of the patch box on the canvas.
        offset: (usize, usize),
        mask: PatchMask,
        /// Vertices in box pixels for polygon patches.
        polygon: Option<Vec<Point>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneElement {
    pub category: Category,
    pub geometry: Geometry,
    /// Position in the render order; later elements overwrite earlier ones.
    pub order: usize,
}

/// A synthetic input mask with its 3-class label.
#[derive(Debug, Clone)]
pub struct Scene {
    pub input: RasterGrid,
    pub label: RasterGrid,
    pub seed: u64,
    pub template_id: String,
    pub elements: Vec<SceneElement>,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, span: Span) -> f64 {
    if span[0] >= span[1] {
        span[0]
    } else {
        rng.random_range(span[0]..=span[1])
    }
}

fn count<R: Rng + ?Sized>(rng: &mut R, span: [usize; 2]) -> usize {
    rng.random_range(span[0]..=span[1])
}

/// Canvas bookkeeping for occlusion-free placement.
struct Occupancy {
    size: usize,
    blocked: Vec<bool>,
    enabled: bool,
}

impl Occupancy {
    fn fits(&self, pixels: &[usize]) -> bool {
        !self.enabled || pixels.iter().all(|&i| !self.blocked[i])
    }

    /// Blocks the pixels and a one-pixel ring around them.
    fn claim(&mut self, pixels: &[usize]) {
        if !self.enabled {
            return;
        }
        let n = self.size as isize;
        for &i in pixels {
            let (x, y) = ((i % self.size) as isize, (i / self.size) as isize);
            for dy in -2..=2 {
                for dx in -2..=2 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && nx < n && ny < n {
                        self.blocked[(ny * n + nx) as usize] = true;
                    }
                }
            }
        }
    }
}

/// Composes a scene: background, then patches (large, medium, tiny), then
/// linear features. Each pixel takes the class of the last element covering it.
pub fn compose_scene(template: &SceneTemplate, seed: u64) -> Result<Scene> {
    template.validate()?;
    let size = template.canvas_size;
    let mut rng = rng::stream(seed, 0);
    let mut occ = Occupancy {
        size,
        blocked: vec![false; size * size],
        enabled: template.occlusion_free,
    };
    let mut elements = vec![SceneElement {
        category: Category::Background,
        geometry: Geometry::Canvas,
        order: 0,
    }];
    let mut label = vec![CLASS_BACKGROUND; size * size];

    for (category, spec) in [
        (Category::Large, &template.large),
        (Category::Medium, &template.medium),
        (Category::Tiny, &template.tiny),
    ] {
        for _ in 0..count(&mut rng, spec.count) {
            for _ in 0..PLACEMENT_RETRIES {
                let (geometry, pixels) = draw_patch(&mut rng, spec, size);
                if pixels.is_empty() || !occ.fits(&pixels) {
                    continue;
                }
                occ.claim(&pixels);
                for &i in &pixels {
                    label[i] = category.class();
                }
                elements.push(SceneElement {
                    category,
                    geometry,
                    order: elements.len(),
                });
                break;
            }
        }
    }

    let lin = &template.linear;
    for _ in 0..count(&mut rng, lin.count) {
        for _ in 0..PLACEMENT_RETRIES {
            let width = uniform(&mut rng, lin.width);
            let (vertices, style) = if rng.random_bool(lin.angular_fraction) {
                (gen_angular_polyline(&mut rng, &lin.angular, size), LineStyle::Angular)
            } else {
                let draw = draw_organic(&mut rng, &lin.organic);
                let v = gen_organic_polyline(&mut rng, &lin.organic, &draw, size);
                (v, LineStyle::Organic(draw))
            };
            let pixels = render_polyline(&vertices, width, size);
            if pixels.is_empty() || !occ.fits(&pixels) {
                continue;
            }
            occ.claim(&pixels);
            for &i in &pixels {
                label[i] = CLASS_LINEAR;
            }
            elements.push(SceneElement {
                category: Category::Linear,
                geometry: Geometry::Polyline { vertices, width, style },
                order: elements.len(),
            });
            break;
        }
    }

    let geo = GeoRef::pixel_space(size);
    let input: Vec<u8> = label.iter().map(|&c| u8::from(c != CLASS_BACKGROUND)).collect();
    Ok(Scene {
        input: RasterGrid::mask(size, size, geo, input)?,
        label: RasterGrid::class(size, size, geo, label)?,
        seed,
        template_id: template.id.clone(),
        elements,
    })
}

fn draw_patch(rng: &mut ChaCha8Rng, spec: &PatchSpec, canvas: usize) -> (Geometry, Vec<usize>) {
    let w = rng.random_range(spec.size[0]..=spec.size[1]).min(canvas);
    let h = rng.random_range(spec.size[0]..=spec.size[1]).min(canvas);
    let offset = (rng.random_range(0..=canvas - w), rng.random_range(0..=canvas - h));
    let polygon = spec.polygon_fraction > 0.0 && rng.random_bool(spec.polygon_fraction);
    let (mask, polygon) = match (&spec.polygon, polygon) {
        (Some(p), true) => {
            let params = PolygonParams {
                width: w,
                height: h,
                vertices: rng.random_range(p.vertices[0]..=p.vertices[1]),
                radius_jitter: uniform(rng, p.radius_jitter),
                angle_jitter: uniform(rng, p.angle_jitter),
                rotation_deg: None,
            };
            let (mask, verts) = gen_polygon_patch(rng, &params);
            (mask, Some(verts))
        }
        _ => {
            let params = FbmParams {
                width: w,
                height: h,
                octaves: rng.random_range(spec.fbm.octaves[0]..=spec.fbm.octaves[1]),
                base_frequency: uniform(rng, spec.fbm.base_frequency),
                coverage: uniform(rng, spec.fbm.coverage),
                falloff: uniform(rng, spec.fbm.falloff),
            };
            (gen_fbm_patch(rng, &params), None)
        }
    };
    let pixels = mask
        .mask
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, _)| (offset.1 + i / w) * canvas + offset.0 + i % w)
        .collect();
    (
        Geometry::Patch {
            offset,
            mask,
            polygon,
        },
        pixels,
    )
}

//! Scene templates: element counts and parameter ranges.
//!
//! Geometric ranges are resolution-bound. At the reference 1024 px canvas the
//! bounds are segment lengths 100–800 px and organic steps 15–20 px; smaller
//! canvases scale both linearly (a 256 px canvas uses 25–200 and 3.75–5).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const REFERENCE_CANVAS: usize = 1024;
pub const DESK_CANVAS: usize = 256;

const SEGMENT_BOUNDS: [f64; 2] = [100.0, 800.0];
const STEP_BOUNDS: [f64; 2] = [15.0, 20.0];
const VARIATION_BOUNDS: [f64; 2] = [10.0, 40.0];
const MAX_TURN: f64 = 120.0;

/// Inclusive range.
pub type Span = [f64; 2];
pub type CountSpan = [usize; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTemplate {
    pub id: String,
    pub canvas_size: usize,
    pub linear: LinearSpec,
    pub large: PatchSpec,
    pub medium: PatchSpec,
    pub tiny: PatchSpec,
    /// Place elements so that no two touch (one-pixel gap at least).
    #[serde(default)]
    pub occlusion_free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSpec {
    pub count: CountSpan,
    /// Probability that a line is angular rather than organic.
    pub angular_fraction: f64,
    /// Stroke width in pixels.
    pub width: Span,
    pub angular: AngularSpec,
    pub organic: OrganicSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpec {
    pub segment_length: Span,
    pub segments: CountSpan,
    /// Allowed turn magnitudes in degrees; the sign is drawn separately.
    pub turn_angles_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganicSpec {
    pub steps: CountSpan,
    pub levels: Vec<CurvatureLevel>,
}

/// A coupled (step size, heading variation) regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureLevel {
    pub name: String,
    pub step_size: Span,
    pub angular_variation_deg: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchSpec {
    pub count: CountSpan,
    /// Side length of the patch bounding box in pixels.
    pub size: CountSpan,
    pub fbm: FbmSpec,
    /// Share of patches drawn as random polygons; large patches only.
    #[serde(default)]
    pub polygon_fraction: f64,
    #[serde(default)]
    pub polygon: Option<PolygonSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FbmSpec {
    pub octaves: [u32; 2],
    /// Lattice cycles across the patch box for the first octave.
    pub base_frequency: Span,
    /// Target foreground fraction of the patch box.
    pub coverage: Span,
    /// Weight of the radial window blended into the noise field.
    pub falloff: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub vertices: CountSpan,
    /// Maximum fractional radius reduction per vertex.
    pub radius_jitter: Span,
    /// Maximum angular jitter as a fraction of the vertex spacing.
    pub angle_jitter: Span,
}

impl SceneTemplate {
    /// `canvas_size / 1024`.
    pub fn scale(&self) -> f64 {
        self.canvas_size as f64 / REFERENCE_CANVAS as f64
    }

    pub fn element_free(id: &str, canvas_size: usize) -> Self {
        let mut t = Self::library(canvas_size).swap_remove(0);
        t.id = id.to_string();
        t.linear.count = [0, 0];
        for p in [&mut t.large, &mut t.medium, &mut t.tiny] {
            p.count = [0, 0];
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("template {}: {m}", self.id)));
        if self.canvas_size < 64 {
            return bad(format!("canvas_size {} < 64", self.canvas_size));
        }
        let s = self.scale();
        let within = |name: &str, span: Span, lo: f64, hi: f64| -> Result<()> {
            let eps = 1e-9 * hi.abs().max(1.0);
            if span[0].is_nan() || span[1].is_nan() || span[0] > span[1] || span[0] < lo - eps || span[1] > hi + eps {
                return Err(Error::InvalidParameter(format!(
                    "template {}: {name} {span:?} outside [{lo}, {hi}]",
                    self.id
                )));
            }
            Ok(())
        };
        let counts = |name: &str, c: CountSpan| -> Result<()> {
            if c[0] > c[1] {
                return Err(Error::InvalidParameter(format!(
                    "template {}: {name} range {c:?} is empty",
                    self.id
                )));
            }
            Ok(())
        };
        let l = &self.linear;
        counts("linear.count", l.count)?;
        within("linear.angular_fraction", [l.angular_fraction; 2], 0.0, 1.0)?;
        within("linear.width", l.width, 1.0, self.canvas_size as f64 / 4.0)?;
        within(
            "angular.segment_length",
            l.angular.segment_length,
            SEGMENT_BOUNDS[0] * s,
            SEGMENT_BOUNDS[1] * s,
        )?;
        if l.angular.segment_length[0] > self.canvas_size as f64 / 2.0 {
            return bad("shortest segment does not fit from the canvas center".into());
        }
        counts("angular.segments", l.angular.segments)?;
        if l.angular.segments[0] == 0 {
            return bad("angular lines need at least one segment".into());
        }
        if l.angular.turn_angles_deg.is_empty()
            || l.angular.turn_angles_deg.iter().any(|a| !(0.0..=MAX_TURN).contains(a))
        {
            return bad(format!("turn angles must be a non-empty subset of [0, {MAX_TURN}]"));
        }
        counts("organic.steps", l.organic.steps)?;
        if l.organic.steps[0] == 0 {
            return bad("organic lines need at least one step".into());
        }
        if l.organic.levels.is_empty() {
            return bad("organic lines need at least one curvature level".into());
        }
        for lvl in &l.organic.levels {
            within("organic.step_size", lvl.step_size, STEP_BOUNDS[0] * s, STEP_BOUNDS[1] * s)?;
            within(
                "organic.angular_variation_deg",
                lvl.angular_variation_deg,
                VARIATION_BOUNDS[0],
                VARIATION_BOUNDS[1],
            )?;
        }
        for (name, p, polygons_ok) in [
            ("large", &self.large, true),
            ("medium", &self.medium, false),
            ("tiny", &self.tiny, false),
        ] {
            counts(&format!("{name}.count"), p.count)?;
            counts(&format!("{name}.size"), p.size)?;
            if p.size[0] == 0 || p.size[1] > self.canvas_size {
                return bad(format!("{name}.size {:?} must lie in [1, canvas]", p.size));
            }
            if p.fbm.octaves[0] == 0 || p.fbm.octaves[0] > p.fbm.octaves[1] {
                return bad(format!("{name}.fbm.octaves {:?}", p.fbm.octaves));
            }
            within(&format!("{name}.fbm.base_frequency"), p.fbm.base_frequency, 0.0, 64.0)?;
            within(&format!("{name}.fbm.coverage"), p.fbm.coverage, 0.0, 1.0)?;
            within(&format!("{name}.fbm.falloff"), p.fbm.falloff, 0.0, 1.0)?;
            within(&format!("{name}.polygon_fraction"), [p.polygon_fraction; 2], 0.0, 1.0)?;
            if p.polygon_fraction > 0.0 {
                if !polygons_ok {
                    return bad(format!("polygon patches are only available for large patches, not {name}"));
                }
                let Some(poly) = &p.polygon else {
                    return bad(format!("{name}.polygon_fraction > 0 without polygon parameters"));
                };
                counts("polygon.vertices", poly.vertices)?;
                if poly.vertices[0] < 3 {
                    return bad("polygons need at least 3 vertices".into());
                }
                within("polygon.radius_jitter", poly.radius_jitter, 0.0, 0.9)?;
                within("polygon.angle_jitter", poly.angle_jitter, 0.0, 0.9)?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: SceneTemplate = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    /// Built-in templates, from sparse agricultural to dense mixed layouts.
    pub fn library(canvas_size: usize) -> Vec<SceneTemplate> {
        let s = canvas_size as f64 / REFERENCE_CANVAS as f64;
        // widths do not shrink below what stays connected after rasterization
        let width = |lo: f64, hi: f64| [(lo * s).max(2.5), (hi * s).max(4.0)];
        let px = |v: f64| ((v * s).round() as usize).max(2);
        let levels = [
            CurvatureLevel {
                name: "low".into(),
                step_size: [19.0 * s, 20.0 * s],
                angular_variation_deg: [10.0, 20.0],
            },
            CurvatureLevel {
                name: "mid".into(),
                step_size: [17.0 * s, 19.0 * s],
                angular_variation_deg: [20.0, 30.0],
            },
            CurvatureLevel {
                name: "high".into(),
                step_size: [15.0 * s, 17.0 * s],
                angular_variation_deg: [30.0, 40.0],
            },
        ];
        let pick = |names: &[&str]| -> Vec<CurvatureLevel> {
            levels.iter().filter(|l| names.contains(&l.name.as_str())).cloned().collect()
        };
        let all_turns: Vec<f64> = (0..=8).map(|k| 15.0 * k as f64).collect();
        let linear = |count: CountSpan, angular_fraction: f64, w: Span, segs: CountSpan, lv: &[&str]| {
            LinearSpec {
                count,
                angular_fraction,
                width: w,
                angular: AngularSpec {
                    segment_length: [100.0 * s, 800.0 * s],
                    segments: segs,
                    turn_angles_deg: all_turns.clone(),
                },
                organic: OrganicSpec {
                    steps: [12, 48],
                    levels: pick(lv),
                },
            }
        };
        let fbm = |coverage: Span| FbmSpec {
            octaves: [4, 6],
            base_frequency: [1.5, 3.0],
            coverage,
            falloff: [0.55, 0.8],
        };
        let patch = |count: CountSpan, lo: f64, hi: f64, coverage: Span| PatchSpec {
            count,
            size: [px(lo), px(hi)],
            fbm: fbm(coverage),
            polygon_fraction: 0.0,
            polygon: None,
        };
        let polygons = |mut p: PatchSpec, fraction: f64| {
            p.polygon_fraction = fraction;
            p.polygon = Some(PolygonSpec {
                vertices: [4, 9],
                radius_jitter: [0.0, 0.35],
                angle_jitter: [0.0, 0.4],
            });
            p
        };
        let t = |id: &str, linear: LinearSpec, large: PatchSpec, medium: PatchSpec, tiny: PatchSpec| {
            SceneTemplate {
                id: id.into(),
                canvas_size,
                linear,
                large,
                medium,
                tiny,
                occlusion_free: false,
            }
        };
        vec![
            t(
                "sparse-agricultural",
                linear([2, 4], 0.8, width(10.0, 16.0), [2, 4], &["low"]),
                polygons(patch([1, 2], 240.0, 400.0, [0.35, 0.5]), 0.7),
                patch([0, 2], 100.0, 180.0, [0.3, 0.45]),
                patch([1, 6], 16.0, 40.0, [0.35, 0.55]),
            ),
            t(
                "hedgerow-network",
                linear([4, 7], 1.0, width(10.0, 18.0), [2, 5], &["low"]),
                polygons(patch([1, 2], 200.0, 360.0, [0.35, 0.5]), 0.5),
                patch([1, 2], 100.0, 180.0, [0.3, 0.45]),
                patch([0, 4], 16.0, 40.0, [0.35, 0.55]),
            ),
            t(
                "riparian-meander",
                linear([2, 4], 0.2, width(12.0, 20.0), [2, 4], &["mid", "high"]),
                patch([1, 2], 240.0, 400.0, [0.35, 0.5]),
                patch([1, 3], 100.0, 180.0, [0.3, 0.45]),
                patch([0, 6], 16.0, 40.0, [0.35, 0.55]),
            ),
            t(
                "forest-edge-mosaic",
                linear([1, 3], 0.5, width(10.0, 18.0), [2, 4], &["low", "mid"]),
                patch([2, 3], 280.0, 440.0, [0.4, 0.55]),
                patch([1, 3], 100.0, 180.0, [0.3, 0.45]),
                patch([2, 8], 16.0, 40.0, [0.35, 0.55]),
            ),
            t(
                "orchard-polygons",
                linear([2, 4], 0.9, width(10.0, 14.0), [2, 3], &["low"]),
                polygons(patch([2, 3], 200.0, 320.0, [0.35, 0.5]), 1.0),
                patch([0, 1], 100.0, 160.0, [0.3, 0.45]),
                patch([2, 8], 16.0, 36.0, [0.35, 0.55]),
            ),
            t(
                "tree-rows",
                linear([3, 6], 0.3, width(10.0, 14.0), [2, 4], &["low"]),
                patch([0, 1], 200.0, 320.0, [0.35, 0.5]),
                patch([1, 2], 100.0, 160.0, [0.3, 0.45]),
                patch([2, 8], 16.0, 36.0, [0.35, 0.55]),
            ),
            t(
                "dense-mixed",
                linear([4, 8], 0.5, width(10.0, 20.0), [2, 5], &["low", "mid", "high"]),
                polygons(patch([2, 3], 200.0, 360.0, [0.35, 0.55]), 0.3),
                patch([2, 4], 100.0, 180.0, [0.3, 0.45]),
                patch([4, 10], 16.0, 40.0, [0.35, 0.55]),
            ),
        ]
    }

    pub fn by_name(name: &str, canvas_size: usize) -> Result<SceneTemplate> {
        Self::library(canvas_size)
            .into_iter()
            .find(|t| t.id == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown template {name:?}")))
    }
}

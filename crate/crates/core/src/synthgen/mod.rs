//! Synthetic scenes: a binary input mask and a 3-class label
//! (0 background, 1 linear, 2 non-linear) drawn from a template.

pub mod dataset;
pub mod patch;
pub mod polyline;
pub mod scene;
pub mod template;

pub use dataset::{generate_dataset, DatasetConfig, Manifest, ManifestEntry, TemplateRef, MANIFEST_FILE};
pub use patch::{gen_fbm_patch, gen_polygon_patch, is_simple_polygon, FbmParams, PatchMask, PolygonParams};
pub use polyline::{gen_angular_polyline, gen_organic_polyline, render_polyline, OrganicDraw, Point};
pub use scene::{
    compose_scene, Category, Geometry, LineStyle, Scene, SceneElement, CLASS_BACKGROUND, CLASS_LINEAR,
    CLASS_NON_LINEAR,
};
pub use template::SceneTemplate;

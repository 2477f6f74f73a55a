use crate::error::{Error, Result};
use crate::maskproc::DEFAULT_HEIGHT_THRESHOLD;
use crate::separator::{DEFAULT_MAX_DIST, DEFAULT_RATIO_THRESHOLD};
use crate::skeleval::DEFAULT_TAU_MAX;
use crate::synthgen::template::DESK_CANVAS;
use crate::synthgen::TemplateRef;
use crate::tiling::DEFAULT_MIN_AREA;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Synthgen,
    Maskproc,
    Separate,
    Postprocess,
    Evaluate,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Synthgen => "synthgen",
            Stage::Maskproc => "maskproc",
            Stage::Separate => "separate",
            Stage::Postprocess => "postprocess",
            Stage::Evaluate => "evaluate",
        }
    }
}

/// A run description. Relative paths resolve against the config file's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 means one per core.
    #[serde(default)]
    pub workers: usize,
    pub out_dir: PathBuf,
    pub stages: Vec<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthgen: Option<SynthgenStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maskproc: Option<MaskprocStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separate: Option<SeparateStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postprocess: Option<PostprocessStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluate: Option<EvaluateStage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthgenStage {
    pub count: usize,
    #[serde(default = "desk_canvas")]
    pub canvas_size: usize,
    #[serde(default)]
    pub templates: Vec<TemplateRef>,
    #[serde(default)]
    pub occlusion_free: bool,
    #[serde(default)]
    pub skeleton_labels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileSpec {
    pub id: String,
    pub dsm: PathBuf,
    pub dtm: PathBuf,
    #[serde(default)]
    pub red: Option<PathBuf>,
    #[serde(default)]
    pub nir: Option<PathBuf>,
    /// GeoJSON footprints or a mask8 raster on the height grid.
    #[serde(default)]
    pub buildings: Option<PathBuf>,
    /// TileMeta JSON.
    pub meta: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChmSpec {
    pub path: PathBuf,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskprocStage {
    #[serde(default)]
    pub tiles: Vec<TileSpec>,
    #[serde(default = "height_threshold")]
    pub height_threshold: f64,
    #[serde(default)]
    pub chm: Option<ChmSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparateStage {
    /// Mask raster or tile catalog; defaults to the previous stage's output.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// `baseline` or `external:<command>`.
    #[serde(default = "baseline")]
    pub separator: String,
    /// Defaults to 1024, or the scene size for synthetic scenes.
    #[serde(default)]
    pub chip_size: Option<usize>,
    #[serde(default = "batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub refine_skeleton: bool,
    #[serde(default = "max_dist")]
    pub max_dist: f64,
    #[serde(default = "ratio_threshold")]
    pub ratio_threshold: f64,
}

impl Default for SeparateStage {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostprocessStage {
    /// GeoJSON predictions; defaults to the separate stage's polygons.
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "min_area")]
    pub min_area: f64,
    #[serde(default)]
    pub erase: Vec<PathBuf>,
    #[serde(default)]
    pub boundary: Option<PathBuf>,
}

impl Default for PostprocessStage {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPair {
    pub site: String,
    pub product: String,
    pub gt: PathBuf,
    pub pred: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateStage {
    /// Explicit pairs; when empty, synthetic scenes are scored against
    /// their labels.
    #[serde(default)]
    pub pairs: Vec<EvalPair>,
    /// Common grid pixel size; vector inputs are burned at this size.
    #[serde(default)]
    pub grid: Option<f64>,
    #[serde(default = "tau_max")]
    pub tau_max: u32,
    /// Class scored in class rasters and class-tagged polygons.
    #[serde(default = "linear_class")]
    pub class: u8,
    #[serde(default)]
    pub plots: bool,
}

impl Default for EvaluateStage {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn desk_canvas() -> usize {
    DESK_CANVAS
}
fn height_threshold() -> f64 {
    DEFAULT_HEIGHT_THRESHOLD
}
fn baseline() -> String {
    "baseline".into()
}
fn batch_size() -> usize {
    4
}
fn max_dist() -> f64 {
    DEFAULT_MAX_DIST
}
fn ratio_threshold() -> f64 {
    DEFAULT_RATIO_THRESHOLD
}
fn min_area() -> f64 {
    DEFAULT_MIN_AREA
}
fn tau_max() -> u32 {
    DEFAULT_TAU_MAX
}
fn linear_class() -> u8 {
    1
}

impl PipelineConfig {
    /// Parses and validates; every failure is a [`Error::Schema`].
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Schema(m));
        if self.stages.is_empty() {
            return bad("`stages` must name at least one stage".into());
        }
        for (i, s) in self.stages.iter().enumerate() {
            if self.stages[..i].contains(s) {
                return bad(format!("stage `{}` is listed twice", s.name()));
            }
        }
        let has = |s: Stage| self.stages.contains(&s);
        if has(Stage::Synthgen) {
            match &self.synthgen {
                None => return bad("stage `synthgen` needs a `synthgen` section".into()),
                Some(s) if s.count == 0 => return bad("`synthgen.count` must be at least 1".into()),
                _ => {}
            }
        }
        if has(Stage::Maskproc) {
            match &self.maskproc {
                None => return bad("stage `maskproc` needs a `maskproc` section".into()),
                Some(m) if m.tiles.is_empty() && m.chm.is_none() => {
                    return bad("`maskproc` needs `tiles` or `chm`".into())
                }
                _ => {}
            }
        }
        if has(Stage::Separate) {
            let s = self.separate.clone().unwrap_or_default();
            if s.input.is_none() && !has(Stage::Synthgen) && !has(Stage::Maskproc) {
                return bad("`separate.input` is required without a synthgen or maskproc stage".into());
            }
            if s.separator != "baseline" && !s.separator.starts_with("external:") {
                return bad(format!("unknown separator {:?}", s.separator));
            }
            if s.chip_size.is_some_and(|c| c < 4 || !c.is_multiple_of(4)) {
                return bad("`separate.chip_size` must be a positive multiple of 4".into());
            }
        }
        if has(Stage::Postprocess) {
            let p = self.postprocess.clone().unwrap_or_default();
            if p.input.is_none() && !has(Stage::Separate) {
                return bad("`postprocess.input` is required without a separate stage".into());
            }
        }
        if has(Stage::Evaluate) {
            let e = self.evaluate.clone().unwrap_or_default();
            if e.pairs.is_empty() && !(has(Stage::Synthgen) && has(Stage::Separate)) {
                return bad("`evaluate.pairs` is required unless synthgen and separate run".into());
            }
            if e.grid.is_some_and(|g| g.is_nan() || g <= 0.0) {
                return bad("`evaluate.grid` must be positive".into());
            }
        }
        Ok(())
    }
}

/// Built-in presets.
pub fn demo_config(name: &str, out_dir: &Path, seed: u64) -> Result<PipelineConfig> {
    match name {
        "synthetic-eval" => Ok(PipelineConfig {
            seed,
            workers: 0,
            out_dir: out_dir.to_path_buf(),
            stages: vec![Stage::Synthgen, Stage::Separate, Stage::Evaluate],
            synthgen: Some(SynthgenStage {
                count: 50,
                canvas_size: DESK_CANVAS,
                templates: Vec::new(),
                occlusion_free: true,
                skeleton_labels: false,
            }),
            maskproc: None,
            separate: Some(SeparateStage::default()),
            postprocess: None,
            evaluate: Some(EvaluateStage {
                plots: true,
                ..EvaluateStage::default()
            }),
        }),
        other => Err(Error::InvalidParameter(format!(
            "unknown demo {other:?}; available: synthetic-eval"
        ))),
    }
}

use super::scene::{compose_scene, CLASS_LINEAR};
use super::template::{SceneTemplate, DESK_CANVAS};
use crate::error::{Error, Result};
use crate::morphology::skeletonize_pixels;
use crate::raster::{write_raster, RasterGrid};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

/// A library template by name, or a full inline template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemplateRef {
    Name(String),
    Inline(Box<SceneTemplate>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub seed: u64,
    #[serde(default = "default_canvas")]
    pub canvas_size: usize,
    /// Used round-robin; empty means the whole library.
    #[serde(default)]
    pub templates: Vec<TemplateRef>,
    #[serde(default)]
    pub occlusion_free: bool,
    /// Also write a skeleton of the class-1 regions per scene.
    #[serde(default)]
    pub skeleton_labels: bool,
}

fn default_canvas() -> usize {
    DESK_CANVAS
}

impl DatasetConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            canvas_size: DESK_CANVAS,
            templates: Vec::new(),
            occlusion_free: false,
            skeleton_labels: false,
        }
    }

    pub fn resolve_templates(&self) -> Result<Vec<SceneTemplate>> {
        let mut out = if self.templates.is_empty() {
            SceneTemplate::library(self.canvas_size)
        } else {
            self.templates
                .iter()
                .map(|t| match t {
                    TemplateRef::Name(n) => SceneTemplate::by_name(n, self.canvas_size),
                    TemplateRef::Inline(t) => Ok((**t).clone()),
                })
                .collect::<Result<Vec<_>>>()?
        };
        for t in &mut out {
            t.occlusion_free |= self.occlusion_free;
            t.validate()?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub input: PathBuf,
    pub label: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skeleton: Option<PathBuf>,
    pub seed: u64,
    pub template_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub canvas_size: usize,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Template and seed of scene `index`. Independent of every other scene.
pub fn scene_spec(templates: &[SceneTemplate], seed: u64, index: usize) -> (&SceneTemplate, u64) {
    (&templates[index % templates.len()], rng::item_seed(seed, index as u64))
}

/// Writes `n` scenes plus `manifest.json` into `out_dir`. Paths in the
/// manifest are relative to `out_dir`.
pub fn generate_dataset(config: &DatasetConfig, n: usize, out_dir: &Path) -> Result<Manifest> {
    if n == 0 {
        return Err(Error::InvalidParameter("dataset size must be at least 1".into()));
    }
    let templates = config.resolve_templates()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let entries = (0..n)
        .into_par_iter()
        .map(|index| {
            let (template, seed) = scene_spec(&templates, config.seed, index);
            let scene = compose_scene(template, seed)?;
            let stem = format!("scene_{index:06}");
            let input = PathBuf::from(format!("{stem}.input.pgm"));
            let label = PathBuf::from(format!("{stem}.label.pgm"));
            write_raster(&scene.input, out_dir.join(&input))?;
            write_raster(&scene.label, out_dir.join(&label))?;
            let skeleton = if config.skeleton_labels {
                let size = template.canvas_size;
                let lin: Vec<u8> = scene
                    .label
                    .class_pixels()?
                    .iter()
                    .map(|&c| u8::from(c == CLASS_LINEAR))
                    .collect();
                let skel = skeletonize_pixels(&lin, size, size);
                let grid = RasterGrid::mask(size, size, *scene.input.georef(), skel)?;
                let path = PathBuf::from(format!("{stem}.skeleton.pgm"));
                write_raster(&grid, out_dir.join(&path))?;
                Some(path)
            } else {
                None
            };
            Ok(ManifestEntry {
                index,
                input,
                label,
                skeleton,
                seed,
                template_id: scene.template_id,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        seed: config.seed,
        canvas_size: config.canvas_size,
        entries,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::read_raster;

    #[test]
    fn single_scene_writes_two_rasters() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_dataset(&DatasetConfig::new(1), 1, dir.path()).unwrap();
        assert_eq!(m.entries.len(), 1);
        let rasters = std::fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pgm"))
            .count();
        assert_eq!(rasters, 2);
        assert_eq!(Manifest::read(&dir.path().join(MANIFEST_FILE)).unwrap(), m);
    }

    #[test]
    fn zero_scenes_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(generate_dataset(&DatasetConfig::new(1), 0, dir.path()).is_err());
    }

    #[test]
    fn scenes_satisfy_support_invariant() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = DatasetConfig::new(8);
        cfg.skeleton_labels = true;
        let m = generate_dataset(&cfg, 20, dir.path()).unwrap();
        for e in &m.entries {
            let inp = read_raster(&dir.path().join(&e.input)).unwrap();
            let lab = read_raster(&dir.path().join(&e.label)).unwrap();
            let skel = read_raster(&dir.path().join(e.skeleton.as_ref().unwrap())).unwrap();
            let (i, l, s) = (
                inp.mask_pixels().unwrap(),
                lab.class_pixels().unwrap(),
                skel.mask_pixels().unwrap(),
            );
            assert!(i.iter().zip(l).all(|(&a, &b)| a == u8::from(b != 0)));
            assert!(l.iter().all(|&c| c <= 2));
            assert!(s.iter().zip(l).all(|(&s, &c)| s == 0 || c == CLASS_LINEAR));
        }
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"seed": 4, "templates": ["tree-rows", "dense-mixed"]}"#;
        let cfg: DatasetConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.canvas_size, DESK_CANVAS);
        let t = cfg.resolve_templates().unwrap();
        assert_eq!(t[1].id, "dense-mixed");
        assert!(serde_json::from_str::<DatasetConfig>(r#"{"seed": 1, "bogus": 2}"#).is_err());
    }
}

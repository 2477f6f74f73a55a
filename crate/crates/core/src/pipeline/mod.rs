//! Config-driven orchestration of the stages, with one JSON record per
//! finished stage.

mod config;

pub use config::{
    demo_config, ChmSpec, EvalPair, EvaluateStage, MaskprocStage, PipelineConfig, PostprocessStage, SeparateStage,
    Stage, SynthgenStage, TileSpec,
};

use crate::error::{Error, Result};
use crate::maskproc::{building_mask, load_chm_mask, process_tiles, MaskParams, TileInputs, TileMeta};
use crate::raster::{read_raster, rasterize, write_raster, Band, GeoRef, GridCatalog, PolygonSet, RasterGrid};
use crate::rng::derive_seed;
use crate::separator::{BaselineSeparator, ExternalSeparator, Separator};
use crate::skeleval::{component_accuracy, report, write_plots, SiteInput};
use crate::synthgen::{generate_dataset, DatasetConfig, Manifest};
use crate::tiling::{postprocess, run, vectorize, RunParams, DEFAULT_CHIP};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const RUN_LOG: &str = "run.jsonl";

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub duration_s: f64,
    pub decisions: Value,
}

/// Builds a separator from `baseline` or `external:<command>`.
pub fn make_separator(spec: &str, ratio_threshold: f64) -> Result<Box<dyn Separator>> {
    if spec == "baseline" {
        Ok(Box::new(BaselineSeparator { ratio_threshold }))
    } else if let Some(cmd) = spec.strip_prefix("external:") {
        Ok(Box::new(ExternalSeparator::parse(cmd)?))
    } else {
        Err(Error::InvalidParameter(format!(
            "unknown separator {spec:?}; use `baseline` or `external:<command>`"
        )))
    }
}

/// Reads a mask raster, or the mosaic of a tile catalog (`.json`).
pub fn load_mask(path: &Path) -> Result<RasterGrid> {
    let grid = if path.extension().is_some_and(|e| e == "json") {
        GridCatalog::read(path)?.mosaic()?
    } else {
        read_raster(path)?
    };
    grid.mask_pixels()?;
    Ok(grid)
}

/// Building footprints as GeoJSON, or a mask raster on the height grid.
pub fn load_buildings(path: &Path, template: &RasterGrid) -> Result<RasterGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let grid = if ext == "geojson" || ext == "json" {
        building_mask(&PolygonSet::read(path)?, template)?
    } else {
        read_raster(path)?
    };
    template.require_same_grid(&grid, "building mask")?;
    grid.mask_pixels()?;
    Ok(grid)
}

/// Reads every layer and merges them into one set. Layers must agree on CRS.
pub fn load_layers(paths: &[PathBuf]) -> Result<PolygonSet> {
    let mut out = PolygonSet::new(None, Vec::new());
    for p in paths {
        let layer = PolygonSet::read(p)?;
        match (out.epsg, layer.epsg) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::InvalidGeometry(format!(
                    "{} is in EPSG:{b}, earlier layers in EPSG:{a}",
                    p.display()
                )))
            }
            (None, e) => out.epsg = e,
            _ => {}
        }
        out.polygons.extend(layer.polygons);
    }
    Ok(out)
}

/// An evaluation input: a raster or class-tagged polygons.
enum EvalLayer {
    Raster(RasterGrid),
    Vector(PolygonSet),
}

fn read_layer(path: &Path) -> Result<EvalLayer> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext == "geojson" || ext == "json" {
        Ok(EvalLayer::Vector(PolygonSet::read(path)?))
    } else {
        Ok(EvalLayer::Raster(read_raster(path)?))
    }
}

/// Binary mask of `class`: mask rasters pass through, class rasters are
/// compared, polygons are filtered by `cls` (untagged polygons count) and
/// burned onto `grid`.
fn binary(layer: &EvalLayer, class: u8, grid: &RasterGrid) -> Result<RasterGrid> {
    match layer {
        EvalLayer::Raster(r) => {
            grid.require_same_grid(r, "evaluation input")?;
            let px: Vec<u8> = match r.band() {
                Band::Mask8 => r.mask_pixels()?.to_vec(),
                Band::Class8 => r.class_pixels()?.iter().map(|&c| u8::from(c == class)).collect(),
                b => {
                    return Err(Error::InvalidRaster(format!(
                        "cannot evaluate a {b:?} raster; expected a mask or class raster"
                    )))
                }
            };
            RasterGrid::mask(r.width(), r.height(), *r.georef(), px)
        }
        EvalLayer::Vector(v) => {
            let sub = PolygonSet::new(
                v.epsg,
                v.polygons.iter().filter(|p| p.cls.is_none_or(|c| c == class)).cloned().collect(),
            );
            rasterize(&sub, grid)
        }
    }
}

/// The common grid of a pair: the raster's grid, or for two vector layers
/// the pixel-aligned union of their extents at `pixel_size`.
fn eval_grid(gt: &EvalLayer, pred: &EvalLayer, pixel_size: Option<f64>) -> Result<RasterGrid> {
    for layer in [gt, pred] {
        if let EvalLayer::Raster(r) = layer {
            if let Some(ps) = pixel_size {
                if r.georef().pixel_size != ps {
                    return Err(Error::GridMismatch(format!(
                        "raster pixel size {} differs from the evaluation grid {ps}",
                        r.georef().pixel_size
                    )));
                }
            }
            return Ok(r.zeros_like(Band::Mask8));
        }
    }
    let ps = pixel_size.ok_or_else(|| {
        Error::InvalidParameter("two vector inputs need an evaluation grid pixel size".into())
    })?;
    let (EvalLayer::Vector(a), EvalLayer::Vector(b)) = (gt, pred) else {
        unreachable!("raster inputs returned above")
    };
    if let (Some(x), Some(y)) = (a.epsg, b.epsg) {
        if x != y {
            return Err(Error::GridMismatch(format!("EPSG:{x} against EPSG:{y}")));
        }
    }
    let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in a.polygons.iter().chain(&b.polygons) {
        let r = p.exterior.bbox();
        bb = [bb[0].min(r[0]), bb[1].min(r[1]), bb[2].max(r[2]), bb[3].max(r[3])];
    }
    if !bb.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidGeometry("both evaluation layers are empty".into()));
    }
    let x0 = (bb[0] / ps).floor() * ps;
    let y1 = (bb[3] / ps).ceil() * ps;
    let w = ((bb[2] - x0) / ps).ceil().max(1.0) as usize;
    let h = ((y1 - bb[1]) / ps).ceil().max(1.0) as usize;
    let geo = GeoRef {
        origin_x: x0,
        origin_y: y1,
        pixel_size: ps,
        epsg: a.epsg.or(b.epsg).unwrap_or(0),
    };
    RasterGrid::mask(w, h, geo, vec![0; w * h])
}

/// Loads one ground truth / prediction pair onto a common grid.
pub fn load_eval_pair(gt: &Path, pred: &Path, class: u8, pixel_size: Option<f64>) -> Result<(RasterGrid, RasterGrid)> {
    let (g, p) = (read_layer(gt)?, read_layer(pred)?);
    let grid = eval_grid(&g, &p, pixel_size)?;
    Ok((binary(&g, class, &grid)?, binary(&p, class, &grid)?))
}

/// Per-scene result of the separate stage.
struct ScenePred {
    site: String,
    input: PathBuf,
    label: PathBuf,
    pred: PathBuf,
}

#[derive(Default)]
struct Context {
    dataset: Option<(PathBuf, Manifest)>,
    mask_source: Option<PathBuf>,
    scenes: Vec<ScenePred>,
    polygons: Option<PathBuf>,
    separator_name: Option<String>,
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    base: PathBuf,
    out: PathBuf,
    ctx: Context,
}

type StageOutput = (Vec<PathBuf>, Vec<PathBuf>, Value);

impl Runner<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        resolve(&self.base, p)
    }

    fn synthgen(&mut self) -> Result<StageOutput> {
        let s = self.cfg.synthgen.as_ref().expect("validated");
        let dir = self.out.join("synthgen");
        let config = DatasetConfig {
            seed: derive_seed(self.cfg.seed, Stage::Synthgen.name()),
            canvas_size: s.canvas_size,
            templates: s.templates.clone(),
            occlusion_free: s.occlusion_free,
            skeleton_labels: s.skeleton_labels,
        };
        let manifest = generate_dataset(&config, s.count, &dir)?;
        let mut templates: Vec<&str> = Vec::new();
        for e in &manifest.entries {
            if !templates.contains(&e.template_id.as_str()) {
                templates.push(&e.template_id);
            }
        }
        let decisions = json!({"seed": config.seed, "scenes": s.count, "templates": templates});
        self.ctx.dataset = Some((dir.clone(), manifest));
        Ok((vec![], vec![dir.join(crate::synthgen::MANIFEST_FILE)], decisions))
    }

    fn maskproc(&mut self) -> Result<StageOutput> {
        let m = self.cfg.maskproc.as_ref().expect("validated");
        let dir = self.out.join("maskproc");
        mkdir(&dir)?;
        let mut inputs = Vec::new();
        let mut catalog = GridCatalog {
            epsg: 0,
            entries: Vec::new(),
        };
        let mut decisions = Vec::new();
        if let Some(chm) = &m.chm {
            let path = self.path(&chm.path);
            let mask = load_chm_mask(&path, chm.threshold)?;
            let file = PathBuf::from("chm.woody.pgm");
            write_raster(&mask, dir.join(&file))?;
            catalog.epsg = mask.georef().epsg;
            catalog.entries.push(GridCatalog::entry_for(file, &mask));
            decisions.push(json!({"tile": "chm", "threshold": chm.threshold}));
            inputs.push(path);
        }
        let tiles = m
            .tiles
            .iter()
            .map(|t| self.load_tile(t, &mut inputs))
            .collect::<Result<Vec<_>>>()?;
        let params = MaskParams {
            height_threshold: m.height_threshold,
        };
        let results = process_tiles(&tiles, &params).map_err(|e| match e {
            Error::Tile { .. } => e,
            other => Error::Tile {
                tile: "maskproc".into(),
                reason: other.to_string(),
            },
        })?;
        for (t, r) in tiles.iter().zip(&results) {
            let file = PathBuf::from(format!("{}.woody.pgm", t.id));
            write_raster(&r.woody, dir.join(&file))?;
            catalog.epsg = r.woody.georef().epsg;
            catalog.entries.push(GridCatalog::entry_for(file, &r.woody));
            decisions.push(serde_json::to_value(&r.log)?);
        }
        let cat_path = dir.join("woody.catalog.json");
        catalog.write(&cat_path)?;
        let log_path = dir.join("decisions.json");
        std::fs::write(&log_path, serde_json::to_vec_pretty(&decisions)?).map_err(|e| Error::io(&log_path, e))?;
        self.ctx.mask_source = Some(cat_path.clone());
        Ok((inputs, vec![cat_path, log_path], Value::Array(decisions)))
    }

    fn load_tile(&self, t: &TileSpec, inputs: &mut Vec<PathBuf>) -> Result<TileInputs> {
        let wrap = |e: Error| Error::Tile {
            tile: t.id.clone(),
            reason: e.to_string(),
        };
        let mut read = |p: &Path| {
            let p = self.path(p);
            inputs.push(p.clone());
            read_raster(&p).map_err(wrap)
        };
        let dsm = read(&t.dsm)?;
        let dtm = read(&t.dtm)?;
        let red = t.red.as_deref().map(&mut read).transpose()?;
        let nir = t.nir.as_deref().map(&mut read).transpose()?;
        let buildings = match &t.buildings {
            Some(b) => {
                let p = self.path(b);
                inputs.push(p.clone());
                load_buildings(&p, &dsm).map_err(wrap)?
            }
            None => dsm.zeros_like(Band::Mask8),
        };
        let meta_path = self.path(&t.meta);
        inputs.push(meta_path.clone());
        let meta = TileMeta::read(&meta_path).map_err(wrap)?;
        Ok(TileInputs {
            id: t.id.clone(),
            dsm,
            dtm,
            red,
            nir,
            buildings,
            meta,
        })
    }

    fn separate(&mut self) -> Result<StageOutput> {
        let s = self.cfg.separate.clone().unwrap_or_default();
        let separator = make_separator(&s.separator, s.ratio_threshold)?;
        self.ctx.separator_name = Some(separator.name());
        let dir = self.out.join("separate");
        mkdir(&dir)?;
        let params = |default_chip: usize| RunParams {
            chip_size: s.chip_size.unwrap_or(default_chip),
            workers: 0,
            batch_size: s.batch_size,
            refine_max_dist: s.refine_skeleton.then_some(s.max_dist),
        };
        let source = s.input.as_ref().map(|p| self.path(p)).or_else(|| self.ctx.mask_source.clone());
        if let Some(src) = source {
            let mask = load_mask(&src)?;
            let classes = run(separator.as_ref(), &mask, &params(DEFAULT_CHIP))?;
            let raster = dir.join("classes.pgm");
            write_raster(&classes, &raster)?;
            let polys = vectorize(&classes)?;
            let vector = dir.join("classes.geojson");
            polys.write(&vector)?;
            let decisions = json!({
                "separator": separator.name(),
                "polygons": polys.len(),
                "linear": polys.polygons.iter().filter(|p| p.cls == Some(1)).count(),
            });
            self.ctx.polygons = Some(vector.clone());
            return Ok((vec![src], vec![raster, vector], decisions));
        }

        let (scene_dir, manifest) = self.ctx.dataset.as_ref().expect("validated");
        let p = params(manifest.canvas_size.div_ceil(4) * 4);
        let scored = manifest
            .entries
            .par_iter()
            .map(|e| {
                let input_path = scene_dir.join(&e.input);
                let label_path = scene_dir.join(&e.label);
                let mask = read_raster(&input_path)?;
                let classes = run(separator.as_ref(), &mask, &p)?;
                let stem = format!("scene_{:06}", e.index);
                let pred = dir.join(format!("{stem}.pred.pgm"));
                write_raster(&classes, &pred)?;
                let label = read_raster(&label_path)?;
                let score = component_accuracy(
                    mask.mask_pixels()?,
                    label.class_pixels()?,
                    classes.class_pixels()?,
                    mask.width(),
                    mask.height(),
                )?;
                Ok((
                    ScenePred {
                        site: stem,
                        input: input_path,
                        label: label_path,
                        pred,
                    },
                    score,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let (correct, total) = scored.iter().fold((0, 0), |(c, t), (_, s)| (c + s.correct, t + s.total));
        let decisions = json!({
            "separator": separator.name(),
            "scenes": scored.len(),
            "components": total,
            "components_correct": correct,
        });
        let inputs = scored.iter().map(|(s, _)| s.input.clone()).collect();
        self.ctx.scenes = scored.into_iter().map(|(s, _)| s).collect();
        let outputs = self.ctx.scenes.iter().map(|s| s.pred.clone()).collect();
        Ok((inputs, outputs, decisions))
    }

    fn postprocess(&mut self) -> Result<StageOutput> {
        let p = self.cfg.postprocess.clone().unwrap_or_default();
        let input = match (&p.input, &self.ctx.polygons) {
            (Some(i), _) => self.path(i),
            (None, Some(v)) => v.clone(),
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "postprocess needs polygons; synthetic scenes produce none".into(),
                ))
            }
        };
        let polys = PolygonSet::read(&input)?;
        let erase_paths: Vec<PathBuf> = p.erase.iter().map(|e| self.path(e)).collect();
        let erase = load_layers(&erase_paths)?;
        let boundary_path = p.boundary.as_ref().map(|b| self.path(b));
        let boundary = boundary_path.as_deref().map(PolygonSet::read).transpose()?;
        let out = postprocess(&polys, p.min_area, &erase, boundary.as_ref())?;
        let dir = self.out.join("postprocess");
        mkdir(&dir)?;
        let path = dir.join("filtered.geojson");
        out.write(&path)?;
        let mut inputs = vec![input];
        inputs.extend(erase_paths);
        inputs.extend(boundary_path);
        let decisions = json!({"min_area": p.min_area, "polygons_in": polys.len(), "polygons_out": out.len()});
        self.ctx.polygons = Some(path.clone());
        Ok((inputs, vec![path], decisions))
    }

    fn evaluate(&mut self) -> Result<StageOutput> {
        let e = self.cfg.evaluate.clone().unwrap_or_default();
        let mut inputs = Vec::new();
        let sites = if e.pairs.is_empty() {
            let product = self.ctx.separator_name.clone().unwrap_or_else(|| "prediction".into());
            self.ctx
                .scenes
                .par_iter()
                .map(|s| {
                    let (gt, pred) = load_eval_pair(&s.label, &s.pred, e.class, e.grid)?;
                    Ok(SiteInput {
                        site: s.site.clone(),
                        product: product.clone(),
                        gt,
                        pred,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            e.pairs
                .iter()
                .map(|p| {
                    let (g, q) = (self.path(&p.gt), self.path(&p.pred));
                    inputs.push(g.clone());
                    inputs.push(q.clone());
                    let (gt, pred) = load_eval_pair(&g, &q, e.class, e.grid)?;
                    Ok(SiteInput {
                        site: p.site.clone(),
                        product: p.product.clone(),
                        gt,
                        pred,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        if sites.is_empty() {
            return Err(Error::InvalidParameter("nothing to evaluate".into()));
        }
        for s in &self.ctx.scenes {
            inputs.push(s.label.clone());
            inputs.push(s.pred.clone());
        }
        let r = report(&sites, e.tau_max)?;
        let dir = self.out.join("evaluate");
        mkdir(&dir)?;
        let path = dir.join("report.json");
        r.write(&path)?;
        let mut outputs = vec![path];
        if e.plots {
            outputs.extend(write_plots(&r, &dir.join("plots"))?);
        }
        let decisions = json!({"tau_max": e.tau_max, "class": e.class, "entries": r.entries.len()});
        Ok((inputs, outputs, decisions))
    }
}

/// Runs the configured stages in order. Relative paths resolve against
/// `base`. Every finished stage is appended to `<out_dir>/run.jsonl` and
/// handed to `on_record`.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    base: &Path,
    on_record: &mut (dyn FnMut(&StageRecord) + Send),
) -> Result<Vec<StageRecord>> {
    cfg.validate()?;
    let out = resolve(base, &cfg.out_dir);
    mkdir(&out)?;
    let log_path = out.join(RUN_LOG);
    let mut log = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let mut runner = Runner {
        cfg,
        base: base.to_path_buf(),
        out,
        ctx: Context::default(),
    };
    let mut records = Vec::new();
    let mut body = || -> Result<()> {
        for &stage in &cfg.stages {
            log::info!("stage {}", stage.name());
            let t = Instant::now();
            let (inputs, outputs, decisions) = match stage {
                Stage::Synthgen => runner.synthgen(),
                Stage::Maskproc => runner.maskproc(),
                Stage::Separate => runner.separate(),
                Stage::Postprocess => runner.postprocess(),
                Stage::Evaluate => runner.evaluate(),
            }?;
            let rec = StageRecord {
                stage,
                inputs,
                outputs,
                duration_s: t.elapsed().as_secs_f64(),
                decisions,
            };
            let line = serde_json::to_string(&rec)?;
            writeln!(log, "{line}").map_err(|e| Error::io(&log_path, e))?;
            on_record(&rec);
            records.push(rec);
        }
        Ok(())
    };
    if cfg.workers == 0 {
        body()?;
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
            .install(body)?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(out: &Path, seed: u64, workers: usize) -> PipelineConfig {
        let mut c = demo_config("synthetic-eval", out, seed).unwrap();
        c.synthgen.as_mut().unwrap().count = 4;
        c.synthgen.as_mut().unwrap().canvas_size = 128;
        c.workers = workers;
        c
    }

    #[test]
    fn synthetic_run_logs_every_stage() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = synthetic(Path::new("out"), 5, 2);
        let mut seen = Vec::new();
        let recs = run_pipeline(&cfg, dir.path(), &mut |r| seen.push(r.stage)).unwrap();
        assert_eq!(seen, vec![Stage::Synthgen, Stage::Separate, Stage::Evaluate]);
        let log = std::fs::read_to_string(dir.path().join("out").join(RUN_LOG)).unwrap();
        let parsed: Vec<StageRecord> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(parsed, recs);
        let report = crate::skeleval::EvalReport::read(&dir.path().join("out/evaluate/report.json")).unwrap();
        assert_eq!(report.entries.len(), 4);
        assert!(dir.path().join("out/evaluate/plots/scene_000000.svg").exists());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_pipeline(&synthetic(Path::new("o"), 9, 1), a.path(), &mut |_| {}).unwrap();
        run_pipeline(&synthetic(Path::new("o"), 9, 3), b.path(), &mut |_| {}).unwrap();
        let read = |d: &Path| std::fs::read(d.join("o/evaluate/report.json")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
    }

    #[test]
    fn mask_chain_through_postprocess() {
        let dir = tempfile::tempdir().unwrap();
        let geo = GeoRef {
            origin_x: 1000.0,
            origin_y: 2000.0,
            pixel_size: 1.0,
            epsg: 25832,
        };
        // a long hedge and a 30x30 grove on a 96x96 canopy height model
        let (w, h) = (96usize, 96usize);
        let chm: Vec<f32> = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                let hedge = (10..13).contains(&y) && (5..90).contains(&x);
                let grove = (40..70).contains(&y) && (40..70).contains(&x);
                if hedge || grove {
                    6.0
                } else {
                    0.5
                }
            })
            .collect();
        let chm = RasterGrid::float(w, h, geo, Band::HeightF32, chm).unwrap();
        write_raster(&chm, dir.path().join("chm.f32")).unwrap();
        let cfg = PipelineConfig::from_json(
            r#"{
                "out_dir": "run",
                "stages": ["maskproc", "separate", "postprocess"],
                "maskproc": {"chm": {"path": "chm.f32", "threshold": 2.0}},
                "separate": {"chip_size": 64},
                "postprocess": {"min_area": 250}
            }"#,
        )
        .unwrap();
        let recs = run_pipeline(&cfg, dir.path(), &mut |_| {}).unwrap();
        assert_eq!(recs.len(), 3);
        let out = PolygonSet::read(dir.path().join("run/postprocess/filtered.geojson")).unwrap();
        let mut classes: Vec<Option<u8>> = out.polygons.iter().map(|p| p.cls).collect();
        classes.sort();
        assert_eq!(classes, vec![Some(1), Some(2)]);
        assert_eq!(out.epsg, Some(25832));
    }

    #[test]
    fn vector_pairs_need_a_grid() {
        let dir = tempfile::tempdir().unwrap();
        let set = PolygonSet::new(Some(25832), vec![crate::raster::Polygon::rect([0.0, 0.0, 40.0, 4.0], Some(1))]);
        let p = dir.path().join("a.geojson");
        set.write(&p).unwrap();
        assert!(load_eval_pair(&p, &p, 1, None).is_err());
        let (g, q) = load_eval_pair(&p, &p, 1, Some(0.5)).unwrap();
        assert_eq!((g.width(), g.height()), (80, 8));
        assert_eq!(g, q);
        assert_eq!(g.mask_pixels().unwrap().iter().filter(|&&v| v == 1).count(), 640);
    }
}

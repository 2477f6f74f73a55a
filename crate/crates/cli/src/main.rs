use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use woodyline_core::maskproc::{load_chm_mask, process_tile, MaskParams, TileInputs, TileMeta, DEFAULT_HEIGHT_THRESHOLD};
use woodyline_core::pipeline::{
    demo_config, load_buildings, load_eval_pair, load_layers, load_mask, make_separator, run_pipeline, PipelineConfig,
    StageRecord,
};
use woodyline_core::raster::{read_raster, write_raster};
use woodyline_core::separator::{serve_chip_dir, BaselineSeparator, DEFAULT_MAX_DIST, DEFAULT_RATIO_THRESHOLD};
use woodyline_core::skeleval::{report, write_plots, SiteInput, DEFAULT_TAU_MAX};
use woodyline_core::synthgen::{generate_dataset, DatasetConfig, TemplateRef};
use woodyline_core::tiling::{postprocess, run, vectorize, RunParams, DEFAULT_CHIP, DEFAULT_MIN_AREA};
use woodyline_core::{Band, Error, PolygonSet};

#[derive(Parser)]
#[command(name = "woodyline", version, about = "Map and separate linear woody features")]
struct Cli {
    /// Top-level seed; overrides the seed in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 means one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log as JSON lines on stderr.
    #[arg(long, global = true)]
    log_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene dataset.
    Synthgen(SynthgenArgs),
    /// Build a binary woody mask for one tile.
    Maskproc(MaskprocArgs),
    /// Separate linear from non-linear woody features.
    Separate(SeparateArgs),
    /// Filter predicted polygons.
    Postprocess(PostprocessArgs),
    /// Score a prediction against ground truth.
    Evaluate(EvaluateArgs),
    /// Run the stages named in a JSON config.
    Run {
        config: PathBuf,
    },
    /// Run a built-in preset.
    Demo {
        /// Preset name.
        #[arg(value_parser = ["synthetic-eval"])]
        name: String,
        #[arg(long, default_value = "demo-out")]
        out: PathBuf,
    },
    /// Answer every chip in an exchange directory with the baseline rule.
    SeparatorBaseline {
        chip_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RATIO_THRESHOLD)]
        ratio: f64,
    },
}

#[derive(Args)]
struct SynthgenArgs {
    /// Number of scenes.
    #[arg(long, short)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Dataset config JSON; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    canvas: usize,
    /// Template names; all library templates when omitted.
    #[arg(long = "template")]
    templates: Vec<String>,
    #[arg(long)]
    occlusion_free: bool,
    #[arg(long)]
    skeleton_labels: bool,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct MaskprocArgs {
    #[command(subcommand)]
    chm: Option<MaskprocChm>,
    #[arg(long)]
    dsm: Option<PathBuf>,
    #[arg(long)]
    dtm: Option<PathBuf>,
    #[arg(long)]
    dop_red: Option<PathBuf>,
    #[arg(long)]
    dop_nir: Option<PathBuf>,
    /// Footprints (GeoJSON) or a mask raster on the height grid.
    #[arg(long)]
    buildings: Option<PathBuf>,
    /// Tile metadata JSON.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HEIGHT_THRESHOLD)]
    height_threshold: f64,
    /// Tile id used in the decision log.
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MaskprocChm {
    /// Threshold a canopy height model.
    Chm {
        #[arg(long)]
        chm: PathBuf,
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SeparateArgs {
    /// Mask raster or tile catalog JSON.
    #[arg(long)]
    input_catalog: PathBuf,
    /// `baseline` or `external:<command>`.
    #[arg(long, default_value = "baseline")]
    separator: String,
    #[arg(long, default_value_t = DEFAULT_CHIP)]
    chip: usize,
    #[arg(long, default_value_t = 4)]
    batch_size: usize,
    #[arg(long)]
    refine_skeleton: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_DIST)]
    max_dist: f64,
    #[arg(long, default_value_t = DEFAULT_RATIO_THRESHOLD)]
    ratio: f64,
    /// Output directory for classes.pgm and classes.geojson.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PostprocessArgs {
    /// Predicted polygons (GeoJSON).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_AREA)]
    min_area: f64,
    #[arg(long, num_args = 1..)]
    erase: Vec<PathBuf>,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Pixel size of the common grid.
    #[arg(long)]
    grid: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TAU_MAX)]
    tau_max: u32,
    /// Class scored in class rasters and class-tagged polygons.
    #[arg(long, default_value_t = 1)]
    class: u8,
    #[arg(long, default_value = "site")]
    site: String,
    #[arg(long, default_value = "prediction")]
    product: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plots: Option<PathBuf>,
}

fn init_logging(json: bool) {
    let mut b = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if json {
        b.format(|buf, rec| {
            let line = json!({
                "level": rec.level().as_str(),
                "target": rec.target(),
                "message": rec.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    b.init();
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn print_record(r: &StageRecord) {
    if let Ok(line) = serde_json::to_string(r) {
        println!("{line}");
    }
}

fn synthgen(a: SynthgenArgs, seed: Option<u64>) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?
        }
        None => DatasetConfig {
            canvas_size: a.canvas,
            templates: a.templates.into_iter().map(TemplateRef::Name).collect(),
            occlusion_free: a.occlusion_free,
            skeleton_labels: a.skeleton_labels,
            ..DatasetConfig::new(0)
        },
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let m = generate_dataset(&config, a.n, &a.out)?;
    log::info!("wrote {} scenes to {}", m.entries.len(), a.out.display());
    Ok(())
}

fn maskproc(a: MaskprocArgs) -> Result<()> {
    if let Some(MaskprocChm::Chm { chm, threshold, out }) = a.chm {
        let mask = load_chm_mask(&chm, threshold)?;
        write_raster(&mask, &out)?;
        return print_json(&json!({"tile": "chm", "threshold": threshold}));
    }
    let need = |p: Option<PathBuf>, flag: &str| p.ok_or_else(|| anyhow::anyhow!("maskproc needs --{flag}"));
    let dsm_path = need(a.dsm, "dsm")?;
    let out = need(a.out, "out")?;
    let dsm = read_raster(&dsm_path)?;
    let dtm = read_raster(&need(a.dtm, "dtm")?)?;
    let meta = TileMeta::read(&need(a.meta, "meta")?)?;
    let buildings = match &a.buildings {
        Some(b) => load_buildings(b, &dsm)?,
        None => dsm.zeros_like(Band::Mask8),
    };
    let id = a.id.unwrap_or_else(|| {
        dsm_path
            .file_stem()
            .map_or_else(|| "tile".into(), |s| s.to_string_lossy().into_owned())
    });
    let tile = TileInputs {
        id,
        dsm,
        dtm,
        red: a.dop_red.as_deref().map(read_raster).transpose()?,
        nir: a.dop_nir.as_deref().map(read_raster).transpose()?,
        buildings,
        meta,
    };
    let r = process_tile(
        &tile,
        &MaskParams {
            height_threshold: a.height_threshold,
        },
    )
    .map_err(|e| Error::Tile {
        tile: tile.id.clone(),
        reason: e.to_string(),
    })?;
    write_raster(&r.woody, &out)?;
    print_json(&r.log)
}

fn separate(a: SeparateArgs) -> Result<()> {
    let sep = make_separator(&a.separator, a.ratio)?;
    let mask = load_mask(&a.input_catalog)?;
    let params = RunParams {
        chip_size: a.chip,
        workers: 0,
        batch_size: a.batch_size,
        refine_max_dist: a.refine_skeleton.then_some(a.max_dist),
    };
    let classes = run(sep.as_ref(), &mask, &params)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_raster(&classes, a.out.join("classes.pgm"))?;
    let polys = vectorize(&classes)?;
    polys.write(a.out.join("classes.geojson"))?;
    log::info!("{} polygons written to {}", polys.len(), a.out.display());
    Ok(())
}

fn postprocess_cmd(a: PostprocessArgs) -> Result<()> {
    let polys = PolygonSet::read(&a.input)?;
    let erase = load_layers(&a.erase)?;
    let boundary = a.boundary.as_deref().map(PolygonSet::read).transpose()?;
    let out = postprocess(&polys, a.min_area, &erase, boundary.as_ref())?;
    out.write(&a.out)?;
    log::info!("kept {} of {} polygons", out.len(), polys.len());
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (gt, pred) = load_eval_pair(&a.gt, &a.pred, a.class, a.grid)?;
    let r = report(
        &[SiteInput {
            site: a.site,
            product: a.product,
            gt,
            pred,
        }],
        a.tau_max,
    )?;
    r.write(&a.out)?;
    if let Some(dir) = &a.plots {
        write_plots(&r, dir)?;
    }
    let e = &r.entries[0];
    print_json(&json!({
        "pixel_f1": e.pixel.f1,
        "auc_precision": e.skeleton.auc_precision,
        "auc_recall": e.skeleton.auc_recall,
        "auc_f1": e.skeleton.auc_f1,
    }))
}

fn run_config(mut cfg: PipelineConfig, base: &Path, seed: Option<u64>, workers: Option<usize>) -> Result<()> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    run_pipeline(&cfg, base, &mut print_record)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers.filter(|&w| w > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    match cli.command {
        Command::Synthgen(a) => synthgen(a, cli.seed),
        Command::Maskproc(a) => maskproc(a),
        Command::Separate(a) => separate(a),
        Command::Postprocess(a) => postprocess_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Run { config } => {
            let cfg = PipelineConfig::read(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            run_config(cfg, base, cli.seed, cli.workers)
        }
        Command::Demo { name, out } => {
            let cfg = demo_config(&name, &out, cli.seed.unwrap_or(0))?;
            run_config(cfg, Path::new("."), None, cli.workers)
        }
        Command::SeparatorBaseline { chip_dir, ratio } => {
            if !chip_dir.is_dir() {
                bail!("{} is not a directory", chip_dir.display());
            }
            let n = serve_chip_dir(&chip_dir, &BaselineSeparator { ratio_threshold: ratio })?;
            log::info!("answered {n} chips");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.log_json);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Schema(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

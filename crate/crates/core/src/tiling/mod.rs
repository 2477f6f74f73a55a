//! Large-raster separation: overlapping chips, center-crop stitching,
//! vectorization and polygon post-processing.

mod plan;
mod postprocess;
mod run;
mod vectorize;

pub use plan::{plan_chips, ChipPlan, Rect, Window, DEFAULT_CHIP};
pub use postprocess::{postprocess, DEFAULT_MIN_AREA};
pub use run::{run, run_catalog, RunParams};
pub use vectorize::vectorize;

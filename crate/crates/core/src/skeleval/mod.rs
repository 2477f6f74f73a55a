//! Pixel-wise and skeleton-tolerance evaluation.

mod components;
mod metrics;
mod report;

pub use components::{component_accuracy, ComponentScore};
pub use metrics::{
    curve_from_skeletons, f1, pixel_metrics, pixel_metrics_pixels, skeleton_curve, skeleton_curve_pixels, PixelMetrics,
    SkeletonMetricCurve, DEFAULT_TAU_MAX,
};
pub use report::{report, site_svg, write_plots, EvalReport, SiteEntry, SiteInput};

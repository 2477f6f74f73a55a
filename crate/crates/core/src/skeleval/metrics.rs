use crate::error::Result;
use crate::morphology::{skeletonize_pixels, squared_distance_transform};
use crate::raster::RasterGrid;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TAU_MAX: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub iou: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// `num / den`, with `both_empty` when the denominator is zero.
fn ratio(num: u64, den: u64, both_empty: bool) -> f64 {
    if den > 0 {
        num as f64 / den as f64
    } else if both_empty {
        1.0
    } else {
        0.0
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Confusion-count metrics. When both masks are empty every metric is 1;
/// otherwise an empty denominator gives 0.
pub fn pixel_metrics_pixels(gt: &[u8], pred: &[u8]) -> PixelMetrics {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&g, &p) in gt.iter().zip(pred) {
        match (g != 0, p != 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
    }
    let empty = tp + fp + fn_ == 0;
    let precision = ratio(tp, tp + fp, empty);
    let recall = ratio(tp, tp + fn_, empty);
    PixelMetrics {
        precision,
        recall,
        f1: if empty { 1.0 } else { f1(precision, recall) },
        iou: ratio(tp, tp + fp + fn_, empty),
        tp,
        fp,
        fn_,
    }
}

pub fn pixel_metrics(gt: &RasterGrid, pred: &RasterGrid) -> Result<PixelMetrics> {
    gt.require_same_grid(pred, "pixel metrics")?;
    Ok(pixel_metrics_pixels(gt.mask_pixels()?, pred.mask_pixels()?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonMetricCurve {
    pub tau_values: Vec<u32>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub auc_precision: f64,
    pub auc_recall: f64,
    pub auc_f1: f64,
    pub gt_skeleton_pixels: u64,
    pub pred_skeleton_pixels: u64,
}

/// Fraction of `from` skeleton pixels within `tau` of the `to` skeleton, for
/// every tau. `to_sq` holds squared distances to the `to` skeleton.
fn hit_rates(from: &[u8], to_sq: Option<&[u64]>, taus: &[u32]) -> Vec<u64> {
    let mut hits = vec![0u64; taus.len()];
    let Some(d) = to_sq else {
        return hits;
    };
    for (i, &s) in from.iter().enumerate() {
        if s == 0 {
            continue;
        }
        for (k, &t) in taus.iter().enumerate() {
            if d[i] <= (t as u64) * (t as u64) {
                hits[k] += 1;
            }
        }
    }
    hits
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Skeleton curve from precomputed one-pixel skeletons.
pub fn curve_from_skeletons(s_gt: &[u8], s_pred: &[u8], width: usize, height: usize, tau_max: u32) -> SkeletonMetricCurve {
    let taus: Vec<u32> = (0..=tau_max).collect();
    let n_gt = s_gt.iter().filter(|&&v| v != 0).count() as u64;
    let n_pred = s_pred.iter().filter(|&&v| v != 0).count() as u64;
    let d_gt = squared_distance_transform(s_gt, width, height);
    let d_pred = squared_distance_transform(s_pred, width, height);
    let rec_hits = hit_rates(s_gt, d_pred.as_deref(), &taus);
    let prec_hits = hit_rates(s_pred, d_gt.as_deref(), &taus);
    let both_empty = n_gt == 0 && n_pred == 0;
    let recall: Vec<f64> = rec_hits.iter().map(|&h| ratio(h, n_gt, both_empty)).collect();
    let precision: Vec<f64> = prec_hits.iter().map(|&h| ratio(h, n_pred, both_empty)).collect();
    let f: Vec<f64> = if both_empty {
        vec![1.0; taus.len()]
    } else {
        precision.iter().zip(&recall).map(|(&p, &r)| f1(p, r)).collect()
    };
    SkeletonMetricCurve {
        auc_precision: mean(&precision),
        auc_recall: mean(&recall),
        auc_f1: mean(&f),
        tau_values: taus,
        precision,
        recall,
        f1: f,
        gt_skeleton_pixels: n_gt,
        pred_skeleton_pixels: n_pred,
    }
}

pub fn skeleton_curve_pixels(gt: &[u8], pred: &[u8], width: usize, height: usize, tau_max: u32) -> SkeletonMetricCurve {
    let s_gt = skeletonize_pixels(gt, width, height);
    let s_pred = skeletonize_pixels(pred, width, height);
    curve_from_skeletons(&s_gt, &s_pred, width, height, tau_max)
}

/// Tolerance-aware skeleton precision, recall and F1 for τ = 0..=tau_max,
/// with AUCs as the mean over those samples.
pub fn skeleton_curve(gt: &RasterGrid, pred: &RasterGrid, tau_max: u32) -> Result<SkeletonMetricCurve> {
    gt.require_same_grid(pred, "skeleton metrics")?;
    Ok(skeleton_curve_pixels(
        gt.mask_pixels()?,
        pred.mask_pixels()?,
        gt.width(),
        gt.height(),
        tau_max,
    ))
}

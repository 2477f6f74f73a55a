use super::SeparatorOutput;
use crate::error::Result;
use crate::morphology::squared_distance_transform;
use crate::raster::RasterGrid;

pub const DEFAULT_MAX_DIST: f64 = 25.0;

/// Demotes class-1 pixels farther than `max_dist` from the binarized
/// (≥ 0.5) skeleton prediction to class 2.
pub fn skeleton_refine(pred: &SeparatorOutput, max_dist: f64) -> Result<SeparatorOutput> {
    let cls = pred.class_mask.class_pixels()?;
    let (w, h) = (pred.class_mask.width(), pred.class_mask.height());
    let skel: Vec<u8> = pred
        .skeleton_prob
        .float_pixels()?
        .iter()
        .map(|&p| u8::from(p >= 0.5))
        .collect();
    let near = squared_distance_transform(&skel, w, h);
    let limit = max_dist * max_dist;
    let out = cls
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let far = near.as_ref().is_none_or(|d| d[i] as f64 > limit);
            if c == 1 && far {
                2
            } else {
                c
            }
        })
        .collect();
    Ok(SeparatorOutput {
        class_mask: RasterGrid::class(w, h, *pred.class_mask.georef(), out)?,
        skeleton_prob: pred.skeleton_prob.clone(),
    })
}

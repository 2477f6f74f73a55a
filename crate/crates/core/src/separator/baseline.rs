use super::{Chip, Separator, SeparatorInput, SeparatorOutput};
use crate::error::Result;
use crate::morphology::components::connected_components_pixels;
use crate::raster::{Band, RasterGrid};

pub const DEFAULT_RATIO_THRESHOLD: f64 = 5.0;

/// Elongation rule: a component is linear iff its skeleton length over twice
/// its mean radius reaches `ratio_threshold`. Zero-radius components are
/// non-linear.
pub fn baseline_separate(input: &SeparatorInput, ratio_threshold: f64) -> Result<SeparatorOutput> {
    let (w, h) = (input.mask.width(), input.mask.height());
    let mask = input.mask.mask_pixels()?;
    let skel = input.skeleton.mask_pixels()?;
    let comps = connected_components_pixels(mask, w, h, 8)?;
    let linear: Vec<bool> = comps
        .stats
        .iter()
        .map(|s| s.mean_radius > 0.0 && s.skeleton_length as f64 / (2.0 * s.mean_radius) >= ratio_threshold)
        .collect();
    let mut cls = vec![0u8; w * h];
    let mut prob = vec![0f32; w * h];
    for (i, &l) in comps.labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let lin = linear[l as usize - 1];
        cls[i] = if lin { 1 } else { 2 };
        if lin && skel[i] != 0 {
            prob[i] = 1.0;
        }
    }
    let geo = *input.mask.georef();
    Ok(SeparatorOutput {
        class_mask: RasterGrid::class(w, h, geo, cls)?,
        skeleton_prob: RasterGrid::float(w, h, geo, Band::IndexF32, prob)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSeparator {
    pub ratio_threshold: f64,
}

impl Default for BaselineSeparator {
    fn default() -> Self {
        Self {
            ratio_threshold: DEFAULT_RATIO_THRESHOLD,
        }
    }
}

impl Separator for BaselineSeparator {
    fn name(&self) -> String {
        format!("baseline(ratio={})", self.ratio_threshold)
    }

    fn separate_batch(&self, chips: &[Chip]) -> Result<Vec<SeparatorOutput>> {
        chips
            .iter()
            .map(|c| baseline_separate(&c.input, self.ratio_threshold))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use crate::separator::prepare_input;

    fn classes_of(w: usize, h: usize, px: Vec<u8>) -> Vec<u8> {
        let m = RasterGrid::mask(w, h, GeoRef::pixel_space(h), px).unwrap();
        let out = baseline_separate(&prepare_input(&m).unwrap(), DEFAULT_RATIO_THRESHOLD).unwrap();
        out.class_mask.class_pixels().unwrap().to_vec()
    }

    fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Vec<u8> {
        (0..w * h)
            .map(|i| u8::from((x0..x1).contains(&(i % w)) && (y0..y1).contains(&(i / w))))
            .collect()
    }

    #[test]
    fn bar_is_linear() {
        let c = classes_of(110, 10, rect(110, 10, 5, 3, 105, 7));
        assert!(c.iter().all(|&v| v == 0 || v == 1));
        assert_eq!(c.iter().filter(|&&v| v == 1).count(), 400);
    }

    #[test]
    fn square_is_not_linear() {
        let c = classes_of(60, 60, rect(60, 60, 5, 5, 55, 55));
        assert_eq!(c.iter().filter(|&&v| v == 2).count(), 2500);
    }

    #[test]
    fn single_pixel_is_not_linear() {
        let mut px = vec![0; 25];
        px[12] = 1;
        assert_eq!(classes_of(5, 5, px)[12], 2);
    }

    #[test]
    fn mixed_scene_and_symmetry() {
        // bar plus square, compared under every rotation and flip
        let n = 80;
        let mut px = rect(n, n, 4, 4, 74, 8);
        for (i, v) in rect(n, n, 20, 30, 60, 70).into_iter().enumerate() {
            px[i] |= v;
        }
        let base = classes_of(n, n, px.clone());
        let rot = |v: &[u8]| -> Vec<u8> { (0..n * n).map(|i| v[(n - 1 - i % n) * n + i / n]).collect() };
        let flip = |v: &[u8]| -> Vec<u8> { (0..n * n).map(|i| v[(i / n) * n + n - 1 - i % n]).collect() };
        let mut img = px;
        let mut expect = base;
        for _ in 0..4 {
            assert_eq!(classes_of(n, n, img.clone()), expect);
            assert_eq!(classes_of(n, n, flip(&img)), flip(&expect));
            img = rot(&img);
            expect = rot(&expect);
        }
    }
}

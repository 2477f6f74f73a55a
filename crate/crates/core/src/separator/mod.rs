//! Linear/non-linear separation of a woody mask chip.
//!
//! A separator maps a three-channel [`SeparatorInput`] (mask, skeleton,
//! distance to the mask) to a class chip plus a skeleton probability chip.
//! Implementations are stateless between chips.

mod baseline;
pub mod exchange;
mod refine;

pub use baseline::{baseline_separate, BaselineSeparator, DEFAULT_RATIO_THRESHOLD};
pub use exchange::{read_chip_input, read_chip_output, serve_chip_dir, write_chip_input, write_chip_output, ExternalSeparator};
pub use refine::{skeleton_refine, DEFAULT_MAX_DIST};

use crate::error::{Error, Result};
use crate::morphology::{distance_transform, skeletonize};
use crate::raster::{Band, RasterGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorInput {
    /// Channel 0, mask8.
    pub mask: RasterGrid,
    /// Channel 1, mask8 skeleton of the mask.
    pub skeleton: RasterGrid,
    /// Channel 2, distance from each pixel to the nearest mask pixel.
    pub distance: RasterGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatorOutput {
    pub class_mask: RasterGrid,
    /// Float chip in `[0, 1]`.
    pub skeleton_prob: RasterGrid,
}

/// A chip with its identifier in the exchange directory.
#[derive(Debug, Clone)]
pub struct Chip {
    pub id: String,
    pub input: SeparatorInput,
}

pub fn prepare_input(mask: &RasterGrid) -> Result<SeparatorInput> {
    Ok(SeparatorInput {
        mask: mask.clone(),
        skeleton: skeletonize(mask)?,
        distance: distance_transform(mask)?,
    })
}

pub trait Separator: Send + Sync {
    fn name(&self) -> String;

    /// Separates a batch of chips; output order follows input order.
    fn separate_batch(&self, chips: &[Chip]) -> Result<Vec<SeparatorOutput>>;

    fn separate(&self, chip: &Chip) -> Result<SeparatorOutput> {
        let mut out = self.separate_batch(std::slice::from_ref(chip))?;
        out.pop().ok_or_else(|| Error::Separator {
            chip: chip.id.clone(),
            reason: "no output".into(),
        })
    }
}

/// Checks an output against the separator contract for its input.
pub fn check_output(chip: &Chip, out: &SeparatorOutput) -> Result<()> {
    let fail = |reason: String| {
        Err(Error::Separator {
            chip: chip.id.clone(),
            reason,
        })
    };
    let mask = &chip.input.mask;
    for (what, grid) in [("class mask", &out.class_mask), ("skeleton", &out.skeleton_prob)] {
        if grid.width() != mask.width() || grid.height() != mask.height() {
            return fail(format!(
                "{what} is {}x{}, expected {}x{}",
                grid.width(),
                grid.height(),
                mask.width(),
                mask.height()
            ));
        }
    }
    if out.class_mask.band() != Band::Class8 {
        return fail(format!("class mask has band {:?}", out.class_mask.band()));
    }
    let Ok(prob) = out.skeleton_prob.float_pixels() else {
        return fail("skeleton probability is not a float raster".into());
    };
    if let Some(p) = prob.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return fail(format!("skeleton probability {p} outside [0, 1]"));
    }
    let cls = out.class_mask.class_pixels()?;
    let m = mask.mask_pixels()?;
    if let Some(i) = (0..m.len()).find(|&i| (m[i] == 0) != (cls[i] == 0)) {
        return fail(format!(
            "class {} at pixel ({}, {}) where the mask is {}",
            cls[i],
            i % mask.width(),
            i / mask.width(),
            m[i]
        ));
    }
    Ok(())
}

use super::plan::{plan_chips, ChipPlan, Window, DEFAULT_CHIP};
use crate::error::{Error, Result};
use crate::raster::{GridCatalog, RasterGrid};
use crate::separator::{check_output, prepare_input, skeleton_refine, Chip, Separator};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub chip_size: usize,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// Chips handed to the separator per call.
    pub batch_size: usize,
    /// Skeleton refinement distance in pixels, off when `None`.
    pub refine_max_dist: Option<f64>,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            chip_size: DEFAULT_CHIP,
            workers: 0,
            batch_size: 4,
            refine_max_dist: None,
        }
    }
}

/// Zero-padded chip of `mask` at the window offset.
fn cut_chip(mask: &RasterGrid, win: &Window, chip: usize) -> Result<RasterGrid> {
    let src = mask.mask_pixels()?;
    let w = mask.width();
    let mut px = vec![0u8; chip * chip];
    for r in 0..win.height {
        let s = (win.row_off + r) * w + win.col_off;
        px[r * chip..r * chip + win.width].copy_from_slice(&src[s..s + win.width]);
    }
    let geo = mask.georef().offset(win.col_off as i64, win.row_off as i64);
    RasterGrid::mask(chip, chip, geo, px)
}

/// Keep-region pixels of one chip prediction, row-major.
fn keep_pixels(out: &RasterGrid, win: &Window, chip: usize) -> Result<Vec<u8>> {
    let cls = out.class_pixels()?;
    let k = &win.keep;
    let mut v = Vec::with_capacity(k.width() * k.height());
    for r in k.row0..k.row1 {
        let s = (r - win.row_off) * chip + (k.col0 - win.col_off);
        v.extend_from_slice(&cls[s..s + k.width()]);
    }
    Ok(v)
}

fn run_batch(
    separator: &dyn Separator,
    mask: &RasterGrid,
    plan: &ChipPlan,
    wins: &[Window],
    refine: Option<f64>,
) -> Result<Vec<Vec<u8>>> {
    let chips = wins
        .iter()
        .map(|w| {
            Ok(Chip {
                id: w.id(),
                input: prepare_input(&cut_chip(mask, w, plan.chip_size)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outs = separator.separate_batch(&chips)?;
    if outs.len() != chips.len() {
        return Err(Error::Separator {
            chip: chips[0].id.clone(),
            reason: format!("{} outputs for {} chips", outs.len(), chips.len()),
        });
    }
    chips
        .iter()
        .zip(outs)
        .zip(wins)
        .map(|((chip, out), w)| {
            check_output(chip, &out)?;
            let out = match refine {
                Some(d) => skeleton_refine(&out, d)?,
                None => out,
            };
            keep_pixels(&out.class_mask, w, plan.chip_size)
        })
        .collect()
}

/// Chips `mask` with 50 % overlap, separates every chip and stitches the
/// keep regions into a class raster on the mask grid.
pub fn run(separator: &dyn Separator, mask: &RasterGrid, params: &RunParams) -> Result<RasterGrid> {
    mask.mask_pixels()?;
    let plan = plan_chips(mask.width(), mask.height(), params.chip_size)?;
    let batches: Vec<&[Window]> = plan.windows.chunks(params.batch_size.max(1)).collect();
    log::info!(
        "separating {} chips of {}px with {}",
        plan.windows.len(),
        plan.chip_size,
        separator.name()
    );
    let work = || -> Result<Vec<Vec<Vec<u8>>>> {
        batches
            .par_iter()
            .map(|b| run_batch(separator, mask, &plan, b, params.refine_max_dist))
            .collect()
    };
    let results = if params.workers == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(params.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?
            .install(work)?
    };

    let w = mask.width();
    let mut out = vec![0u8; w * mask.height()];
    for (win, px) in plan.windows.iter().zip(results.into_iter().flatten()) {
        let k = &win.keep;
        for (i, r) in (k.row0..k.row1).enumerate() {
            let d = r * w + k.col0;
            out[d..d + k.width()].copy_from_slice(&px[i * k.width()..(i + 1) * k.width()]);
        }
    }
    RasterGrid::class(w, mask.height(), *mask.georef(), out)
}

/// [`run`] over the mosaic of a tile catalog.
pub fn run_catalog(separator: &dyn Separator, catalog: &GridCatalog, params: &RunParams) -> Result<RasterGrid> {
    run(separator, &catalog.mosaic()?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Band, GeoRef};
    use crate::separator::{BaselineSeparator, SeparatorOutput};

    /// Labels every foreground pixel 2.
    struct Flat;

    impl Separator for Flat {
        fn name(&self) -> String {
            "flat".into()
        }

        fn separate_batch(&self, chips: &[Chip]) -> Result<Vec<SeparatorOutput>> {
            chips
                .iter()
                .map(|c| {
                    let m = &c.input.mask;
                    let cls = m.mask_pixels()?.iter().map(|&v| 2 * v).collect();
                    Ok(SeparatorOutput {
                        class_mask: RasterGrid::class(m.width(), m.height(), *m.georef(), cls)?,
                        skeleton_prob: m.zeros_like(Band::IndexF32),
                    })
                })
                .collect()
        }
    }

    /// Violates the background contract on one chip.
    struct Leaky;

    impl Separator for Leaky {
        fn name(&self) -> String {
            "leaky".into()
        }

        fn separate_batch(&self, chips: &[Chip]) -> Result<Vec<SeparatorOutput>> {
            chips
                .iter()
                .map(|c| {
                    let m = &c.input.mask;
                    let fill = if c.id == "r16_c16" { 2 } else { 0 };
                    let cls = m.mask_pixels()?.iter().map(|&v| if v == 1 { 1 } else { fill }).collect();
                    Ok(SeparatorOutput {
                        class_mask: RasterGrid::class(m.width(), m.height(), *m.georef(), cls)?,
                        skeleton_prob: m.zeros_like(Band::IndexF32),
                    })
                })
                .collect()
        }
    }

    fn random_mask(w: usize, h: usize, seed: u64) -> RasterGrid {
        let px = (0..w * h)
            .map(|i| u8::from(crate::rng::mix64(seed ^ i as u64) % 3 == 0))
            .collect();
        RasterGrid::mask(w, h, GeoRef::pixel_space(h), px).unwrap()
    }

    fn params(chip: usize, workers: usize) -> RunParams {
        RunParams {
            chip_size: chip,
            workers,
            batch_size: 2,
            refine_max_dist: None,
        }
    }

    #[test]
    fn flat_separator_relabels_mask() {
        let m = random_mask(70, 45, 1);
        let out = run(&Flat, &m, &params(32, 2)).unwrap();
        let expect: Vec<u8> = m.mask_pixels().unwrap().iter().map(|&v| 2 * v).collect();
        assert_eq!(out.class_pixels().unwrap(), &expect[..]);
        assert_eq!(out.georef(), m.georef());
    }

    #[test]
    fn worker_count_does_not_matter() {
        let m = random_mask(100, 90, 2);
        let sep = BaselineSeparator::default();
        let a = run(&sep, &m, &params(32, 1)).unwrap();
        let b = run(&sep, &m, &params(32, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn contract_violation_aborts_with_chip_id() {
        let m = random_mask(40, 40, 3);
        match run(&Leaky, &m, &params(32, 2)) {
            Err(Error::Separator { chip, .. }) => assert_eq!(chip, "r16_c16"),
            other => panic!("expected a separator error, got {other:?}"),
        }
    }
}

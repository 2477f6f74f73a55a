use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_CHIP: usize = 1024;

/// Half-open pixel rectangle `[col0, col1) × [row0, row1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub col0: usize,
    pub row0: usize,
    pub col1: usize,
    pub row1: usize,
}

impl Rect {
    pub fn width(&self) -> usize {
        self.col1 - self.col0
    }

    pub fn height(&self) -> usize {
        self.row1 - self.row0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub col_off: usize,
    pub row_off: usize,
    /// Part of the chip that lies inside the raster.
    pub width: usize,
    pub height: usize,
    /// Raster pixels this window writes, in raster coordinates.
    pub keep: Rect,
}

impl Window {
    pub fn id(&self) -> String {
        format!("r{}_c{}", self.row_off, self.col_off)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipPlan {
    pub chip_size: usize,
    pub stride: usize,
    pub raster_width: usize,
    pub raster_height: usize,
    /// Row-major by offset.
    pub windows: Vec<Window>,
}

/// `(offset, keep_start, keep_end)` along one axis.
fn axis(extent: usize, chip: usize) -> Vec<(usize, usize, usize)> {
    let stride = chip / 2;
    let last = extent.saturating_sub(chip).div_ceil(stride);
    (0..=last)
        .map(|k| {
            let off = k * stride;
            let start = if k == 0 { 0 } else { off + chip / 4 };
            let end = if k == last { extent } else { off + 3 * chip / 4 };
            (off, start, end)
        })
        .collect()
}

/// Windows at multiples of half the chip size. Interior windows keep their
/// central half; windows on the raster border keep everything out to the
/// border, so the keep regions partition the raster.
pub fn plan_chips(width: usize, height: usize, chip_size: usize) -> Result<ChipPlan> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!("empty extent {width}x{height}")));
    }
    if chip_size < 4 || !chip_size.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!(
            "chip size {chip_size} must be a positive multiple of 4"
        )));
    }
    let cols = axis(width, chip_size);
    let rows = axis(height, chip_size);
    let mut windows = Vec::with_capacity(cols.len() * rows.len());
    for &(row_off, row0, row1) in &rows {
        for &(col_off, col0, col1) in &cols {
            windows.push(Window {
                col_off,
                row_off,
                width: chip_size.min(width - col_off),
                height: chip_size.min(height - row_off),
                keep: Rect { col0, row0, col1, row1 },
            });
        }
    }
    Ok(ChipPlan {
        chip_size,
        stride: chip_size / 2,
        raster_width: width,
        raster_height: height,
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coverage(plan: &ChipPlan) -> Vec<u32> {
        let w = plan.raster_width;
        let mut count = vec![0u32; w * plan.raster_height];
        for win in &plan.windows {
            for r in win.keep.row0..win.keep.row1 {
                for c in win.keep.col0..win.keep.col1 {
                    count[r * w + c] += 1;
                }
            }
        }
        count
    }

    #[test]
    fn nine_windows_at_2048() {
        let p = plan_chips(2048, 2048, 1024).unwrap();
        assert_eq!(p.windows.len(), 9);
        let offs: Vec<(usize, usize)> = p.windows.iter().map(|w| (w.col_off, w.row_off)).collect();
        for (i, &(c, r)) in offs.iter().enumerate() {
            assert_eq!((c, r), ([0, 512, 1024][i % 3], [0, 512, 1024][i / 3]));
        }
        // the middle window keeps its central 512 square
        assert_eq!(p.windows[4].keep, Rect { col0: 768, row0: 768, col1: 1280, row1: 1280 });
    }

    #[test]
    fn single_window_keeps_everything() {
        let p = plan_chips(1024, 1024, 1024).unwrap();
        assert_eq!(p.windows.len(), 1);
        assert_eq!(p.windows[0].keep, Rect { col0: 0, row0: 0, col1: 1024, row1: 1024 });
    }

    #[test]
    fn wide_extent_partitions() {
        let p = plan_chips(1536, 1024, 1024).unwrap();
        assert_eq!(p.windows.len(), 2);
        assert!(coverage(&p).iter().all(|&c| c == 1));
    }

    #[test]
    fn rejects_bad_chip() {
        assert!(plan_chips(10, 10, 6).is_err());
        assert!(plan_chips(0, 10, 8).is_err());
    }

    proptest! {
        #[test]
        fn keep_regions_partition(w in 1usize..300, h in 1usize..300, q in 1usize..20) {
            let p = plan_chips(w, h, 4 * q).unwrap();
            prop_assert!(coverage(&p).iter().all(|&c| c == 1));
            for win in &p.windows {
                prop_assert_eq!(win.col_off % p.stride, 0);
                prop_assert!(win.keep.col0 >= win.col_off && win.keep.col1 <= win.col_off + p.chip_size);
                prop_assert!(win.keep.row0 >= win.row_off && win.keep.row1 <= win.row_off + p.chip_size);
            }
        }
    }
}

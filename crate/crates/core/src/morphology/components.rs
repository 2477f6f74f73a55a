use super::{distance, skeleton};
use crate::error::{Error, Result};
use crate::raster::RasterGrid;

/// Per-component shape statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub label: u32,
    pub area: usize,
    /// `[min_col, min_row, max_col, max_row]`, inclusive.
    pub bbox: [usize; 4],
    /// Pixel count of the component's skeleton.
    pub skeleton_length: usize,
    /// Mean distance to the nearest background pixel, sampled on the skeleton.
    /// The image border counts as background.
    pub mean_radius: f64,
}

#[derive(Debug, Clone)]
pub struct Components {
    pub width: usize,
    pub height: usize,
    /// 0 for background, dense `1..=K` in raster order of first pixel.
    pub labels: Vec<u32>,
    pub stats: Vec<ComponentStats>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.stats.len()
    }
}

/// Labels foreground components and measures each one.
pub fn connected_components(mask: &RasterGrid, connectivity: u8) -> Result<Components> {
    let px = mask.mask_pixels()?;
    connected_components_pixels(px, mask.width(), mask.height(), connectivity)
}

pub fn connected_components_pixels(
    px: &[u8],
    width: usize,
    height: usize,
    connectivity: u8,
) -> Result<Components> {
    let labels = label_pixels(px, width, height, connectivity)?;
    let k = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut stats: Vec<ComponentStats> = (1..=k as u32)
        .map(|label| ComponentStats {
            label,
            area: 0,
            bbox: [usize::MAX, usize::MAX, 0, 0],
            skeleton_length: 0,
            mean_radius: 0.0,
        })
        .collect();
    for (i, &l) in labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let s = &mut stats[l as usize - 1];
        let (x, y) = (i % width, i / width);
        s.area += 1;
        s.bbox = [s.bbox[0].min(x), s.bbox[1].min(y), s.bbox[2].max(x), s.bbox[3].max(y)];
    }
    for s in &mut stats {
        let (len, radius) = shape_of(&labels, width, s);
        s.skeleton_length = len;
        s.mean_radius = radius;
    }
    Ok(Components {
        width,
        height,
        labels,
        stats,
    })
}

/// Skeleton length and mean radius of one component, measured on a crop
/// padded by one background pixel.
fn shape_of(labels: &[u32], width: usize, s: &ComponentStats) -> (usize, f64) {
    let [x0, y0, x1, y1] = s.bbox;
    let (cw, ch) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut crop = vec![0u8; cw * ch];
    for y in y0..=y1 {
        for x in x0..=x1 {
            if labels[y * width + x] == s.label {
                crop[(y - y0 + 1) * cw + (x - x0 + 1)] = 1;
            }
        }
    }
    let skel = skeleton::skeletonize_pixels(&crop, cw, ch);
    let background: Vec<u8> = crop.iter().map(|&v| 1 - v).collect();
    let inner = distance::distance_transform_pixels(&background, cw, ch);
    let (mut n, mut sum) = (0usize, 0.0f64);
    for (i, &v) in skel.iter().enumerate() {
        if v == 1 {
            n += 1;
            sum += inner[i] as f64;
        }
    }
    (n, if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Component labels only (no statistics).
pub fn label_pixels(px: &[u8], width: usize, height: usize, connectivity: u8) -> Result<Vec<u32>> {
    let offsets: &[(isize, isize)] = match connectivity {
        4 => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        8 => &[
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ],
        c => {
            return Err(Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {c}"
            )))
        }
    };
    let mut labels = vec![0u32; width * height];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..width * height {
        if px[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % width) as isize, (i / width) as isize);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= width || ny as usize >= height {
                    continue;
                }
                let j = ny as usize * width + nx as usize;
                if px[j] != 0 && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    Ok(labels)
}

#[cfg(test)]
pub(crate) fn count_components(px: &[u8], width: usize, height: usize, connectivity: u8) -> usize {
    label_pixels(px, width, height, connectivity)
        .map(|l| l.into_iter().max().unwrap_or(0) as usize)
        .unwrap_or(0)
}

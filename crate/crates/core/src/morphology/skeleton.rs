//! Zhang–Suen thinning.
//!
//! Each sub-iteration marks pixels with the classic Zhang–Suen conditions
//! evaluated on a snapshot of the image. Marked pixels are then removed in
//! raster order, and each removal is re-checked against the current image so
//! that only 8-simple, non-end pixels go. The re-check keeps 2×2 blocks and
//! two-pixel-thick diagonals from vanishing, which the plain parallel rule
//! would erase.

use crate::error::Result;
use crate::raster::RasterGrid;

/// Offsets of P2..P9: N, NE, E, SE, S, SW, W, NW.
const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// One-pixel-wide skeleton of a binary mask.
pub fn skeletonize(mask: &RasterGrid) -> Result<RasterGrid> {
    let px = mask.mask_pixels()?;
    let out = skeletonize_pixels(px, mask.width(), mask.height());
    RasterGrid::mask(mask.width(), mask.height(), *mask.georef(), out)
}

/// Thinning on a raw row-major buffer; any non-zero value is foreground.
pub fn skeletonize_pixels(px: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut img: Vec<u8> = px.iter().map(|&v| u8::from(v != 0)).collect();
    let mut thin = Thinning {
        width,
        height,
        img: &mut img,
    };
    thin.run();
    img
}

struct Thinning<'a> {
    width: usize,
    height: usize,
    img: &'a mut Vec<u8>,
}

impl Thinning<'_> {
    /// Neighbor values P2..P9 as a bit pattern (bit k = P(k+2)).
    #[inline]
    fn neighbors(&self, i: usize) -> u8 {
        let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
        let mut bits = 0u8;
        for (k, (dx, dy)) in RING.iter().enumerate() {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0
                && ny >= 0
                && (nx as usize) < self.width
                && (ny as usize) < self.height
                && self.img[ny as usize * self.width + nx as usize] != 0
            {
                bits |= 1 << k;
            }
        }
        bits
    }

    fn run(&mut self) {
        let n = self.width * self.height;
        let mut queued = vec![false; n];
        let mut candidates: Vec<usize> = (0..n)
            .filter(|&i| self.img[i] != 0 && self.neighbors(i) != 0xff)
            .collect();
        for &i in &candidates {
            queued[i] = true;
        }
        loop {
            let mut changed = false;
            for pass in 0..2 {
                let marked: Vec<usize> = candidates
                    .iter()
                    .copied()
                    .filter(|&i| zhang_suen_marks(self.neighbors(i), pass))
                    .collect();
                let mut removed = Vec::new();
                for i in marked {
                    let nb = self.neighbors(i);
                    if nb.count_ones() >= 2 && is_simple(nb) {
                        self.img[i] = 0;
                        removed.push(i);
                    }
                }
                if removed.is_empty() {
                    continue;
                }
                changed = true;
                for &i in &removed {
                    queued[i] = false;
                }
                candidates.retain(|&i| self.img[i] != 0);
                for &i in &removed {
                    let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
                    for (dx, dy) in RING {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx as usize >= self.width || ny as usize >= self.height {
                            continue;
                        }
                        let j = ny as usize * self.width + nx as usize;
                        if self.img[j] != 0 && !queued[j] {
                            queued[j] = true;
                            candidates.push(j);
                        }
                    }
                }
                candidates.sort_unstable();
            }
            if !changed {
                break;
            }
        }
    }
}

/// Zhang–Suen deletion conditions for sub-iteration `pass` (0 or 1).
#[inline]
fn zhang_suen_marks(nb: u8, pass: usize) -> bool {
    let p = |k: usize| (nb >> (k - 2)) & 1;
    let b = nb.count_ones();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8)
        .filter(|&k| (nb >> k) & 1 == 0 && (nb >> ((k + 1) % 8)) & 1 == 1)
        .count();
    if a != 1 {
        return false;
    }
    if pass == 0 {
        p(2) * p(4) * p(6) == 0 && p(4) * p(6) * p(8) == 0
    } else {
        p(2) * p(4) * p(8) == 0 && p(2) * p(6) * p(8) == 0
    }
}

/// 8-simple test via the Yokoi connectivity number.
#[inline]
fn is_simple(nb: u8) -> bool {
    // Yokoi order starts at E and runs counter-clockwise: E, NE, N, NW, W, SW, S, SE.
    const ORDER: [usize; 8] = [2, 1, 0, 7, 6, 5, 4, 3];
    let x = |k: usize| 1 - ((nb >> ORDER[k % 8]) & 1) as i32;
    let c8: i32 = [0, 2, 4, 6]
        .iter()
        .map(|&k| x(k) - x(k) * x(k + 1) * x(k + 2))
        .sum();
    c8 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::components::count_components;

    fn grid(rows: &[&str]) -> (Vec<u8>, usize, usize) {
        let w = rows[0].len();
        let px = rows
            .iter()
            .flat_map(|r| r.bytes().map(|b| u8::from(b == b'#')))
            .collect();
        (px, w, rows.len())
    }

    fn render(px: &[u8], w: usize) -> Vec<String> {
        px.chunks(w)
            .map(|r| r.iter().map(|&v| if v == 1 { '#' } else { '.' }).collect())
            .collect()
    }

    fn has_2x2(px: &[u8], w: usize, h: usize) -> bool {
        (0..h.saturating_sub(1)).any(|y| {
            (0..w - 1).any(|x| {
                px[y * w + x] & px[y * w + x + 1] & px[(y + 1) * w + x] & px[(y + 1) * w + x + 1] == 1
            })
        })
    }

    #[test]
    fn empty_and_single_pixel() {
        assert_eq!(skeletonize_pixels(&[0; 9], 3, 3), vec![0; 9]);
        let mut one = vec![0; 9];
        one[4] = 1;
        assert_eq!(skeletonize_pixels(&one, 3, 3), one);
    }

    #[test]
    fn solid_rectangle_thins_to_middle_row() {
        let (px, w, h) = grid(&[
            "...........",
            ".#########.",
            ".#########.",
            ".#########.",
            "...........",
        ]);
        let s = skeletonize_pixels(&px, w, h);
        let rows = render(&s, w);
        // everything on the middle row, except possibly a diagonal end pixel
        let off_middle: Vec<(usize, usize)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .filter(|&(x, y)| s[y * w + x] == 1 && y != 2)
            .collect();
        assert!(off_middle.len() <= 2, "{rows:#?}");
        assert!(s[2 * w + 2..2 * w + 8].iter().all(|&v| v == 1), "{rows:#?}");
        assert_eq!(count_components(&s, w, h, 8), 1);
    }

    #[test]
    fn two_by_two_block_survives_thin() {
        let (px, w, h) = grid(&["....", ".##.", ".##.", "...."]);
        let s = skeletonize_pixels(&px, w, h);
        assert_eq!(s.iter().filter(|&&v| v == 1).count(), 2);
        assert_eq!(count_components(&s, w, h, 8), 1);
    }

    #[test]
    fn thick_diagonal_keeps_connectivity() {
        let (px, w, h) = grid(&[
            "##......", "###.....", ".###....", "..###...", "...###..", "....###.", ".....##.",
        ]);
        let s = skeletonize_pixels(&px, w, h);
        assert_eq!(count_components(&s, w, h, 8), 1);
        assert!(!has_2x2(&s, w, h));
    }

    #[test]
    fn yokoi_number_on_known_patterns() {
        // isolated pixel is not simple (removing it deletes a component)
        assert!(!is_simple(0));
        // single neighbor: simple
        assert!(is_simple(0b0000_0001));
        // N and S only: removing splits the component
        assert!(!is_simple(0b0001_0001));
        // N, NE, E: simple
        assert!(is_simple(0b0000_0111));
    }
}

//! Exact Euclidean distance transform (lower envelope of parabolas, one pass
//! per column then one per row). All arithmetic is on integer squared
//! distances, so results are exact before the final square root.

use crate::error::Result;
use crate::raster::{Band, RasterGrid};
use rayon::prelude::*;

const INF: i64 = i64::MAX / 4;

/// Value used for every pixel when the mask has no foreground at all.
/// Always at least the image diagonal.
pub fn background_sentinel(width: usize, height: usize) -> f32 {
    (width + height) as f32
}

/// Distance from every pixel to the nearest foreground pixel, in pixels.
pub fn distance_transform(mask: &RasterGrid) -> Result<RasterGrid> {
    let px = mask.mask_pixels()?;
    let d = distance_transform_pixels(px, mask.width(), mask.height());
    RasterGrid::float(mask.width(), mask.height(), *mask.georef(), Band::IndexF32, d)
}

pub fn distance_transform_pixels(px: &[u8], width: usize, height: usize) -> Vec<f32> {
    match squared_distance_transform(px, width, height) {
        Some(sq) => sq.into_iter().map(|d| (d as f64).sqrt() as f32).collect(),
        None => vec![background_sentinel(width, height); width * height],
    }
}

/// Squared distances to the nearest non-zero pixel; `None` when there is none.
pub fn squared_distance_transform(px: &[u8], width: usize, height: usize) -> Option<Vec<u64>> {
    if !px.iter().any(|&v| v != 0) {
        return None;
    }
    // column pass, stored transposed: col_sq[c * height + r]
    let mut col_sq = vec![0i64; width * height];
    col_sq
        .par_chunks_mut(height)
        .enumerate()
        .for_each(|(c, col)| {
            let mut last: Option<usize> = None;
            for r in 0..height {
                if px[r * width + c] != 0 {
                    last = Some(r);
                }
                col[r] = last.map_or(INF, |l| (r - l) as i64);
            }
            let mut next: Option<usize> = None;
            for r in (0..height).rev() {
                if px[r * width + c] != 0 {
                    next = Some(r);
                }
                if let Some(n) = next {
                    col[r] = col[r].min((n - r) as i64);
                }
                if col[r] != INF {
                    col[r] *= col[r];
                }
            }
        });
    let mut out = vec![0u64; width * height];
    out.par_chunks_mut(width).enumerate().for_each_init(
        || Envelope::with_capacity(width),
        |env, (r, row)| {
            let f: Vec<i64> = (0..width).map(|c| col_sq[c * height + r]).collect();
            env.transform(&f, row);
        },
    );
    Some(out)
}

/// Scratch space for the 1-D lower envelope.
struct Envelope {
    sites: Vec<i64>,
    // boundary k sits between sites k-1 and k, stored as a fraction num/den
    bounds: Vec<(i128, i128)>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n + 1),
        }
    }

    /// Abscissa where parabolas rooted at `q` and `v` (v < q) intersect.
    fn intersect(f: &[i64], q: i64, v: i64) -> (i128, i128) {
        let num = (f[q as usize] as i128 + (q * q) as i128) - (f[v as usize] as i128 + (v * v) as i128);
        (num, 2 * (q - v) as i128)
    }

    fn transform(&mut self, f: &[i64], out: &mut [u64]) {
        self.sites.clear();
        self.bounds.clear();
        for q in 0..f.len() as i64 {
            if f[q as usize] >= INF {
                continue;
            }
            while let Some(&v) = self.sites.last() {
                let (sn, sd) = Self::intersect(f, q, v);
                let (bn, bd) = *self.bounds.last().unwrap();
                // pop while s <= bound (compare fractions with positive denominators)
                if bd == 0 || sn * bd > bn * sd {
                    break;
                }
                self.sites.pop();
                self.bounds.pop();
            }
            let bound = match self.sites.last() {
                None => (0, 0), // den 0 marks -infinity
                Some(&v) => Self::intersect(f, q, v),
            };
            self.sites.push(q);
            self.bounds.push(bound);
        }
        let mut k = 0;
        for (x, o) in out.iter_mut().enumerate() {
            let x = x as i128;
            // advance while the next boundary lies at or left of x
            while k + 1 < self.sites.len() {
                let (bn, bd) = self.bounds[k + 1];
                if bn <= x * bd {
                    k += 1;
                } else {
                    break;
                }
            }
            let s = self.sites[k];
            let dx = x as i64 - s;
            *o = (dx * dx + f[s as usize]) as u64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(px: &[u8], w: usize, h: usize) -> Vec<u64> {
        let fg: Vec<(i64, i64)> = (0..w * h)
            .filter(|&i| px[i] != 0)
            .map(|i| ((i % w) as i64, (i / w) as i64))
            .collect();
        (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                fg.iter()
                    .map(|&(fx, fy)| ((x - fx).pow(2) + (y - fy).pow(2)) as u64)
                    .min()
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn three_four_five() {
        let mut px = vec![0u8; 5 * 6];
        px[0] = 1;
        let d = distance_transform_pixels(&px, 5, 6);
        assert_eq!(d[4 * 5 + 3], 5.0);
    }

    #[test]
    fn full_and_empty() {
        assert_eq!(distance_transform_pixels(&[1; 12], 4, 3), vec![0.0; 12]);
        let d = distance_transform_pixels(&[0; 12], 4, 3);
        assert!(d.iter().all(|&v| v == background_sentinel(4, 3) && v >= 5.0));
    }

    #[test]
    fn matches_brute_force_on_sparse_and_dense_masks() {
        let mut s = 0x9e3779b97f4a7c15u64;
        for density in [1u64, 5, 30, 70, 97] {
            for _ in 0..10 {
                let (w, h) = (17, 23);
                let px: Vec<u8> = (0..w * h)
                    .map(|_| {
                        s ^= s << 13;
                        s ^= s >> 7;
                        s ^= s << 17;
                        u8::from(s % 100 < density)
                    })
                    .collect();
                if px.iter().all(|&v| v == 0) {
                    continue;
                }
                assert_eq!(squared_distance_transform(&px, w, h).unwrap(), brute(&px, w, h));
            }
        }
    }
}

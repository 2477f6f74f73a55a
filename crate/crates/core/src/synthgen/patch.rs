//! Patch scene elements: thresholded fBm noise and random simple polygons.

use crate::raster::{rasterize, GeoRef, Polygon, PolygonSet, RasterGrid, Ring};
use rand::Rng;
use std::f64::consts::PI;

const LACUNARITY: f64 = 2.0;
const GAIN: f64 = 0.5;
const POLYGON_RETRIES: usize = 32;

/// A binary patch on its own bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchMask {
    pub width: usize,
    pub height: usize,
    pub mask: Vec<u8>,
}

impl PatchMask {
    pub fn coverage(&self) -> f64 {
        self.mask.iter().filter(|&&v| v != 0).count() as f64 / self.mask.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbmParams {
    pub width: usize,
    pub height: usize,
    pub octaves: u32,
    /// Lattice cycles across the box for the first octave.
    pub base_frequency: f64,
    /// Fraction of the box to keep.
    pub coverage: f64,
    /// Blend weight of a radial window, `0` for pure noise.
    pub falloff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonParams {
    pub width: usize,
    pub height: usize,
    pub vertices: usize,
    pub radius_jitter: f64,
    pub angle_jitter: f64,
    /// Angle of the first vertex in degrees; random when `None`.
    pub rotation_deg: Option<f64>,
}

/// Hash-based lattice value in `[0, 1)`.
fn lattice(seed: u64, ix: i64, iy: i64) -> f64 {
    use crate::rng::mix64;
    let h = mix64(seed ^ mix64(mix64(ix as u64) ^ iy as u64));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (smooth(x - x0), smooth(y - y0));
    let (ix, iy) = (x0 as i64, y0 as i64);
    let a = lattice(seed, ix, iy);
    let b = lattice(seed, ix + 1, iy);
    let c = lattice(seed, ix, iy + 1);
    let d = lattice(seed, ix + 1, iy + 1);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Value-noise fBm sampled at pixel centers, normalized to `[0, 1]`.
pub fn fbm_field(seed: u64, width: usize, height: usize, octaves: u32, base_frequency: f64) -> Vec<f64> {
    let scale = base_frequency / width.max(height) as f64;
    let norm: f64 = (0..octaves).map(|o| GAIN.powi(o as i32)).sum();
    let mut field = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (x, y) = ((c as f64 + 0.5) * scale, (r as f64 + 0.5) * scale);
            let mut v = 0.0;
            let (mut freq, mut amp) = (1.0, 1.0);
            for o in 0..octaves {
                v += amp * value_noise(seed.wrapping_add(o as u64), x * freq, y * freq);
                freq *= LACUNARITY;
                amp *= GAIN;
            }
            field.push(v / norm);
        }
    }
    field
}

/// Keeps the top `coverage` fraction of `field`.
///
/// The threshold is the field value at rank `round(coverage · n)`, so the
/// achieved fraction is exact up to ties. A constant field yields an empty mask
/// unless full coverage is requested.
pub fn quantile_threshold(field: &[f64], coverage: f64) -> Vec<u8> {
    let n = field.len();
    let k = (coverage.clamp(0.0, 1.0) * n as f64).round() as usize;
    if k >= n {
        return vec![1; n];
    }
    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if k == 0 || lo == hi {
        return vec![0; n];
    }
    let mut sorted = field.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let thr = sorted[k - 1];
    field.iter().map(|&v| u8::from(v >= thr)).collect()
}

/// Thresholded fBm patch on a `width × height` box.
pub fn gen_fbm_patch<R: Rng + ?Sized>(rng: &mut R, params: &FbmParams) -> PatchMask {
    let noise_seed: u64 = rng.random();
    let (w, h) = (params.width, params.height);
    let mut field = fbm_field(noise_seed, w, h, params.octaves, params.base_frequency);
    if params.falloff > 0.0 {
        let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
        for (i, v) in field.iter_mut().enumerate() {
            let dx = ((i % w) as f64 + 0.5 - cx) / cx;
            let dy = ((i / w) as f64 + 0.5 - cy) / cy;
            let window = (1.0 - (dx * dx + dy * dy)).max(0.0);
            *v = (1.0 - params.falloff) * *v + params.falloff * window;
        }
    }
    PatchMask {
        width: w,
        height: h,
        mask: quantile_threshold(&field, params.coverage),
    }
}

/// Star-shaped random polygon, rasterized on its box by pixel-center
/// containment. Self-intersecting draws are rejected and redrawn; after
/// the retry budget the regular polygon is used.
pub fn gen_polygon_patch<R: Rng + ?Sized>(rng: &mut R, params: &PolygonParams) -> (PatchMask, Vec<(f64, f64)>) {
    let mut verts = None;
    for _ in 0..POLYGON_RETRIES {
        let v = draw_polygon(rng, params, true);
        if is_simple_polygon(&v) {
            verts = Some(v);
            break;
        }
    }
    let verts = verts.unwrap_or_else(|| draw_polygon(rng, params, false));
    (rasterize_box(&verts, params.width, params.height), verts)
}

fn draw_polygon<R: Rng + ?Sized>(rng: &mut R, p: &PolygonParams, jitter: bool) -> Vec<(f64, f64)> {
    let (cx, cy) = (p.width as f64 / 2.0, p.height as f64 / 2.0);
    let (rx, ry) = (cx - 0.5, cy - 0.5);
    let n = p.vertices.max(3);
    let spacing = 2.0 * PI / n as f64;
    let rot = match p.rotation_deg {
        Some(r) => r.to_radians(),
        None => rng.random_range(0.0..2.0 * PI),
    };
    (0..n)
        .map(|k| {
            let (mut a, mut scale) = (rot + k as f64 * spacing, 1.0);
            if jitter {
                if p.angle_jitter > 0.0 {
                    a += rng.random_range(-0.5..0.5) * p.angle_jitter * spacing;
                }
                if p.radius_jitter > 0.0 {
                    scale -= rng.random_range(0.0..p.radius_jitter);
                }
            }
            (cx + scale * rx * a.cos(), cy + scale * ry * a.sin())
        })
        .collect()
}

fn rasterize_box(verts: &[(f64, f64)], width: usize, height: usize) -> PatchMask {
    // polygon vertices are in box pixels (y down); pixel_space georef flips y
    let geo = GeoRef::pixel_space(height);
    let world: Vec<(f64, f64)> = verts.iter().map(|&(x, y)| geo.corner(x, y)).collect();
    let ring = Ring::closing(world).expect("polygon has at least 3 vertices");
    let set = PolygonSet::new(None, vec![Polygon::new(ring, Vec::new(), None)]);
    let template = RasterGrid::mask(width, height, geo, vec![0; width * height]).expect("non-empty box");
    let mask = rasterize(&set, &template)
        .expect("same CRS")
        .into_data();
    match mask {
        crate::raster::PixelData::U8(mask) => PatchMask { width, height, mask },
        crate::raster::PixelData::F32(_) => unreachable!("rasterize yields a mask"),
    }
}

/// True when no two non-adjacent edges of the closed polygon intersect.
pub fn is_simple_polygon(verts: &[(f64, f64)]) -> bool {
    let n = verts.len();
    for i in 0..n {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (verts[j], verts[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        r.0 >= p.0.min(q.0) && r.0 <= p.0.max(q.0) && r.1 >= p.1.min(q.1) && r.1 <= p.1.max(q.1)
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn fbm(coverage: f64, falloff: f64) -> FbmParams {
        FbmParams {
            width: 256,
            height: 256,
            octaves: 5,
            base_frequency: 3.0,
            coverage,
            falloff,
        }
    }

    #[test]
    fn coverage_extremes() {
        assert_eq!(gen_fbm_patch(&mut stream(1, 0), &fbm(0.0, 0.0)).coverage(), 0.0);
        assert_eq!(gen_fbm_patch(&mut stream(1, 0), &fbm(1.0, 0.0)).coverage(), 1.0);
    }

    #[test]
    fn coverage_target_is_met() {
        for seed in 0..10 {
            for falloff in [0.0, 0.7] {
                let c = gen_fbm_patch(&mut stream(seed, 0), &fbm(0.3, falloff)).coverage();
                assert!((0.28..=0.32).contains(&c), "coverage {c}");
            }
        }
    }

    #[test]
    fn constant_field_gives_empty_mask() {
        assert_eq!(quantile_threshold(&[0.5; 100], 0.3), vec![0; 100]);
    }

    #[test]
    fn fbm_is_seed_deterministic() {
        let a = gen_fbm_patch(&mut stream(9, 4), &fbm(0.4, 0.5));
        let b = gen_fbm_patch(&mut stream(9, 4), &fbm(0.4, 0.5));
        assert_eq!(a, b);
    }

    #[test]
    fn square_polygon_fills_a_square() {
        let p = PolygonParams {
            width: 21,
            height: 21,
            vertices: 4,
            radius_jitter: 0.0,
            angle_jitter: 0.0,
            rotation_deg: Some(45.0),
        };
        let (m, _) = gen_polygon_patch(&mut stream(0, 0), &p);
        let set: Vec<(usize, usize)> = (0..m.mask.len())
            .filter(|&i| m.mask[i] == 1)
            .map(|i| (i % 21, i / 21))
            .collect();
        let (x0, x1) = (set.iter().map(|p| p.0).min().unwrap(), set.iter().map(|p| p.0).max().unwrap());
        let (y0, y1) = (set.iter().map(|p| p.1).min().unwrap(), set.iter().map(|p| p.1).max().unwrap());
        assert_eq!(x1 - x0, y1 - y0);
        assert_eq!(set.len(), (x1 - x0 + 1) * (y1 - y0 + 1));
        assert!(set.len() > 100);
    }

    #[test]
    fn polygon_is_seed_deterministic() {
        let p = PolygonParams {
            width: 40,
            height: 30,
            vertices: 7,
            radius_jitter: 0.3,
            angle_jitter: 0.4,
            rotation_deg: None,
        };
        assert_eq!(gen_polygon_patch(&mut stream(5, 1), &p), gen_polygon_patch(&mut stream(5, 1), &p));
    }

    #[test]
    fn simplicity_check_catches_bowtie() {
        assert!(!is_simple_polygon(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]));
        assert!(is_simple_polygon(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]));
    }
}

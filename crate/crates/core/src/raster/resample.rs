use super::{Band, GeoRef, RasterGrid};
use crate::error::{Error, Result};

/// Block-mean downsampling to a coarser, integer-multiple pixel size.
///
/// The output grid shares the source origin. When the source extent is not a
/// multiple of the factor, the trailing partial blocks average only the source
/// pixels they cover.
pub fn resample_mean(src: &RasterGrid, target_pixel_size: f64) -> Result<RasterGrid> {
    let px = src.float_pixels()?;
    if !matches!(src.band(), Band::HeightF32 | Band::IndexF32) {
        return Err(Error::InvalidRaster("resample_mean needs a float band".into()));
    }
    let ratio = target_pixel_size / src.georef().pixel_size;
    let factor = ratio.round();
    if factor.is_nan() || factor < 1.0 || (ratio - factor).abs() > 1e-9 * factor.max(1.0) {
        return Err(Error::Alignment(format!(
            "target pixel size {target_pixel_size} is not an integer multiple of {}",
            src.georef().pixel_size
        )));
    }
    let k = factor as usize;
    let (w, h) = (src.width(), src.height());
    let (ow, oh) = (w.div_ceil(k), h.div_ceil(k));
    let mut sums = vec![0.0f64; ow * oh];
    let mut counts = vec![0u32; ow * oh];
    for r in 0..h {
        let orow = (r / k) * ow;
        for c in 0..w {
            let o = orow + c / k;
            sums[o] += px[r * w + c] as f64;
            counts[o] += 1;
        }
    }
    let data = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| (s / n as f64) as f32)
        .collect();
    let georef = GeoRef {
        pixel_size: target_pixel_size,
        ..*src.georef()
    };
    RasterGrid::float(ow, oh, georef, src.band(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn float(w: usize, h: usize, data: Vec<f32>) -> RasterGrid {
        RasterGrid::float(w, h, GeoRef::pixel_space(h), Band::IndexF32, data).unwrap()
    }

    #[test]
    fn two_by_two_mean() {
        let out = resample_mean(&float(2, 2, vec![0.2, 0.4, 0.6, 0.8]), 2.0).unwrap();
        assert_eq!((out.width(), out.height()), (1, 1));
        assert!((out.f32_data().unwrap()[0] - 0.5).abs() < 1e-7);
        assert_eq!(out.georef().pixel_size, 2.0);
    }

    #[test]
    fn checkerboard_averages_to_half() {
        let data = (0..16).map(|i| ((i % 4 + i / 4) % 2) as f32).collect();
        let out = resample_mean(&float(4, 4, data), 2.0).unwrap();
        assert_eq!(out.f32_data().unwrap(), &[0.5; 4]);
    }

    #[test]
    fn constant_is_preserved() {
        for k in 1..6 {
            let out = resample_mean(&float(10, 7, vec![3.25; 70]), k as f64).unwrap();
            assert!(out.f32_data().unwrap().iter().all(|&v| v == 3.25));
        }
    }

    #[test]
    fn non_integer_ratio_fails() {
        let g = float(4, 4, vec![0.0; 16]);
        assert!(matches!(resample_mean(&g, 1.5), Err(Error::Alignment(_))));
        assert!(matches!(resample_mean(&g, 0.5), Err(Error::Alignment(_))));
    }

    #[test]
    fn mask_input_is_rejected() {
        let g = RasterGrid::mask(2, 2, GeoRef::pixel_space(2), vec![0; 4]).unwrap();
        assert!(resample_mean(&g, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn factors_compose(a in 1usize..4, b in 1usize..4, bw in 1usize..4, bh in 1usize..4,
                           seed in any::<u64>()) {
            let (w, h) = (a * b * bw, a * b * bh);
            let mut s = seed;
            let data: Vec<f32> = (0..w * h).map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 40) as f32 / (1u64 << 24) as f32
            }).collect();
            let g = float(w, h, data);
            let two = resample_mean(&resample_mean(&g, a as f64).unwrap(), (a * b) as f64).unwrap();
            let one = resample_mean(&g, (a * b) as f64).unwrap();
            for (x, y) in two.f32_data().unwrap().iter().zip(one.f32_data().unwrap()) {
                prop_assert!((x - y).abs() <= 1e-6);
            }
        }
    }
}

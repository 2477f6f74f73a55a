//! Woody vegetation mask from height, NDVI and building inputs, or from a
//! canopy height model alone.

pub mod meta;
pub mod peaks;
pub mod threshold;

pub use meta::{leaf_on, LeafOnWindow, MonthDay, TileMeta};
pub use peaks::{find_peaks, histogram_ndvi, Histogram, Peak, PeakSet};
pub use threshold::{detect_threshold, SamplePass, ThresholdDecision, ThresholdKind};

use crate::error::{Error, Result};
use crate::raster::{read_raster, resample_mean, rasterize, Band, PolygonSet, RasterGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const DEFAULT_HEIGHT_THRESHOLD: f64 = 2.0;

fn zip_float(a: &RasterGrid, b: &RasterGrid, what: &str, band: Band, f: impl Fn(f32, f32) -> f32) -> Result<RasterGrid> {
    a.require_same_grid(b, what)?;
    let data = a
        .float_pixels()?
        .iter()
        .zip(b.float_pixels()?)
        .map(|(&x, &y)| f(x, y))
        .collect();
    RasterGrid::float(a.width(), a.height(), *a.georef(), band, data)
}

/// Normalized surface model, `dsm − dtm`.
pub fn ndsm(dsm: &RasterGrid, dtm: &RasterGrid) -> Result<RasterGrid> {
    zip_float(dsm, dtm, "ndsm", Band::HeightF32, |s, t| s - t)
}

/// 1 where height ≥ threshold. NaN heights are background.
pub fn height_mask(heights: &RasterGrid, threshold: f64) -> Result<RasterGrid> {
    let data = heights
        .float_pixels()?
        .iter()
        .map(|&h| u8::from(h as f64 >= threshold))
        .collect();
    RasterGrid::mask(heights.width(), heights.height(), *heights.georef(), data)
}

/// Canopy height thresholding; same rule as [`height_mask`].
pub fn chm_mask(chm: &RasterGrid, threshold: f64) -> Result<RasterGrid> {
    height_mask(chm, threshold)
}

/// Reads a canopy height raster and thresholds it straight away.
pub fn load_chm_mask(path: &Path, threshold: f64) -> Result<RasterGrid> {
    chm_mask(&read_raster(path)?, threshold)
}

/// `(nir − red) / (nir + red)`, 0 where the denominator is 0.
pub fn ndvi(red: &RasterGrid, nir: &RasterGrid) -> Result<RasterGrid> {
    zip_float(red, nir, "ndvi", Band::IndexF32, |r, n| {
        let d = n + r;
        if d == 0.0 {
            0.0
        } else {
            (n - r) / d
        }
    })
}

/// Height mask minus buildings, further restricted to `ndvi ≥ threshold`
/// when the decision carries one.
pub fn build_woody_mask(
    height: &RasterGrid,
    buildings: &RasterGrid,
    decision: &ThresholdDecision,
    ndvi_1m: Option<&RasterGrid>,
) -> Result<RasterGrid> {
    height.require_same_grid(buildings, "building mask")?;
    let h = height.mask_pixels()?;
    let b = buildings.mask_pixels()?;
    let nd = match (decision.threshold, ndvi_1m) {
        (Some(t), Some(n)) => {
            height.require_same_grid(n, "ndvi")?;
            Some((t, n.float_pixels()?))
        }
        (Some(_), None) => {
            return Err(Error::InvalidParameter("a threshold decision needs the NDVI raster".into()))
        }
        (None, _) => None,
    };
    let data = (0..h.len())
        .map(|i| {
            let veg = nd.is_none_or(|(t, n)| n[i] as f64 >= t);
            u8::from(h[i] != 0 && b[i] == 0 && veg)
        })
        .collect();
    RasterGrid::mask(height.width(), height.height(), *height.georef(), data)
}

/// Building footprints burned onto a grid.
pub fn building_mask(footprints: &PolygonSet, template: &RasterGrid) -> Result<RasterGrid> {
    rasterize(footprints, template)
}

/// Inputs for one tile. `red` and `nir` may be finer than the height grid
/// by an integer factor.
#[derive(Debug, Clone)]
pub struct TileInputs {
    pub id: String,
    pub dsm: RasterGrid,
    pub dtm: RasterGrid,
    pub red: Option<RasterGrid>,
    pub nir: Option<RasterGrid>,
    pub buildings: RasterGrid,
    pub meta: TileMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskParams {
    pub height_threshold: f64,
}

impl Default for MaskParams {
    fn default() -> Self {
        Self {
            height_threshold: DEFAULT_HEIGHT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionLog {
    pub tile: String,
    pub leaf_on: bool,
    pub kind: ThresholdKind,
    pub threshold: Option<f64>,
    /// Absent when the NDVI branch did not run.
    pub pass: Option<SamplePass>,
}

#[derive(Debug, Clone)]
pub struct TileResult {
    pub woody: RasterGrid,
    pub log: DecisionLog,
}

pub fn process_tile(t: &TileInputs, params: &MaskParams) -> Result<TileResult> {
    t.meta.validate()?;
    let heights = ndsm(&t.dsm, &t.dtm)?;
    let hmask = height_mask(&heights, params.height_threshold)?;
    let is_leaf_on = leaf_on(&t.meta);
    let (decision, ndvi_1m, ran) = match (is_leaf_on, &t.red, &t.nir) {
        (true, Some(red), Some(nir)) => {
            let fine = ndvi(red, nir)?;
            let coarse = resample_mean(&fine, heights.georef().pixel_size)?;
            hmask.require_same_grid(&coarse, "resampled ndvi")?;
            let d = detect_threshold(coarse.float_pixels()?, hmask.mask_pixels()?);
            (d, Some(coarse), true)
        }
        (true, ..) => {
            return Err(Error::InvalidParameter(format!(
                "tile {}: leaf-on tile needs red and near-infrared bands",
                t.id
            )))
        }
        _ => (ThresholdDecision::none(SamplePass::HeightMasked), None, false),
    };
    let woody = build_woody_mask(&hmask, &t.buildings, &decision, ndvi_1m.as_ref())?;
    log::debug!("tile {}: {:?} threshold {:?}", t.id, decision.kind, decision.threshold);
    Ok(TileResult {
        woody,
        log: DecisionLog {
            tile: t.id.clone(),
            leaf_on: is_leaf_on,
            kind: decision.kind,
            threshold: decision.threshold,
            pass: ran.then_some(decision.pass),
        },
    })
}

/// Processes tiles in parallel; results keep the input order.
pub fn process_tiles(tiles: &[TileInputs], params: &MaskParams) -> Result<Vec<TileResult>> {
    tiles.par_iter().map(|t| process_tile(t, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GeoRef;
    use proptest::prelude::*;

    fn float(w: usize, h: usize, band: Band, v: Vec<f32>) -> RasterGrid {
        RasterGrid::float(w, h, GeoRef::pixel_space(h), band, v).unwrap()
    }

    fn mask(w: usize, h: usize, v: Vec<u8>) -> RasterGrid {
        RasterGrid::mask(w, h, GeoRef::pixel_space(h), v).unwrap()
    }

    #[test]
    fn ndsm_subtracts() {
        let s = float(2, 1, Band::HeightF32, vec![10.5, 3.0]);
        let t = float(2, 1, Band::HeightF32, vec![8.0, 3.0]);
        assert_eq!(ndsm(&s, &t).unwrap().float_pixels().unwrap(), &[2.5, 0.0]);
        let other = float(1, 2, Band::HeightF32, vec![0.0, 0.0]);
        assert!(matches!(ndsm(&s, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn height_threshold_is_inclusive() {
        let h = float(3, 1, Band::HeightF32, vec![1.99, 2.0, 0.0]);
        assert_eq!(height_mask(&h, 2.0).unwrap().mask_pixels().unwrap(), &[0, 1, 0]);
        assert_eq!(height_mask(&h, f64::NEG_INFINITY).unwrap().mask_pixels().unwrap(), &[1, 1, 1]);
        assert_eq!(chm_mask(&h, 1.0).unwrap().mask_pixels().unwrap(), &[1, 1, 0]);
    }

    #[test]
    fn ndvi_cases() {
        let red = float(4, 1, Band::IndexF32, vec![0.3, 0.0, 0.6, 0.0]);
        let nir = float(4, 1, Band::IndexF32, vec![0.3, 0.5, 0.2, 0.0]);
        let v = ndvi(&red, &nir).unwrap();
        let v = v.float_pixels().unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 1.0);
        assert!((v[2] + 0.5).abs() < 1e-6);
        assert_eq!(v[3], 0.0);
    }

    #[test]
    fn woody_branches() {
        let h = mask(2, 1, vec![1, 1]);
        let everywhere = mask(2, 1, vec![1, 1]);
        let none = ThresholdDecision::none(SamplePass::FullRaster);
        let out = build_woody_mask(&h, &everywhere, &none, None).unwrap();
        assert_eq!(out.mask_pixels().unwrap(), &[0, 0]);

        let nob = mask(2, 1, vec![0, 0]);
        let nd = float(2, 1, Band::IndexF32, vec![0.2, 0.5]);
        let mut d = none.clone();
        d.kind = ThresholdKind::Valley;
        d.threshold = Some(0.3);
        let out = build_woody_mask(&h, &nob, &d, Some(&nd)).unwrap();
        assert_eq!(out.mask_pixels().unwrap(), &[0, 1]);
        assert!(build_woody_mask(&h, &nob, &d, None).is_err());
    }

    #[test]
    fn leaf_off_tile_uses_height_only() {
        let n = 16;
        let dsm = float(n, n, Band::HeightF32, (0..n * n).map(|i| (i % 5) as f32).collect());
        let dtm = float(n, n, Band::HeightF32, vec![0.0; n * n]);
        let t = TileInputs {
            id: "t".into(),
            dsm,
            dtm,
            red: None,
            nir: None,
            buildings: mask(n, n, (0..n * n).map(|i| u8::from(i < n)).collect()),
            meta: TileMeta::new(vec!["2023-11-02".parse().unwrap()]),
        };
        let r = process_tile(&t, &MaskParams::default()).unwrap();
        assert_eq!(r.log.kind, ThresholdKind::None);
        assert_eq!(r.log.pass, None);
        let w = r.woody.mask_pixels().unwrap();
        for i in 0..n * n {
            assert_eq!(w[i], u8::from(i >= n && i % 5 >= 2));
        }
    }

    #[test]
    fn leaf_on_tile_resamples_ndvi() {
        // 8x8 height grid at 1 m, 40x40 bands at 0.2 m
        let n = 8;
        let geo = GeoRef {
            origin_x: 0.0,
            origin_y: 8.0,
            pixel_size: 1.0,
            epsg: 25832,
        };
        let fine = GeoRef {
            pixel_size: 0.2,
            ..geo
        };
        let h = |v: Vec<f32>| RasterGrid::float(n, n, geo, Band::HeightF32, v).unwrap();
        let b = |v: Vec<f32>| RasterGrid::float(5 * n, 5 * n, fine, Band::IndexF32, v).unwrap();
        // left half vegetated, right half bare
        let nir: Vec<f32> = (0..25 * n * n).map(|i| if i % (5 * n) < 20 { 0.8 } else { 0.2 }).collect();
        let t = TileInputs {
            id: "leaf".into(),
            dsm: h(vec![5.0; n * n]),
            dtm: h(vec![0.0; n * n]),
            red: Some(b(vec![0.2; 25 * n * n])),
            nir: Some(b(nir)),
            buildings: RasterGrid::mask(n, n, geo, vec![0; n * n]).unwrap(),
            meta: TileMeta::new(vec!["2023-07-01".parse().unwrap()]),
        };
        let r = process_tile(&t, &MaskParams::default()).unwrap();
        assert!(r.log.leaf_on);
        assert_eq!(r.log.kind, ThresholdKind::Valley);
        let w = r.woody.mask_pixels().unwrap();
        for i in 0..n * n {
            assert_eq!(w[i], u8::from(i % n < 4), "pixel {i}");
        }
    }

    proptest! {
        #[test]
        fn woody_mask_invariants(
            hv in prop::collection::vec(0u8..2, 36),
            bv in prop::collection::vec(0u8..2, 36),
            nv in prop::collection::vec(-0.5f32..1.0, 36),
            t in -0.5f64..1.0,
        ) {
            let (h, b) = (mask(6, 6, hv), mask(6, 6, bv));
            let nd = float(6, 6, Band::IndexF32, nv);
            let none = ThresholdDecision::none(SamplePass::FullRaster);
            let mut valley = none.clone();
            valley.kind = ThresholdKind::Valley;
            valley.threshold = Some(t);
            let base = build_woody_mask(&h, &b, &none, None).unwrap();
            let vm = build_woody_mask(&h, &b, &valley, Some(&nd)).unwrap();
            let (base, vm) = (base.mask_pixels().unwrap(), vm.mask_pixels().unwrap());
            let (h, b) = (h.mask_pixels().unwrap(), b.mask_pixels().unwrap());
            for i in 0..36 {
                prop_assert!(base[i] <= h[i]);
                prop_assert!(base[i] == 0 || b[i] == 0);
                prop_assert!(vm[i] <= base[i]);
            }
        }

        #[test]
        fn ndsm_matches_elementwise(v in prop::collection::vec((-50f32..50.0, -50f32..50.0), 12)) {
            let s = float(4, 3, Band::HeightF32, v.iter().map(|p| p.0).collect());
            let t = float(4, 3, Band::HeightF32, v.iter().map(|p| p.1).collect());
            let d = ndsm(&s, &t).unwrap();
            for (got, (a, b)) in d.float_pixels().unwrap().iter().zip(&v) {
                prop_assert_eq!(*got, a - b);
            }
        }
    }
}

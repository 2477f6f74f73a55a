//! Georeferenced single-band rasters and the vector/catalog types that travel
//! alongside them.
//!
//! Rows run north to south: the origin is the upper-left corner of pixel
//! `(0, 0)` and `y` decreases with increasing row index.

mod catalog;
pub mod io;
mod rasterize;
mod resample;
pub mod vector;

pub use catalog::{CatalogEntry, GridCatalog};
pub use io::{read_raster, write_raster};
pub use rasterize::rasterize;
pub use resample::resample_mean;
pub use vector::{Polygon, PolygonSet, Ring};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Placement of a raster in a projected CRS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoRef {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size: f64,
    pub epsg: u32,
}

impl GeoRef {
    /// Unit pixels anchored at the origin, for synthetic canvases.
    pub fn pixel_space(height: usize) -> Self {
        GeoRef {
            origin_x: 0.0,
            origin_y: height as f64,
            pixel_size: 1.0,
            epsg: 0,
        }
    }

    /// World coordinate of the pixel corner `(col, row)`.
    pub fn corner(&self, col: f64, row: f64) -> (f64, f64) {
        (
            self.origin_x + col * self.pixel_size,
            self.origin_y - row * self.pixel_size,
        )
    }

    /// Continuous pixel coordinate `(col, row)` of a world point.
    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x) / self.pixel_size,
            (self.origin_y - y) / self.pixel_size,
        )
    }

    /// Georef of a sub-window starting at pixel `(col, row)`.
    pub fn offset(&self, col: i64, row: i64) -> Self {
        let (x, y) = self.corner(col as f64, row as f64);
        GeoRef {
            origin_x: x,
            origin_y: y,
            ..*self
        }
    }
}

/// Pixel semantics of a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Binary mask, values in {0, 1}.
    Mask8,
    /// Class map, values in {0 background, 1 linear, 2 non-linear}.
    Class8,
    /// Heights in meters.
    HeightF32,
    /// Any other float quantity (indices, distances, probabilities).
    IndexF32,
}

impl Band {
    pub fn is_u8(self) -> bool {
        matches!(self, Band::Mask8 | Band::Class8)
    }

    fn max_value(self) -> Option<u8> {
        match self {
            Band::Mask8 => Some(1),
            Band::Class8 => Some(2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PixelData {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

impl PixelData {
    fn len(&self) -> usize {
        match self {
            PixelData::U8(v) => v.len(),
            PixelData::F32(v) => v.len(),
        }
    }
}

/// A single-band raster. Pixels are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    width: usize,
    height: usize,
    georef: GeoRef,
    band: Band,
    data: PixelData,
}

impl RasterGrid {
    /// Builds a raster, checking dimensions, pixel size and band value ranges.
    pub fn new(
        width: usize,
        height: usize,
        georef: GeoRef,
        band: Band,
        data: PixelData,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if !georef.pixel_size.is_finite() || georef.pixel_size <= 0.0 {
            return Err(Error::InvalidRaster(format!(
                "pixel size must be positive, got {}",
                georef.pixel_size
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "expected {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        match (&data, band.is_u8()) {
            (PixelData::U8(v), true) => {
                let max = band.max_value().unwrap_or(u8::MAX);
                if let Some(bad) = v.iter().find(|&&p| p > max) {
                    return Err(Error::InvalidRaster(format!(
                        "{band:?} raster holds out-of-range value {bad}"
                    )));
                }
            }
            (PixelData::F32(_), false) => {}
            _ => {
                return Err(Error::InvalidRaster(format!(
                    "pixel storage does not match band {band:?}"
                )))
            }
        }
        Ok(RasterGrid {
            width,
            height,
            georef,
            band,
            data,
        })
    }

    pub fn mask(width: usize, height: usize, georef: GeoRef, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, georef, Band::Mask8, PixelData::U8(data))
    }

    pub fn class(width: usize, height: usize, georef: GeoRef, data: Vec<u8>) -> Result<Self> {
        Self::new(width, height, georef, Band::Class8, PixelData::U8(data))
    }

    pub fn float(
        width: usize,
        height: usize,
        georef: GeoRef,
        band: Band,
        data: Vec<f32>,
    ) -> Result<Self> {
        Self::new(width, height, georef, band, PixelData::F32(data))
    }

    /// An all-zero raster of the given band on an existing grid.
    pub fn zeros_like(&self, band: Band) -> Self {
        let n = self.width * self.height;
        let data = if band.is_u8() {
            PixelData::U8(vec![0; n])
        } else {
            PixelData::F32(vec![0.0; n])
        };
        RasterGrid {
            width: self.width,
            height: self.height,
            georef: self.georef,
            band,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn georef(&self) -> &GeoRef {
        &self.georef
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn data(&self) -> &PixelData {
        &self.data
    }

    pub fn u8_data(&self) -> Option<&[u8]> {
        match &self.data {
            PixelData::U8(v) => Some(v),
            PixelData::F32(_) => None,
        }
    }

    pub fn f32_data(&self) -> Option<&[f32]> {
        match &self.data {
            PixelData::F32(v) => Some(v),
            PixelData::U8(_) => None,
        }
    }

    /// Binary mask pixels; errors unless the band is `Mask8`.
    pub fn mask_pixels(&self) -> Result<&[u8]> {
        match (&self.data, self.band) {
            (PixelData::U8(v), Band::Mask8) => Ok(v),
            _ => Err(Error::InvalidRaster(format!(
                "expected a mask8 raster, got {:?}",
                self.band
            ))),
        }
    }

    pub fn class_pixels(&self) -> Result<&[u8]> {
        match (&self.data, self.band) {
            (PixelData::U8(v), Band::Class8) => Ok(v),
            _ => Err(Error::InvalidRaster(format!(
                "expected a class8 raster, got {:?}",
                self.band
            ))),
        }
    }

    pub fn float_pixels(&self) -> Result<&[f32]> {
        self.f32_data().ok_or_else(|| {
            Error::InvalidRaster(format!("expected a float raster, got {:?}", self.band))
        })
    }

    pub fn into_data(self) -> PixelData {
        self.data
    }

    /// True when both rasters share dimensions and georeference.
    pub fn same_grid(&self, other: &RasterGrid) -> bool {
        self.width == other.width && self.height == other.height && self.georef == other.georef
    }

    pub(crate) fn require_same_grid(&self, other: &RasterGrid, what: &str) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {}x{} {:?} vs {}x{} {:?}",
                self.width, self.height, self.georef, other.width, other.height, other.georef
            )))
        }
    }

    /// Replaces the georeference, keeping pixels.
    pub fn with_georef(mut self, georef: GeoRef) -> Self {
        self.georef = georef;
        self
    }
}

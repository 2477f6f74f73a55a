use super::{read_raster, GeoRef, PixelData, RasterGrid};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub path: PathBuf,
    /// `[minx, miny, maxx, maxy]` in CRS units.
    pub bbox: [f64; 4],
}

/// An explicit list of raster tiles forming one mosaic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCatalog {
    pub epsg: u32,
    pub entries: Vec<CatalogEntry>,
}

impl GridCatalog {
    /// Loads a catalog; relative entry paths resolve against the catalog's directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cat: GridCatalog = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut cat.entries {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
        }
        Ok(cat)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_vec_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    /// Builds a catalog entry from a raster already on disk.
    pub fn entry_for(path: impl Into<PathBuf>, grid: &RasterGrid) -> CatalogEntry {
        let g = grid.georef();
        let (x1, y0) = g.corner(grid.width() as f64, grid.height() as f64);
        CatalogEntry {
            path: path.into(),
            bbox: [g.origin_x, y0, x1, g.origin_y],
        }
    }

    /// Reads every tile and pastes it onto the union grid.
    ///
    /// Tiles must share band, pixel size and CRS, and sit on a common pixel
    /// lattice. Pixels not covered by any tile are zero.
    pub fn mosaic(&self) -> Result<RasterGrid> {
        let tiles = self
            .entries
            .iter()
            .map(|e| read_raster(&e.path))
            .collect::<Result<Vec<_>>>()?;
        mosaic_tiles(self.epsg, &tiles)
    }
}

pub(crate) fn mosaic_tiles(epsg: u32, tiles: &[RasterGrid]) -> Result<RasterGrid> {
    let first = tiles
        .first()
        .ok_or_else(|| Error::InvalidParameter("catalog has no entries".into()))?;
    let ps = first.georef().pixel_size;
    let band = first.band();
    let (mut minx, mut maxy) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in tiles {
        let g = t.georef();
        if g.epsg != epsg {
            return Err(Error::GridMismatch(format!(
                "tile in EPSG:{} inside EPSG:{epsg} catalog",
                g.epsg
            )));
        }
        if g.pixel_size != ps || t.band() != band {
            return Err(Error::GridMismatch("tiles differ in pixel size or band".into()));
        }
        minx = minx.min(g.origin_x);
        maxy = maxy.max(g.origin_y);
    }
    let offset = |t: &RasterGrid| -> Result<(usize, usize)> {
        let (c, r) = ((t.georef().origin_x - minx) / ps, (maxy - t.georef().origin_y) / ps);
        if (c - c.round()).abs() > 1e-6 || (r - r.round()).abs() > 1e-6 {
            return Err(Error::Alignment("tiles are not on a common pixel lattice".into()));
        }
        Ok((c.round() as usize, r.round() as usize))
    };
    let (mut w, mut h) = (0, 0);
    for t in tiles {
        let (c, r) = offset(t)?;
        w = w.max(c + t.width());
        h = h.max(r + t.height());
    }
    let georef = GeoRef {
        origin_x: minx,
        origin_y: maxy,
        pixel_size: ps,
        epsg,
    };
    let mut out = match first.data() {
        PixelData::U8(_) => PixelData::U8(vec![0; w * h]),
        PixelData::F32(_) => PixelData::F32(vec![0.0; w * h]),
    };
    for t in tiles {
        let (c, r) = offset(t)?;
        for row in 0..t.height() {
            let dst = (r + row) * w + c;
            let src = row * t.width();
            match (&mut out, t.data()) {
                (PixelData::U8(o), PixelData::U8(s)) => {
                    o[dst..dst + t.width()].copy_from_slice(&s[src..src + t.width()])
                }
                (PixelData::F32(o), PixelData::F32(s)) => {
                    o[dst..dst + t.width()].copy_from_slice(&s[src..src + t.width()])
                }
                _ => unreachable!("band checked above"),
            }
        }
    }
    RasterGrid::new(w, h, georef, band, out)
}

//! On-disk raster formats.
//!
//! * `mask8` / `class8`: binary PGM (`P5`). The maxval field carries the band:
//!   `1` for masks, `2` for class maps.
//! * `height_f32` / `index_f32`: a 16-byte header (8-byte magic, width and
//!   height as little-endian `u32`) followed by little-endian `f32` pixels.
//!
//! Every raster file `f` has a JSON sidecar `f.json` holding
//! `{"origin_x", "origin_y", "pixel_size", "epsg"}`.

use super::{Band, GeoRef, PixelData, RasterGrid};
use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};

pub const HEIGHT_MAGIC: &[u8; 8] = b"WLRF32H\n";
pub const INDEX_MAGIC: &[u8; 8] = b"WLRF32I\n";
pub const FLOAT_HEADER_LEN: usize = 16;

/// Sidecar path for a raster file: the file name with `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Serializes pixels (without the sidecar).
pub fn encode_pixels(grid: &RasterGrid) -> Vec<u8> {
    match grid.data() {
        PixelData::U8(px) => {
            let maxval = grid.band().max_value().unwrap_or(u8::MAX);
            let mut out = format!("P5\n{} {}\n{}\n", grid.width(), grid.height(), maxval).into_bytes();
            out.extend_from_slice(px);
            out
        }
        PixelData::F32(px) => {
            let magic = if grid.band() == Band::HeightF32 {
                HEIGHT_MAGIC
            } else {
                INDEX_MAGIC
            };
            let mut out = Vec::with_capacity(FLOAT_HEADER_LEN + 4 * px.len());
            out.extend_from_slice(magic);
            out.extend_from_slice(&(grid.width() as u32).to_le_bytes());
            out.extend_from_slice(&(grid.height() as u32).to_le_bytes());
            for v in px {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out
        }
    }
}

/// Writes the raster and its sidecar.
pub fn write_raster(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pixels(grid)).map_err(|e| Error::io(path, e))?;
    let sidecar = sidecar_path(path);
    let json = serde_json::to_vec_pretty(grid.georef())?;
    fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

/// Reads a raster and its sidecar. The format is detected from the leading bytes.
pub fn read_raster(path: impl AsRef<Path>) -> Result<RasterGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let georef = read_sidecar(path)?;
    decode_pixels(&bytes, georef, path)
}

fn read_sidecar(path: &Path) -> Result<GeoRef> {
    let sidecar = sidecar_path(path);
    let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Sidecar {
        path: sidecar.clone(),
        reason: e.to_string(),
    })?;
    let field = |key: &str| -> Result<&serde_json::Value> {
        value.get(key).ok_or_else(|| Error::Sidecar {
            path: sidecar.clone(),
            reason: format!("missing field \"{key}\""),
        })
    };
    let num = |key: &str| -> Result<f64> {
        field(key)?.as_f64().ok_or_else(|| Error::Sidecar {
            path: sidecar.clone(),
            reason: format!("field \"{key}\" is not a number"),
        })
    };
    let epsg = field("epsg")?
        .as_u64()
        .and_then(|e| u32::try_from(e).ok())
        .ok_or_else(|| Error::Sidecar {
            path: sidecar.clone(),
            reason: "field \"epsg\" is not an unsigned integer".into(),
        })?;
    Ok(GeoRef {
        origin_x: num("origin_x")?,
        origin_y: num("origin_y")?,
        pixel_size: num("pixel_size")?,
        epsg,
    })
}

/// Parses raster bytes produced by [`encode_pixels`].
pub fn decode_pixels(bytes: &[u8], georef: GeoRef, path: &Path) -> Result<RasterGrid> {
    let header_err = |reason: String| Error::Header {
        path: path.to_owned(),
        reason,
    };
    if bytes.starts_with(b"P5") {
        let (fields, offset) = pgm_header(bytes).ok_or_else(|| header_err("truncated PGM header".into()))?;
        let [width, height, maxval] = fields;
        let band = match maxval {
            1 => Band::Mask8,
            2 => Band::Class8,
            m => return Err(header_err(format!("unsupported PGM maxval {m}"))),
        };
        let body = &bytes[offset..];
        if body.len() != width * height {
            return Err(header_err(format!(
                "expected {} pixel bytes for {width}x{height}, found {}",
                width * height,
                body.len()
            )));
        }
        RasterGrid::new(width, height, georef, band, PixelData::U8(body.to_vec()))
            .map_err(|e| header_err(e.to_string()))
    } else if bytes.len() >= FLOAT_HEADER_LEN {
        let band = match &bytes[..8] {
            m if m == HEIGHT_MAGIC => Band::HeightF32,
            m if m == INDEX_MAGIC => Band::IndexF32,
            _ => return Err(header_err("unknown magic".into())),
        };
        let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let body = &bytes[FLOAT_HEADER_LEN..];
        if body.len() != 4 * width * height {
            return Err(header_err(format!(
                "expected {} float bytes for {width}x{height}, found {}",
                4 * width * height,
                body.len()
            )));
        }
        let px = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        RasterGrid::new(width, height, georef, band, PixelData::F32(px))
            .map_err(|e| header_err(e.to_string()))
    } else {
        Err(header_err("unrecognized raster format".into()))
    }
}

/// Returns `[width, height, maxval]` and the byte offset of the pixel data.
fn pgm_header(bytes: &[u8]) -> Option<([usize; 3], usize)> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos)? {
                b if b.is_ascii_whitespace() => pos += 1,
                b'#' => {
                    while *bytes.get(pos)? != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos)?.is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos]).ok()?.parse().ok()?;
    }
    // exactly one whitespace byte separates maxval from the raster
    if !bytes.get(pos)?.is_ascii_whitespace() {
        return None;
    }
    Some((fields, pos + 1))
}

//! Polygon sets and their GeoJSON encoding.
//!
//! Features are GeoJSON `Polygon`s (a `MultiPolygon` is split into one
//! [`Polygon`] per part on read). The class label lives in the `cls` property;
//! other properties are carried through untouched. The CRS is written as the
//! legacy named-CRS member (`"urn:ogc:def:crs:EPSG::<code>"`).

use crate::error::{Error, Result};
use serde_json::{json, Map, Value};
use std::fs;
use std::path::Path;

/// A closed ring of CRS coordinates (first vertex repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(Vec<(f64, f64)>);

impl Ring {
    /// Validates closure and the minimum vertex count.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidGeometry(format!(
                "ring needs at least 4 vertices, got {}",
                points.len()
            )));
        }
        if points.first() != points.last() {
            return Err(Error::InvalidGeometry("ring is not closed".into()));
        }
        Ok(Ring(points))
    }

    /// Closes an open vertex list by repeating its first vertex.
    pub fn closing(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(&first) = points.first() {
            if points.last() != Some(&first) || points.len() == 1 {
                points.push(first);
            }
        }
        Ring::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.0
    }

    /// Shoelace area; positive for counter-clockwise rings in a y-up frame.
    pub fn signed_area(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
            .sum::<f64>()
            / 2.0
    }

    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for &(x, y) in &self.0 {
            b[0] = b[0].min(x);
            b[1] = b[1].min(y);
            b[2] = b[2].max(x);
            b[3] = b[3].max(y);
        }
        b
    }
}

/// A polygon with optional holes, a class label and free-form attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
    pub cls: Option<u8>,
    pub attributes: Map<String, Value>,
}

impl Polygon {
    pub fn new(exterior: Ring, holes: Vec<Ring>, cls: Option<u8>) -> Self {
        Polygon {
            exterior,
            holes,
            cls,
            attributes: Map::new(),
        }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(&self.holes)
    }

    /// Exterior area minus hole areas, in squared CRS units.
    pub fn area(&self) -> f64 {
        self.exterior.signed_area().abs() - self.holes.iter().map(|h| h.signed_area().abs()).sum::<f64>()
    }

    /// Axis-aligned rectangle `[minx, miny, maxx, maxy]`.
    pub fn rect(bbox: [f64; 4], cls: Option<u8>) -> Self {
        let [x0, y0, x1, y1] = bbox;
        let ring = Ring(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]);
        Polygon::new(ring, Vec::new(), cls)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolygonSet {
    /// `None` when the source did not declare a CRS.
    pub epsg: Option<u32>,
    pub polygons: Vec<Polygon>,
}

impl PolygonSet {
    pub fn new(epsg: Option<u32>, polygons: Vec<Polygon>) -> Self {
        PolygonSet { epsg, polygons }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn total_area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn to_geojson(&self) -> Value {
        let features: Vec<Value> = self
            .polygons
            .iter()
            .map(|p| {
                let coords: Vec<Value> = p
                    .rings()
                    .map(|r| Value::Array(r.points().iter().map(|&(x, y)| json!([x, y])).collect()))
                    .collect();
                let mut props = p.attributes.clone();
                if let Some(cls) = p.cls {
                    props.insert("cls".into(), json!(cls));
                }
                json!({
                    "type": "Feature",
                    "properties": props,
                    "geometry": {"type": "Polygon", "coordinates": coords},
                })
            })
            .collect();
        let mut fc = json!({"type": "FeatureCollection", "features": features});
        if let Some(epsg) = self.epsg {
            fc["crs"] = json!({
                "type": "name",
                "properties": {"name": format!("urn:ogc:def:crs:EPSG::{epsg}")},
            });
        }
        fc
    }

    pub fn from_geojson(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidGeometry(m.to_string());
        if value.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
            return Err(bad("expected a FeatureCollection"));
        }
        let epsg = value
            .pointer("/crs/properties/name")
            .and_then(Value::as_str)
            .map(parse_crs_name)
            .transpose()?;
        let features = value
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing features array"))?;
        let mut polygons = Vec::new();
        for f in features {
            let mut props = f
                .get("properties")
                .and_then(Value::as_object)
                .cloned()
                .unwrap_or_default();
            let cls = match props.remove("cls") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_u64()
                        .and_then(|c| u8::try_from(c).ok())
                        .ok_or_else(|| bad("\"cls\" must be a small unsigned integer"))?,
                ),
            };
            let geom = f.get("geometry").ok_or_else(|| bad("feature without geometry"))?;
            let coords = geom.get("coordinates").ok_or_else(|| bad("geometry without coordinates"))?;
            let parts: Vec<&Value> = match geom.get("type").and_then(Value::as_str) {
                Some("Polygon") => vec![coords],
                Some("MultiPolygon") => coords
                    .as_array()
                    .ok_or_else(|| bad("malformed MultiPolygon"))?
                    .iter()
                    .collect(),
                other => return Err(bad(&format!("unsupported geometry type {other:?}"))),
            };
            for part in parts {
                let rings = part
                    .as_array()
                    .ok_or_else(|| bad("malformed polygon coordinates"))?
                    .iter()
                    .map(parse_ring)
                    .collect::<Result<Vec<_>>>()?;
                let mut rings = rings.into_iter();
                let exterior = rings.next().ok_or_else(|| bad("polygon without rings"))?;
                polygons.push(Polygon {
                    exterior,
                    holes: rings.collect(),
                    cls,
                    attributes: props.clone(),
                });
            }
        }
        Ok(PolygonSet { epsg, polygons })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_geojson(&serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_geojson())?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn parse_crs_name(name: &str) -> Result<u32> {
    name.rsplit(':')
        .next()
        .and_then(|code| code.parse().ok())
        .ok_or_else(|| Error::InvalidGeometry(format!("unrecognized CRS name {name:?}")))
}

fn parse_ring(value: &Value) -> Result<Ring> {
    let pts = value
        .as_array()
        .ok_or_else(|| Error::InvalidGeometry("ring is not an array".into()))?
        .iter()
        .map(|p| {
            let xy = p.as_array().filter(|a| a.len() >= 2);
            match xy.map(|a| (a[0].as_f64(), a[1].as_f64())) {
                Some((Some(x), Some(y))) => Ok((x, y)),
                _ => Err(Error::InvalidGeometry("malformed position".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ring::new(pts)
}

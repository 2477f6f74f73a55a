use crate::error::{Error, Result};
use crate::raster::{Polygon, PolygonSet, Ring};
use geo::{unary_union, Area, BooleanOps, BoundingRect, Intersects};

pub const DEFAULT_MIN_AREA: f64 = 250.0;

fn to_geo(p: &Polygon) -> geo::Polygon<f64> {
    let ls = |r: &Ring| geo::LineString::from(r.points().to_vec());
    geo::Polygon::new(ls(&p.exterior), p.holes.iter().map(ls).collect())
}

fn from_geo(g: &geo::Polygon<f64>, template: &Polygon) -> Result<Polygon> {
    let ring = |ls: &geo::LineString<f64>| Ring::closing(ls.coords().map(|c| (c.x, c.y)).collect());
    Ok(Polygon {
        exterior: ring(g.exterior())?,
        holes: g.interiors().iter().map(ring).collect::<Result<_>>()?,
        cls: template.cls,
        attributes: template.attributes.clone(),
    })
}

fn usable(p: &Polygon) -> bool {
    let finite = p.rings().all(|r| r.points().iter().all(|(x, y)| x.is_finite() && y.is_finite()));
    finite && p.exterior.signed_area() != 0.0
}

fn check_crs(a: &PolygonSet, b: &PolygonSet, what: &str) -> Result<()> {
    match (a.epsg, b.epsg) {
        (Some(x), Some(y)) if x != y => Err(Error::InvalidGeometry(format!(
            "{what} is in EPSG:{y}, predictions in EPSG:{x}"
        ))),
        _ => Ok(()),
    }
}

/// Boundary filter, then erasure, then the area filter on every remaining
/// part. Polygons with non-finite or degenerate rings are skipped with a
/// warning. `min_area` is in squared CRS units.
pub fn postprocess(
    polys: &PolygonSet,
    min_area: f64,
    erase: &PolygonSet,
    boundary: Option<&PolygonSet>,
) -> Result<PolygonSet> {
    check_crs(polys, erase, "erase layer")?;
    let boundary: Option<Vec<geo::Polygon<f64>>> = match boundary {
        Some(b) => {
            check_crs(polys, b, "boundary")?;
            Some(b.polygons.iter().filter(|p| usable(p)).map(to_geo).collect())
        }
        None => None,
    };
    let erase_parts: Vec<geo::Polygon<f64>> = erase.polygons.iter().filter(|p| usable(p)).map(to_geo).collect();
    let eraser = (!erase_parts.is_empty()).then(|| unary_union(&erase_parts));
    let eraser_box = eraser.as_ref().and_then(|e| e.bounding_rect());

    let mut out = Vec::new();
    for (i, p) in polys.polygons.iter().enumerate() {
        if !usable(p) {
            log::warn!("skipping polygon {i}: degenerate or non-finite ring");
            continue;
        }
        let g = to_geo(p);
        if let Some(b) = &boundary {
            if !b.iter().any(|bp| bp.intersects(&g)) {
                continue;
            }
        }
        let touched = match (&eraser, eraser_box, g.bounding_rect()) {
            (Some(e), Some(eb), Some(gb)) => eb.intersects(&gb) && e.intersects(&g),
            _ => false,
        };
        if !touched {
            if p.area() >= min_area {
                out.push(p.clone());
            }
            continue;
        }
        let rest = g.difference(eraser.as_ref().expect("touched implies an eraser"));
        for part in &rest.0 {
            if part.unsigned_area() >= min_area {
                out.push(from_geo(part, p)?);
            }
        }
    }
    Ok(PolygonSet::new(polys.epsg, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(polys: Vec<Polygon>) -> PolygonSet {
        PolygonSet::new(Some(25832), polys)
    }

    #[test]
    fn area_threshold() {
        // 249 and 251 square metres
        let small = Polygon::rect([0.0, 0.0, 249.0, 1.0], Some(1));
        let big = Polygon::rect([0.0, 10.0, 251.0, 11.0], Some(1));
        let out = postprocess(&set(vec![small, big.clone()]), DEFAULT_MIN_AREA, &set(vec![]), None).unwrap();
        assert_eq!(out.polygons, vec![big]);
    }

    #[test]
    fn erased_inside() {
        let p = Polygon::rect([10.0, 10.0, 40.0, 40.0], Some(2));
        let e = Polygon::rect([0.0, 0.0, 50.0, 50.0], None);
        let out = postprocess(&set(vec![p]), DEFAULT_MIN_AREA, &set(vec![e]), None).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn partial_erase_measures_after_difference() {
        // 30x30 = 900, minus a 30x22 strip leaves 240 < 250
        let p = Polygon::rect([0.0, 0.0, 30.0, 30.0], Some(1));
        let e = Polygon::rect([-5.0, 8.0, 35.0, 30.0], None);
        let out = postprocess(&set(vec![p.clone()]), DEFAULT_MIN_AREA, &set(vec![e]), None).unwrap();
        assert!(out.is_empty());
        // a narrower strip leaves 30x10 = 300
        let e = Polygon::rect([-5.0, 10.0, 35.0, 30.0], None);
        let out = postprocess(&set(vec![p]), DEFAULT_MIN_AREA, &set(vec![e]), None).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.polygons[0].area() - 300.0).abs() < 1e-9);
        assert_eq!(out.polygons[0].cls, Some(1));
    }

    #[test]
    fn erase_splits_into_parts() {
        let p = Polygon::rect([0.0, 0.0, 100.0, 10.0], Some(1));
        let e = Polygon::rect([40.0, -1.0, 45.0, 11.0], None);
        let out = postprocess(&set(vec![p]), DEFAULT_MIN_AREA, &set(vec![e]), None).unwrap();
        let mut areas: Vec<f64> = out.polygons.iter().map(Polygon::area).collect();
        areas.sort_by(f64::total_cmp);
        assert_eq!(areas, vec![400.0, 550.0]);
    }

    #[test]
    fn boundary_keeps_intersecting_polygons_whole() {
        let inside = Polygon::rect([0.0, 0.0, 30.0, 30.0], Some(1));
        let straddle = Polygon::rect([90.0, 0.0, 130.0, 30.0], Some(2));
        let outside = Polygon::rect([200.0, 0.0, 230.0, 30.0], Some(2));
        let b = set(vec![Polygon::rect([-10.0, -10.0, 100.0, 100.0], None)]);
        let out = postprocess(
            &set(vec![inside.clone(), straddle.clone(), outside]),
            0.0,
            &set(vec![]),
            Some(&b),
        )
        .unwrap();
        assert_eq!(out.polygons, vec![inside, straddle]);
    }

    #[test]
    fn crs_mismatch_is_an_error() {
        let p = set(vec![Polygon::rect([0.0, 0.0, 1.0, 1.0], None)]);
        let e = PolygonSet::new(Some(4326), vec![]);
        assert!(postprocess(&p, 0.0, &e, None).is_err());
    }

    #[test]
    fn degenerate_polygons_are_skipped() {
        let flat = Polygon::new(
            Ring::new(vec![(0.0, 0.0), (10.0, 0.0), (20.0, 0.0), (0.0, 0.0)]).unwrap(),
            vec![],
            Some(1),
        );
        let ok = Polygon::rect([0.0, 0.0, 20.0, 20.0], Some(1));
        let out = postprocess(&set(vec![flat, ok.clone()]), 0.0, &set(vec![]), None).unwrap();
        assert_eq!(out.polygons, vec![ok]);
    }
}

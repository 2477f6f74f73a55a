use super::{PolygonSet, RasterGrid};
use crate::error::{Error, Result};

/// Burns polygons into a mask on `template`'s grid.
///
/// A pixel is set when its center lies inside any polygon. Each polygon's
/// rings (exterior and holes together) are combined with the even-odd rule.
pub fn rasterize(polys: &PolygonSet, template: &RasterGrid) -> Result<RasterGrid> {
    let geo = template.georef();
    if let Some(epsg) = polys.epsg {
        if epsg != geo.epsg {
            return Err(Error::GridMismatch(format!(
                "polygon CRS EPSG:{epsg} differs from raster CRS EPSG:{}",
                geo.epsg
            )));
        }
    }
    let (w, h) = (template.width(), template.height());
    let mut px = vec![0u8; w * h];
    let mut crossings = Vec::new();
    for poly in &polys.polygons {
        // rings in pixel space
        let rings: Vec<Vec<(f64, f64)>> = poly
            .rings()
            .map(|r| r.points().iter().map(|&(x, y)| geo.to_pixel(x, y)).collect())
            .collect();
        let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, r) in rings.iter().flatten() {
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        if !(rmin.is_finite() && rmax.is_finite()) {
            continue;
        }
        let row0 = (rmin - 0.5).ceil().max(0.0) as usize;
        let row1 = ((rmax - 0.5).floor() + 1.0).clamp(0.0, h as f64) as usize;
        for row in row0..row1 {
            let y = row as f64 + 0.5;
            crossings.clear();
            for ring in &rings {
                for e in ring.windows(2) {
                    let ((x1, y1), (x2, y2)) = (e[0], e[1]);
                    if (y1 > y) != (y2 > y) {
                        crossings.push(x1 + (y - y1) * (x2 - x1) / (y2 - y1));
                    }
                }
            }
            crossings.sort_by(f64::total_cmp);
            for pair in crossings.chunks_exact(2) {
                let c0 = (pair[0] - 0.5).ceil().clamp(0.0, w as f64) as usize;
                let c1 = (pair[1] - 0.5).ceil().clamp(0.0, w as f64) as usize;
                px[row * w + c0..row * w + c1.max(c0)].fill(1);
            }
        }
    }
    RasterGrid::mask(w, h, *geo, px)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{GeoRef, Polygon, Ring};
    use proptest::prelude::*;

    fn template(w: usize, h: usize) -> RasterGrid {
        let geo = GeoRef {
            origin_x: 100.0,
            origin_y: 200.0,
            pixel_size: 2.0,
            epsg: 25832,
        };
        RasterGrid::mask(w, h, geo, vec![0; w * h]).unwrap()
    }

    /// Crossing-number test on a single pixel center, independent of the scanline fill.
    fn inside_oracle(poly: &Polygon, x: f64, y: f64) -> bool {
        let mut inside = false;
        for ring in poly.rings() {
            for e in ring.points().windows(2) {
                let ((x1, y1), (x2, y2)) = (e[0], e[1]);
                if (y1 > y) != (y2 > y) && x < x1 + (y - y1) * (x2 - x1) / (y2 - y1) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn square_over_four_centers() {
        let t = template(5, 4);
        // pixel (0,0) center is (101, 199); (1,1) center is (103, 197)
        let sq = Polygon::rect([100.5, 196.5, 103.5, 199.5], Some(1));
        let m = rasterize(&PolygonSet::new(Some(25832), vec![sq]), &t).unwrap();
        let px = m.mask_pixels().unwrap();
        let set: Vec<usize> = (0..20).filter(|&i| px[i] == 1).collect();
        assert_eq!(set, vec![0, 1, 5, 6]);
    }

    #[test]
    fn empty_and_outside_give_zero_masks() {
        let t = template(6, 6);
        let m = rasterize(&PolygonSet::default(), &t).unwrap();
        assert!(m.mask_pixels().unwrap().iter().all(|&v| v == 0));
        let far = Polygon::rect([0.0, 0.0, 50.0, 50.0], None);
        let m = rasterize(&PolygonSet::new(None, vec![far]), &t).unwrap();
        assert!(m.mask_pixels().unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn crs_mismatch_is_an_error() {
        let t = template(2, 2);
        let p = PolygonSet::new(Some(4326), vec![Polygon::rect([0.0, 0.0, 1.0, 1.0], None)]);
        assert!(matches!(rasterize(&p, &t), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn holes_are_excluded() {
        let t = template(10, 10);
        let mut p = Polygon::rect([100.0, 180.0, 120.0, 200.0], None);
        p.holes.push(Polygon::rect([104.0, 184.0, 110.0, 190.0], None).exterior);
        let m = rasterize(&PolygonSet::new(None, vec![p]), &t).unwrap();
        assert_eq!(m.mask_pixels().unwrap().iter().filter(|&&v| v == 1).count(), 100 - 9);
    }

    fn arb_polygon() -> impl Strategy<Value = Polygon> {
        prop::collection::vec((100.0f64..130.0, 170.0f64..200.0), 3..9).prop_map(|pts| {
            Polygon::new(Ring::closing(pts).unwrap(), Vec::new(), None)
        })
    }

    proptest! {
        #[test]
        fn matches_point_in_polygon_oracle(poly in arb_polygon()) {
            let t = template(15, 15);
            let m = rasterize(&PolygonSet::new(None, vec![poly.clone()]), &t).unwrap();
            let px = m.mask_pixels().unwrap();
            for r in 0..15 {
                for c in 0..15 {
                    let (x, y) = t.georef().corner(c as f64 + 0.5, r as f64 + 0.5);
                    prop_assert_eq!(px[r * 15 + c] == 1, inside_oracle(&poly, x, y));
                }
            }
        }

        #[test]
        fn adding_a_polygon_never_unsets(a in arb_polygon(), b in arb_polygon()) {
            let t = template(15, 15);
            let one = rasterize(&PolygonSet::new(None, vec![a.clone()]), &t).unwrap();
            let two = rasterize(&PolygonSet::new(None, vec![a, b]), &t).unwrap();
            for (x, y) in one.mask_pixels().unwrap().iter().zip(two.mask_pixels().unwrap()) {
                prop_assert!(x <= y);
            }
        }
    }
}

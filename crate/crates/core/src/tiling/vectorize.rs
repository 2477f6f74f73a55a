use crate::error::Result;
use crate::morphology::components::label_pixels;
use crate::raster::{GeoRef, Polygon, PolygonSet, RasterGrid, Ring};

// headings on the pixel-corner lattice, rows growing downwards
const E: u8 = 0;
const S: u8 = 1;
const W: u8 = 2;
const N: u8 = 3;
const STEP: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// Polygons for classes 1 and 2: one per 8-connected region of equal class,
/// outlined along pixel edges, with holes. Each polygon's `cls` is set.
pub fn vectorize(classes: &RasterGrid) -> Result<PolygonSet> {
    let px = classes.class_pixels()?;
    let (w, h) = (classes.width(), classes.height());
    let geo = classes.georef();
    let mut polygons = Vec::new();
    for cls in [1u8, 2] {
        let bin: Vec<u8> = px.iter().map(|&v| u8::from(v == cls)).collect();
        let labels = label_pixels(&bin, w, h, 8)?;
        let k = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            if l != 0 {
                members[l as usize - 1].push(i);
            }
        }
        for pixels in &members {
            polygons.push(region_polygon(pixels, w, geo, cls)?);
        }
    }
    let epsg = (geo.epsg != 0).then_some(geo.epsg);
    Ok(PolygonSet::new(epsg, polygons))
}

/// Next heading from the available set. A pinch offers a left and a right
/// turn; turning left keeps diagonal neighbours in one outline.
fn choose(avail: u8, heading: u8) -> u8 {
    let left = (heading + 3) % 4;
    if avail.count_ones() > 1 && avail & (1 << left) != 0 {
        left
    } else {
        avail.trailing_zeros() as u8
    }
}

fn region_polygon(pixels: &[usize], width: usize, geo: &GeoRef, cls: u8) -> Result<Polygon> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for &i in pixels {
        let (x, y) = (i % width, i / width);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    // crop with a one-pixel margin so every neighbour lookup is in range
    let (cw, ch) = (x1 - x0 + 3, y1 - y0 + 3);
    let mut inside = vec![false; cw * ch];
    for &i in pixels {
        inside[(i / width - y0 + 1) * cw + (i % width - x0 + 1)] = true;
    }
    // outgoing boundary edges per lattice vertex, as a heading bit set;
    // edges run with the region on their right
    let vw = cw + 1;
    let mut out = vec![0u8; vw * (ch + 1)];
    for r in 1..ch - 1 {
        for c in 1..cw - 1 {
            if !inside[r * cw + c] {
                continue;
            }
            if !inside[(r - 1) * cw + c] {
                out[r * vw + c] |= 1 << E;
            }
            if !inside[r * cw + c + 1] {
                out[r * vw + c + 1] |= 1 << S;
            }
            if !inside[(r + 1) * cw + c] {
                out[(r + 1) * vw + c + 1] |= 1 << W;
            }
            if !inside[r * cw + c - 1] {
                out[(r + 1) * vw + c] |= 1 << N;
            }
        }
    }

    let mut rings: Vec<Vec<(i64, i64)>> = Vec::new();
    for start in 0..out.len() {
        while out[start] != 0 {
            let first = out[start].trailing_zeros() as u8;
            let mut heading = first;
            let (mut vx, mut vy) = ((start % vw) as i64, (start / vw) as i64);
            let mut pts = vec![(vx, vy)];
            loop {
                let v = vy as usize * vw + vx as usize;
                out[v] &= !(1 << heading);
                let (dx, dy) = STEP[heading as usize];
                vx += dx;
                vy += dy;
                let next = vy as usize * vw + vx as usize;
                if next == start && choose(out[next] | (1 << first), heading) == first {
                    break;
                }
                let new = choose(out[next], heading);
                if new != heading {
                    pts.push((vx, vy));
                }
                heading = new;
            }
            rings.push(pts);
        }
    }

    let to_world = |(x, y): (i64, i64)| {
        geo.corner((x - 1) as f64 + x0 as f64, (y - 1) as f64 + y0 as f64)
    };
    let mut rings: Vec<Ring> = rings
        .into_iter()
        .map(|pts| Ring::closing(pts.into_iter().map(to_world).collect()))
        .collect::<Result<_>>()?;
    let outer = (0..rings.len())
        .max_by(|&a, &b| rings[a].signed_area().abs().total_cmp(&rings[b].signed_area().abs()))
        .expect("a non-empty region has a boundary");
    let exterior = rings.swap_remove(outer);
    Ok(Polygon::new(exterior, rings, Some(cls)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::rasterize;
    use proptest::prelude::*;

    fn grid(w: usize, h: usize, v: Vec<u8>) -> RasterGrid {
        RasterGrid::class(w, h, GeoRef::pixel_space(h), v).unwrap()
    }

    fn round_trip(g: &RasterGrid) {
        let set = vectorize(g).unwrap();
        let px = g.class_pixels().unwrap();
        for cls in [1u8, 2] {
            let sub = PolygonSet::new(
                set.epsg,
                set.polygons.iter().filter(|p| p.cls == Some(cls)).cloned().collect(),
            );
            let r = rasterize(&sub, g).unwrap();
            let expect: Vec<u8> = px.iter().map(|&v| u8::from(v == cls)).collect();
            assert_eq!(r.mask_pixels().unwrap(), &expect[..], "class {cls}");
        }
    }

    #[test]
    fn block_is_a_square() {
        let mut v = vec![0u8; 25];
        for r in 1..4 {
            for c in 1..4 {
                v[r * 5 + c] = 1;
            }
        }
        let set = vectorize(&grid(5, 5, v)).unwrap();
        assert_eq!(set.len(), 1);
        let p = &set.polygons[0];
        assert_eq!(p.area(), 9.0);
        assert_eq!(p.exterior.points().len(), 5);
        assert!(p.holes.is_empty());
        assert_eq!(p.cls, Some(1));
    }

    #[test]
    fn scaled_pixels() {
        let g = RasterGrid::class(
            2,
            2,
            GeoRef {
                origin_x: 100.0,
                origin_y: 50.0,
                pixel_size: 0.5,
                epsg: 25832,
            },
            vec![2, 2, 2, 2],
        )
        .unwrap();
        let set = vectorize(&g).unwrap();
        assert_eq!(set.epsg, Some(25832));
        assert_eq!(set.polygons[0].area(), 1.0);
        assert_eq!(set.polygons[0].exterior.bbox(), [100.0, 49.0, 101.0, 50.0]);
    }

    #[test]
    fn background_only() {
        assert!(vectorize(&grid(4, 4, vec![0; 16])).unwrap().is_empty());
    }

    #[test]
    fn ring_with_hole() {
        let mut v = vec![1u8; 25];
        v[12] = 0;
        let set = vectorize(&grid(5, 5, v.clone())).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.polygons[0].holes.len(), 1);
        assert_eq!(set.polygons[0].area(), 24.0);
        round_trip(&grid(5, 5, v));
    }

    #[test]
    fn diagonal_pixels_form_one_polygon() {
        let v = vec![1, 0, 0, 0, 1, 0, 0, 0, 1];
        let set = vectorize(&grid(3, 3, v.clone())).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.polygons[0].area(), 3.0);
        round_trip(&grid(3, 3, v));
    }

    #[test]
    fn hole_pinched_against_outline() {
        // a diamond-shaped hole that touches the outer edge diagonally
        let v = vec![
            1, 1, 1, 1, 1, //
            1, 1, 0, 1, 1, //
            1, 0, 1, 0, 1, //
            1, 1, 0, 1, 1, //
            1, 1, 1, 1, 1, //
        ];
        round_trip(&grid(5, 5, v));
    }

    proptest! {
        #[test]
        fn rasterize_inverts_vectorize(w in 1usize..14, h in 1usize..14, seed in any::<u64>()) {
            let v = (0..w * h).map(|i| (crate::rng::mix64(seed ^ i as u64) % 3) as u8).collect();
            round_trip(&grid(w, h, v));
        }
    }
}

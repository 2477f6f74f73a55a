//! Linear scene elements: angular and organic polylines and their rendering.
//!
//! Coordinates are in canvas pixels with `(0, 0)` at the upper-left corner;
//! pixel `(c, r)` has its center at `(c + 0.5, r + 0.5)`.

use super::template::{AngularSpec, CurvatureLevel, OrganicSpec};
use rand::Rng;
use std::f64::consts::PI;

pub type Point = (f64, f64);

const ATTEMPTS: usize = 24;

/// Parameters drawn for one organic line, kept for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct OrganicDraw {
    pub level: String,
    pub step_size: [f64; 2],
    pub angular_variation_deg: f64,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, span: [f64; 2]) -> f64 {
    if span[0] >= span[1] {
        span[0]
    } else {
        rng.random_range(span[0]..=span[1])
    }
}

/// Distance along `heading` from `p` to the canvas border.
fn ray_to_border(p: Point, heading: f64, canvas: f64) -> f64 {
    let (dx, dy) = (heading.cos(), heading.sin());
    let mut t = f64::INFINITY;
    if dx > 1e-12 {
        t = t.min((canvas - p.0) / dx);
    } else if dx < -1e-12 {
        t = t.min(-p.0 / dx);
    }
    if dy > 1e-12 {
        t = t.min((canvas - p.1) / dy);
    } else if dy < -1e-12 {
        t = t.min(-p.1 / dy);
    }
    t.max(0.0)
}

fn inside(p: Point, canvas: f64) -> bool {
    p.0 >= 0.0 && p.1 >= 0.0 && p.0 <= canvas && p.1 <= canvas
}

fn start_point<R: Rng + ?Sized>(rng: &mut R, canvas: f64) -> Point {
    let m = canvas * 0.1;
    (rng.random_range(m..canvas - m), rng.random_range(m..canvas - m))
}

/// Piecewise-straight line. Each turn is a magnitude from the allowed set
/// with a random sign; segments that would leave the canvas are redrawn, and
/// the line stops early when no allowed continuation fits.
pub fn gen_angular_polyline<R: Rng + ?Sized>(rng: &mut R, spec: &AngularSpec, canvas: usize) -> Vec<Point> {
    let c = canvas as f64;
    let [min_len, max_len] = spec.segment_length;
    let n_segments = rng.random_range(spec.segments[0]..=spec.segments[1]);
    for _ in 0..ATTEMPTS {
        let start = start_point(rng, c);
        let mut heading = rng.random_range(0.0..2.0 * PI);
        let mut pts = vec![start];
        for seg in 0..n_segments {
            let p = *pts.last().unwrap();
            let mut placed = false;
            for _ in 0..ATTEMPTS {
                let h = if seg == 0 {
                    heading
                } else {
                    let turn = spec.turn_angles_deg[rng.random_range(0..spec.turn_angles_deg.len())];
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    heading + sign * turn.to_radians()
                };
                let room = ray_to_border(p, h, c);
                if room >= min_len {
                    let len = uniform(rng, [min_len, max_len.min(room)]);
                    pts.push((p.0 + len * h.cos(), p.1 + len * h.sin()));
                    heading = h;
                    placed = true;
                    break;
                }
                if seg == 0 {
                    heading = rng.random_range(0.0..2.0 * PI);
                }
            }
            if !placed {
                break;
            }
        }
        if pts.len() >= 2 {
            return pts;
        }
    }
    // the shortest segment always fits from the canvas center
    let mid = c / 2.0;
    vec![(mid, mid), (mid + min_len, mid)]
}

/// Draws the curvature level and its coupled parameters for one organic line.
pub fn draw_organic<R: Rng + ?Sized>(rng: &mut R, spec: &OrganicSpec) -> OrganicDraw {
    let level: &CurvatureLevel = &spec.levels[rng.random_range(0..spec.levels.len())];
    OrganicDraw {
        level: level.name.clone(),
        step_size: level.step_size,
        angular_variation_deg: uniform(rng, level.angular_variation_deg),
    }
}

/// Random walk whose heading is perturbed by at most the drawn angular
/// variation at every step. Steps that would leave the canvas are redrawn;
/// the walk ends when none fits.
pub fn gen_organic_polyline<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &OrganicSpec,
    draw: &OrganicDraw,
    canvas: usize,
) -> Vec<Point> {
    let c = canvas as f64;
    let var = draw.angular_variation_deg.to_radians();
    let n_steps = rng.random_range(spec.steps[0]..=spec.steps[1]);
    loop {
        let start = start_point(rng, c);
        // head roughly towards the canvas interior
        let to_center = (c / 2.0 - start.1).atan2(c / 2.0 - start.0);
        let mut heading = to_center + rng.random_range(-PI / 2.0..PI / 2.0);
        let mut pts = vec![start];
        for _ in 0..n_steps {
            let p = *pts.last().unwrap();
            let mut next = None;
            for _ in 0..ATTEMPTS {
                let h = heading + if var > 0.0 { rng.random_range(-var..=var) } else { 0.0 };
                let step = uniform(rng, draw.step_size);
                let q = (p.0 + step * h.cos(), p.1 + step * h.sin());
                if inside(q, c) {
                    next = Some((q, h));
                    break;
                }
            }
            let Some((q, h)) = next else { break };
            pts.push(q);
            heading = h;
        }
        if pts.len() >= 2 {
            return pts;
        }
    }
}

/// Lengths of consecutive segments.
pub fn segment_lengths(pts: &[Point]) -> Vec<f64> {
    pts.windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .collect()
}

/// Signed heading changes between consecutive segments, in degrees, wrapped
/// to (-180, 180].
pub fn turn_angles_deg(pts: &[Point]) -> Vec<f64> {
    let headings: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).atan2(w[1].0 - w[0].0))
        .collect();
    headings
        .windows(2)
        .map(|h| {
            let mut d = (h[1] - h[0]).to_degrees();
            while d > 180.0 {
                d -= 360.0;
            }
            while d <= -180.0 {
                d += 360.0;
            }
            d
        })
        .collect()
}

/// Pixels whose centers lie within `width / 2` of the polyline (round caps
/// and joins), as row-major indices on a `canvas × canvas` grid.
pub fn render_polyline(pts: &[Point], width: f64, canvas: usize) -> Vec<usize> {
    let r = width / 2.0;
    let r2 = r * r;
    let mut hit = vec![false; canvas * canvas];
    let segs: Vec<(Point, Point)> = if pts.len() == 1 {
        vec![(pts[0], pts[0])]
    } else {
        pts.windows(2).map(|w| (w[0], w[1])).collect()
    };
    for (a, b) in segs {
        let x0 = ((a.0.min(b.0) - r - 0.5).floor().max(0.0)) as usize;
        let y0 = ((a.1.min(b.1) - r - 0.5).floor().max(0.0)) as usize;
        let x1 = ((a.0.max(b.0) + r + 0.5).ceil().max(0.0) as usize).min(canvas);
        let y1 = ((a.1.max(b.1) + r + 0.5).ceil().max(0.0) as usize).min(canvas);
        for y in y0..y1 {
            for x in x0..x1 {
                let p = (x as f64 + 0.5, y as f64 + 0.5);
                if point_segment_dist2(p, a, b) <= r2 {
                    hit[y * canvas + x] = true;
                }
            }
        }
    }
    hit.iter().enumerate().filter(|(_, &h)| h).map(|(i, _)| i).collect()
}

pub fn point_segment_dist2(p: Point, a: Point, b: Point) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    };
    let (dx, dy) = (p.0 - (a.0 + t * vx), p.1 - (a.1 + t * vy));
    dx * dx + dy * dy
}

//! Exact rotated-rectangle geometry.
//!
//! Corner extraction, convex polygon clipping, and the exact SkewIoU of two
//! oriented boxes. Everything here is the ground truth that the Gaussian
//! approximations elsewhere in the crate are judged against, so the routines
//! favor plain, auditable arithmetic over cleverness.
//!
//! Angle convention: `theta` is the rotation of the box's `w`-axis from the
//! +x axis, in radians, canonically in `[-pi/2, pi/2)`. The representations
//! `(w, h, theta)` and `(h, w, theta + pi/2)` denote the same rectangle.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertices closer than this to the line through their neighbours are dropped
/// after clipping; keeps shoelace areas stable on degenerate intersections.
const COLLINEAR_EPS: f64 = 1e-12;

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Rotated rectangle parameterized by center, extents, and rotation angle.
///
/// `w` is the extent along the box's `theta`-axis, `h` the extent
/// perpendicular to it. Both must be positive and all fields finite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub theta: f64,
}

impl OrientedBox {
    /// Validating constructor.
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        let b = Self {
            cx,
            cy,
            w,
            h,
            theta,
        };
        b.validate()?;
        Ok(b)
    }

    /// Checks extents are positive and every field is finite.
    pub fn validate(&self) -> Result<()> {
        let fields = [self.cx, self.cy, self.w, self.h, self.theta];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBox(format!("non-finite field in {self:?}")));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "extents must be positive, got w={}, h={}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    /// Rectangle area `w * h`.
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Longer extent over shorter extent.
    pub fn aspect_ratio(&self) -> f64 {
        (self.w / self.h).max(self.h / self.w)
    }
}

/// Wraps `theta` into the canonical range `[-pi/2, pi/2)`.
///
/// The angle is shifted by a multiple of pi, which maps the rectangle onto
/// itself, so the vertex set is unchanged and `w`/`h` never need to swap.
/// The swapped form `(h, w, theta + pi/2)` remains an equally valid
/// representation of the same rectangle; every consumer in this crate is
/// invariant under that identity.
pub fn canonicalize(b: &OrientedBox) -> Result<OrientedBox> {
    b.validate()?;
    let mut t = b.theta.rem_euclid(PI);
    if t >= FRAC_PI_2 {
        t -= PI;
    }
    Ok(OrientedBox { theta: t, ..*b })
}

/// Convex polygon with counter-clockwise vertex order.
///
/// Every polygon produced by this module is convex with non-negative
/// shoelace area; fewer than three vertices means the empty polygon.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area; non-negative for counter-clockwise input, zero for
    /// fewer than three vertices.
    pub fn area(&self) -> f64 {
        area(self)
    }
}

/// The four corners of a box, counter-clockwise.
pub fn corners(b: &OrientedBox) -> Result<Polygon> {
    b.validate()?;
    let (sin, cos) = b.theta.sin_cos();
    let (hw, hh) = (0.5 * b.w, 0.5 * b.h);
    // Local corners (+hw,+hh), (-hw,+hh), (-hw,-hh), (+hw,-hh) rotated by
    // theta; rotation preserves the counter-clockwise order.
    let local = [(hw, hh), (-hw, hh), (-hw, -hh), (hw, -hh)];
    let vertices = local
        .iter()
        .map(|&(x, y)| Point::new(b.cx + cos * x - sin * y, b.cy + sin * x + cos * y))
        .collect();
    Ok(Polygon::new(vertices))
}

/// Shoelace area of a simple polygon; sign dropped, 0 for < 3 vertices.
pub fn area(poly: &Polygon) -> f64 {
    let v = poly.vertices();
    if v.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..v.len() {
        let a = v[i];
        let b = v[(i + 1) % v.len()];
        twice += a.x * b.y - a.y * b.x;
    }
    0.5 * twice.abs()
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Intersection of the line through (a1, a2) with the line through (b1, b2).
/// Callers guarantee the lines are not parallel.
fn line_intersection(a1: Point, a2: Point, b1: Point, b2: Point) -> Point {
    let d1 = Point::new(a2.x - a1.x, a2.y - a1.y);
    let d2 = Point::new(b2.x - b1.x, b2.y - b1.y);
    let denom = d1.x * d2.y - d1.y * d2.x;
    let t = ((b1.x - a1.x) * d2.y - (b1.y - a1.y) * d2.x) / denom;
    Point::new(a1.x + t * d1.x, a1.y + t * d1.y)
}

/// Drops near-duplicate consecutive vertices, then vertices within
/// `COLLINEAR_EPS` of the line through their neighbours.
///
/// Duplicates must go first, and against the already-kept list: judging
/// each copy against stale neighbours lets a doubled vertex lose both
/// copies in one pass (each copy justifies deleting the other), which can
/// cut a real corner off the polygon.
fn cleanup_collinear(mut v: Vec<Point>) -> Vec<Point> {
    let near = |a: Point, b: Point| (a.x - b.x).hypot(a.y - b.y) < COLLINEAR_EPS;
    loop {
        if v.len() < 3 {
            return v;
        }
        let mut dedup: Vec<Point> = Vec::with_capacity(v.len());
        for &p in &v {
            if dedup.last().is_none_or(|&last| !near(p, last)) {
                dedup.push(p);
            }
        }
        while dedup.len() > 1 && near(dedup[0], *dedup.last().expect("non-empty")) {
            dedup.pop();
        }
        let n = dedup.len();
        if n < 3 {
            return dedup;
        }
        let mut keep = Vec::with_capacity(n);
        for i in 0..n {
            let prev = dedup[(i + n - 1) % n];
            let cur = dedup[i];
            let next = dedup[(i + 1) % n];
            let len = (next.x - prev.x).hypot(next.y - prev.y);
            // prev == next cannot happen for n >= 3 after dedup of a convex
            // ring, but a degenerate sliver can still get here; keep cur and
            // let the area come out as it falls
            if len < COLLINEAR_EPS || (cross(prev, next, cur) / len).abs() >= COLLINEAR_EPS {
                keep.push(cur);
            }
        }
        if keep.len() == v.len() {
            return keep;
        }
        v = keep;
    }
}

/// Sutherland-Hodgman clipping of one convex polygon by another.
///
/// Both polygons must be convex and counter-clockwise; the result is their
/// intersection, counter-clockwise, or the empty polygon when disjoint.
pub fn clip_convex(subject: &Polygon, clip: &Polygon) -> Polygon {
    if subject.is_empty() || clip.is_empty() {
        return Polygon::empty();
    }
    let mut output: Vec<Point> = subject.vertices().to_vec();
    let cv = clip.vertices();
    for i in 0..cv.len() {
        if output.is_empty() {
            break;
        }
        let c1 = cv[i];
        let c2 = cv[(i + 1) % cv.len()];
        let input = std::mem::take(&mut output);
        // Inside = on or left of the directed clip edge (clip is CCW).
        let inside = |p: Point| cross(c1, c2, p) >= 0.0;
        for j in 0..input.len() {
            let s = input[(j + input.len() - 1) % input.len()];
            let e = input[j];
            match (inside(s), inside(e)) {
                (true, true) => output.push(e),
                (true, false) => output.push(line_intersection(s, e, c1, c2)),
                (false, true) => {
                    output.push(line_intersection(s, e, c1, c2));
                    output.push(e);
                }
                (false, false) => {}
            }
        }
    }
    let cleaned = cleanup_collinear(output);
    if cleaned.len() < 3 {
        Polygon::empty()
    } else {
        Polygon::new(cleaned)
    }
}

fn box_key(b: &OrientedBox) -> [f64; 5] {
    [b.cx, b.cy, b.w, b.h, b.theta]
}

/// Exact intersection-over-union of two rotated rectangles.
///
/// Computed by clipping the corner polygons against each other. Arguments
/// are ordered canonically before clipping so the result is bitwise
/// symmetric in its arguments. Returns a value in `[0, 1]`: 1 exactly when
/// the rectangles coincide as point sets, 0 when disjoint.
pub fn skew_iou(a: &OrientedBox, b: &OrientedBox) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let (first, second) = if box_key(a) <= box_key(b) {
        (a, b)
    } else {
        (b, a)
    };
    let pa = corners(first)?;
    let pb = corners(second)?;
    let inter = area(&clip_convex(&pa, &pb));
    // Union floored at machine epsilon; zero-area boxes are rejected above.
    let union = (first.area() + second.area() - inter).max(f64::EPSILON);
    Ok((inter / union).clamp(0.0, 1.0))
}

struct RectFrame {
    cx: f64,
    cy: f64,
    cos: f64,
    sin: f64,
    hw: f64,
    hh: f64,
}

impl RectFrame {
    fn new(b: &OrientedBox) -> Self {
        let (sin, cos) = b.theta.sin_cos();
        Self {
            cx: b.cx,
            cy: b.cy,
            cos,
            sin,
            hw: 0.5 * b.w,
            hh: 0.5 * b.h,
        }
    }

    fn contains(&self, p: Point) -> bool {
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        let u = self.cos * dx + self.sin * dy;
        let v = -self.sin * dx + self.cos * dy;
        u.abs() <= self.hw && v.abs() <= self.hh
    }
}

/// Monte-Carlo IoU estimate, the independent check on [`skew_iou`].
///
/// Samples points uniformly over the axis-aligned bounding box of both
/// rectangles and returns (hits in both) / (hits in either). Deterministic
/// for a fixed seed.
pub fn monte_carlo_iou(a: &OrientedBox, b: &OrientedBox, samples: u64, seed: u64) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for poly in [corners(a)?, corners(b)?] {
        for p in poly.vertices() {
            lo_x = lo_x.min(p.x);
            hi_x = hi_x.max(p.x);
            lo_y = lo_y.min(p.y);
            hi_y = hi_y.max(p.y);
        }
    }
    let fa = RectFrame::new(a);
    let fb = RectFrame::new(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_union = 0u64;
    let mut in_both = 0u64;
    for _ in 0..samples {
        let p = Point::new(rng.random_range(lo_x..=hi_x), rng.random_range(lo_y..=hi_y));
        let ia = fa.contains(p);
        let ib = fb.contains(p);
        if ia || ib {
            in_union += 1;
        }
        if ia && ib {
            in_both += 1;
        }
    }
    if in_union == 0 {
        return Ok(0.0);
    }
    Ok(in_both as f64 / in_union as f64)
}

//! Planar geometry primitives shared by every stage of the pipeline.
//!
//! Rings are stored closed (first point repeated at the end). Coordinates are
//! metres in the local projected plane.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Squared distance; buffer membership is defined on this quantity.
    pub fn dist2(self, o: Point) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> BBox {
        let mut b = BBox {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in pts {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    pub fn intersects(&self, o: &BBox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn expand(&self, d: f64) -> BBox {
        BBox {
            min: Point::new(self.min.x - d, self.min.y - d),
            max: Point::new(self.max.x + d, self.max.y + d),
        }
    }
}

/// Iterate the edges of a closed ring or an open polyline.
pub fn edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    ring.windows(2).map(|w| (w[0], w[1]))
}

/// Shoelace signed area of a closed ring; positive when counter-clockwise.
pub fn ring_signed_area(ring: &[Point]) -> f64 {
    // Shift to the first vertex to limit cancellation on far-from-origin rings.
    let Some(&o) = ring.first() else { return 0.0 };
    let mut s = 0.0;
    for (a, b) in edges(ring) {
        s += (a - o).cross(b - o);
    }
    0.5 * s
}

pub fn polyline_length(line: &[Point]) -> f64 {
    edges(line).map(|(a, b)| a.dist(b)).sum()
}

/// Remove consecutive vertices closer than `tol` and return a closed ring.
/// Returns `None` when fewer than three distinct vertices remain.
pub fn clean_ring(raw: &[Point], tol: f64) -> Option<Vec<Point>> {
    let mut out: Vec<Point> = Vec::with_capacity(raw.len() + 1);
    for &p in raw {
        if out.last().is_none_or(|q: &Point| q.dist(p) >= tol) {
            out.push(p);
        }
    }
    // Drop the closing duplicate(s) before counting distinct vertices.
    while out.len() > 1 && out[0].dist(*out.last().unwrap()) < tol {
        out.pop();
    }
    if out.len() < 3 {
        return None;
    }
    out.push(out[0]);
    Some(out)
}

/// Reverse a closed ring in place if its orientation doesn't match `ccw`.
pub fn orient_ring(ring: &mut [Point], ccw: bool) {
    let a = ring_signed_area(ring);
    if (a > 0.0) != ccw {
        ring.reverse();
    }
}

/// Polygon with one exterior ring (counter-clockwise) and optional holes (clockwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
}

impl Polygon {
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Self {
        Polygon { exterior, holes }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point>> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        ring_signed_area(&self.exterior).abs() - self.holes.iter().map(|h| ring_signed_area(h).abs()).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.rings().map(|r| polyline_length(r)).sum()
    }

    /// Area-weighted centroid, holes subtracted.
    pub fn centroid(&self) -> Point {
        let o = self.exterior[0];
        let mut a_sum = 0.0;
        let mut c = Point::default();
        for (k, ring) in self.rings().enumerate() {
            // Exterior counts positive, holes negative, independent of stored winding.
            let sign_fix = {
                let a = ring_signed_area(ring);
                let want = if k == 0 { 1.0 } else { -1.0 };
                if a.signum() == want { 1.0 } else { -1.0 }
            };
            for (p, q) in edges(ring) {
                let (p, q) = (p - o, q - o);
                let cr = p.cross(q) * sign_fix;
                a_sum += cr;
                c = c + (p + q) * cr;
            }
        }
        if a_sum.abs() < f64::MIN_POSITIVE {
            return o;
        }
        o + c * (1.0 / (3.0 * a_sum))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(self.exterior.iter())
    }

    /// True when `p` is strictly inside the exterior and outside every hole.
    pub fn contains(&self, p: Point) -> bool {
        point_in_ring(p, &self.exterior) && !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    pub fn translate(&self, d: Point) -> Polygon {
        Polygon {
            exterior: self.exterior.iter().map(|&p| p + d).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(|&p| p + d).collect()).collect(),
        }
    }
}

/// Even-odd ray crossing test against a closed ring.
pub fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let mut inside = false;
    for (a, b) in edges(ring) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

pub fn point_polyline_distance(p: Point, line: &[Point]) -> f64 {
    edges(line).map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

/// Intersection of segments `p0-p1` and `q0-q1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentHit {
    None,
    /// Single point with parameters along each segment.
    Point { t: f64, u: f64 },
    /// Collinear overlap, given as parameter range along the first segment.
    Overlap { t0: f64, t1: f64 },
}

pub fn segment_intersection(p0: Point, p1: Point, q0: Point, q1: Point, eps: f64) -> SegmentHit {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    let qp = q0 - p0;
    let scale = r.norm() * s.norm();
    if denom.abs() <= 1e-14 * scale {
        // Parallel; collinear only when q0 lies on the line through p.
        if qp.cross(r).abs() > eps * r.norm() {
            return SegmentHit::None;
        }
        let rr = r.dot(r);
        let ta = qp.dot(r) / rr;
        let tb = (q1 - p0).dot(r) / rr;
        let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        let t0 = lo.max(0.0);
        let t1 = hi.min(1.0);
        let tol = eps / r.norm();
        if t0 > t1 + tol {
            return SegmentHit::None;
        }
        return SegmentHit::Overlap { t0, t1: t1.max(t0) };
    }
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let tt = eps / r.norm();
    let tu = eps / s.norm();
    if t < -tt || t > 1.0 + tt || u < -tu || u > 1.0 + tu {
        return SegmentHit::None;
    }
    SegmentHit::Point { t: t.clamp(0.0, 1.0), u: u.clamp(0.0, 1.0) }
}

/// Andrew's monotone chain. Returns the hull counter-clockwise and closed,
/// without collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        let mut out = pts.clone();
        if let Some(&f) = pts.first() {
            out.push(f);
        }
        return out;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.push(lower[0]);
    lower
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    fn covers(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius * (1.0 + 1e-12) + 1e-12
    }

    fn from_two(a: Point, b: Point) -> Circle {
        let c = (a + b) * 0.5;
        Circle { center: c, radius: a.dist(c).max(b.dist(c)) }
    }

    fn from_three(a: Point, b: Point, c: Point) -> Circle {
        let ab = b - a;
        let ac = c - a;
        let d = 2.0 * ab.cross(ac);
        if d.abs() < 1e-18 {
            // Collinear: the widest pair spans the circle.
            let cands = [Circle::from_two(a, b), Circle::from_two(a, c), Circle::from_two(b, c)];
            return cands.into_iter().max_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
        }
        let b2 = ab.dot(ab);
        let c2 = ac.dot(ac);
        let ux = (ac.y * b2 - ab.y * c2) / d;
        let uy = (ab.x * c2 - ac.x * b2) / d;
        let center = a + Point::new(ux, uy);
        let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
        Circle { center, radius }
    }
}

/// Smallest enclosing circle by the incremental (Welzl-style) construction.
/// The point order is fixed, so the result is deterministic.
pub fn min_enclosing_circle(points: &[Point]) -> Circle {
    assert!(!points.is_empty());
    let mut c = Circle { center: points[0], radius: 0.0 };
    for i in 1..points.len() {
        if c.covers(points[i]) {
            continue;
        }
        c = Circle { center: points[i], radius: 0.0 };
        for j in 0..i {
            if c.covers(points[j]) {
                continue;
            }
            c = Circle::from_two(points[i], points[j]);
            for k in 0..j {
                if !c.covers(points[k]) {
                    c = Circle::from_three(points[i], points[j], points[k]);
                }
            }
        }
    }
    c
}

/// Minimum-area enclosing rectangle of a convex hull (closed, counter-clockwise).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedRect {
    /// Unit vector along the longer side.
    pub long_axis: Point,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.length + self.width)
    }
}

/// Ordering among candidate rectangles. Several edge directions can reach the same
/// minimum area (every acute triangle has three), so near-equal areas fall back to the
/// smaller perimeter and then to the axis closest to a cardinal direction.
fn rect_preferred(a: &OrientedRect, b: &OrientedRect) -> bool {
    const REL: f64 = 1e-9;
    let (aa, ba) = (a.area(), b.area());
    if aa < ba * (1.0 - REL) {
        return true;
    }
    if aa > ba * (1.0 + REL) {
        return false;
    }
    let (ap, bp) = (a.perimeter(), b.perimeter());
    if (ap - bp).abs() > REL * bp {
        return ap < bp;
    }
    cardinal_deviation(a.long_axis) < cardinal_deviation(b.long_axis) - REL
}

pub fn min_area_rect(hull: &[Point]) -> OrientedRect {
    let mut best: Option<(f64, OrientedRect)> = None;
    for (a, b) in edges(hull) {
        let d = b - a;
        let n = d.norm();
        if n == 0.0 {
            continue;
        }
        let u = d * (1.0 / n);
        let v = Point::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &p in hull {
            let q = p - hull[0];
            let pu = q.dot(u);
            let pv = q.dot(v);
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let (eu, ev) = (umax - umin, vmax - vmin);
        let area = eu * ev;
        let rect = if eu >= ev {
            OrientedRect { long_axis: u, length: eu, width: ev }
        } else {
            OrientedRect { long_axis: v, length: ev, width: eu }
        };
        if best.as_ref().is_none_or(|(_, b)| rect_preferred(&rect, b)) {
            best = Some((area, rect));
        }
    }
    best.map(|(_, r)| r).unwrap_or(OrientedRect { long_axis: Point::new(1.0, 0.0), length: 0.0, width: 0.0 })
}

/// Deviation in degrees, in [0, 45], of a direction from the nearest cardinal axis.
pub fn cardinal_deviation(dir: Point) -> f64 {
    let deg = dir.y.atan2(dir.x).to_degrees().rem_euclid(90.0);
    deg.min(90.0 - deg).max(0.0)
}

/// Vertices whose turning angle exceeds `min_turn_deg`.
pub fn corner_count(ring: &[Point], min_turn_deg: f64) -> usize {
    let n = ring.len().saturating_sub(1);
    if n < 3 {
        return 0;
    }
    (0..n)
        .filter(|&i| {
            let prev = ring[(i + n - 1) % n];
            let cur = ring[i];
            let next = ring[(i + 1) % n];
            let a = cur - prev;
            let b = next - cur;
            a.cross(b).atan2(a.dot(b)).abs().to_degrees() > min_turn_deg
        })
        .count()
}

/// Largest distance between two points of the set (computed on the hull).
pub fn diameter(hull: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max(hull[i].dist(hull[j]));
        }
    }
    best
}

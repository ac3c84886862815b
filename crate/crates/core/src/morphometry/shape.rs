//! Footprint shape descriptors and neighbour aggregates.

use crate::geodata::Footprint;
use crate::geom::{cardinal_deviation, convex_hull, corner_count, diameter, edges, min_area_rect, min_enclosing_circle, ring_signed_area, Point, Polygon};
use crate::index::SpatialIndex;
use std::f64::consts::PI;

/// Vertices turning by more than this many degrees count as corners.
pub const CORNER_MIN_TURN_DEG: f64 = 10.0;

/// Boundary pieces closer than this are considered shared walls.
pub const SHARED_WALL_TOLERANCE_M: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ShapeMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub circular_compactness: f64,
    pub convexity: f64,
    pub orientation: f64,
    pub corner_count: f64,
    pub longest_axis_length: f64,
    pub equivalent_rectangular_index: f64,
}

impl ShapeMetrics {
    pub fn of(poly: &Polygon) -> Self {
        let area = poly.area();
        let perimeter = poly.perimeter();
        let open = &poly.exterior[..poly.exterior.len() - 1];
        let hull = convex_hull(open);
        let hull_open = &hull[..hull.len() - 1];
        let hull_area = ring_signed_area(&hull);
        let mec = min_enclosing_circle(hull_open);
        let rect = min_area_rect(&hull);
        let eri = if rect.area() > 0.0 && perimeter > 0.0 {
            (area / rect.area()).sqrt() * rect.perimeter() / perimeter
        } else {
            0.0
        };
        ShapeMetrics {
            area,
            perimeter,
            circular_compactness: if mec.radius > 0.0 { area / (PI * mec.radius * mec.radius) } else { 0.0 },
            convexity: if hull_area > 0.0 { area / hull_area } else { 0.0 },
            orientation: cardinal_deviation(rect.long_axis),
            corner_count: corner_count(&poly.exterior, CORNER_MIN_TURN_DEG) as f64,
            longest_axis_length: diameter(hull_open),
            equivalent_rectangular_index: eri,
        }
    }
}

/// The nine building-level descriptors, in manifest order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BuildingBase {
    pub shape: ShapeMetrics,
    pub shared_wall_length: f64,
}

impl BuildingBase {
    pub fn to_array(&self) -> [f64; 9] {
        let s = &self.shape;
        [
            s.area,
            s.perimeter,
            s.circular_compactness,
            s.convexity,
            s.orientation,
            self.shared_wall_length,
            s.corner_count,
            s.longest_axis_length,
            s.equivalent_rectangular_index,
        ]
    }

    /// Values aggregated over neighbours, in manifest order.
    pub fn aggregated(&self) -> [f64; 6] {
        let s = &self.shape;
        [s.area, s.perimeter, s.convexity, s.circular_compactness, s.orientation, s.corner_count]
    }
}

/// Length of the subject boundary running along boundaries of other footprints.
pub fn shared_wall_length(subject: usize, footprints: &[Footprint], index: &SpatialIndex) -> f64 {
    let tol = SHARED_WALL_TOLERANCE_M;
    let me = &footprints[subject];
    let others: Vec<usize> = index.query_box(&me.bbox().expand(tol)).into_iter().filter(|&j| j != subject).collect();
    let mut total = 0.0;
    for ring in me.polygon.rings() {
        for (a, b) in edges(ring) {
            total += others.iter().map(|&j| overlap_with_polygon(a, b, &footprints[j].polygon, tol)).sum::<f64>();
        }
    }
    total
}

fn overlap_with_polygon(a: Point, b: Point, poly: &Polygon, tol: f64) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return 0.0;
    }
    let u = (b - a) * (1.0 / len);
    let mut sum = 0.0;
    for ring in poly.rings() {
        for (c, d) in edges(ring) {
            if u.cross(c - a).abs() > tol || u.cross(d - a).abs() > tol {
                continue;
            }
            let (tc, td) = ((c - a).dot(u), (d - a).dot(u));
            let lo = tc.min(td).max(0.0);
            let hi = tc.max(td).min(len);
            if hi > lo {
                sum += hi - lo;
            }
        }
    }
    sum
}

pub fn building_base_features(subject: usize, footprints: &[Footprint], index: &SpatialIndex) -> BuildingBase {
    BuildingBase {
        shape: ShapeMetrics::of(&footprints[subject].polygon),
        shared_wall_length: shared_wall_length(subject, footprints, index),
    }
}

/// Total, mean and population standard deviation; all zero for an empty set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Agg {
    pub total: f64,
    pub mean: f64,
    pub std: f64,
}

impl Agg {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Agg {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Agg::default();
        }
        let total: f64 = v.iter().sum();
        let mean = total / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        Agg { total, mean, std: var.sqrt() }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.total, self.mean, self.std]
    }
}

/// For each buffer radius, total/mean/std of the six aggregated descriptors over
/// buildings whose centroid lies within the radius (subject excluded).
pub fn buffered_aggregates(subject: usize, base: &[BuildingBase], index: &SpatialIndex, buffers: &[u32]) -> Vec<f64> {
    let c = index.centroid(subject);
    let mut out = Vec::with_capacity(buffers.len() * 18);
    for &r in buffers {
        let nbrs: Vec<usize> = index.within(c, r as f64).into_iter().filter(|&j| j != subject).collect();
        for k in 0..6 {
            out.extend(Agg::of(nbrs.iter().map(|&j| base[j].aggregated()[k])).to_array());
        }
    }
    out
}

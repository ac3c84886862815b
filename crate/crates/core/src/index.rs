//! Spatial indexing over footprints, points and street edges.
//!
//! Query results are always returned sorted by item index so that callers
//! aggregate in a fixed order.

use crate::geodata::Footprint;
use crate::geom::{BBox, Point};
use rstar::primitives::{GeomWithData, Line, Rectangle};
use rstar::{RTree, AABB};

type IndexedPoint = GeomWithData<[f64; 2], usize>;
type IndexedRect = GeomWithData<Rectangle<[f64; 2]>, usize>;
type IndexedLine = GeomWithData<Line<[f64; 2]>, usize>;

fn arr(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

/// Points with radius and nearest-neighbour queries.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<Point>,
    tree: RTree<IndexedPoint>,
}

impl PointIndex {
    pub fn new(points: Vec<Point>) -> Self {
        let items = points.iter().enumerate().map(|(i, &p)| IndexedPoint::new(arr(p), i)).collect();
        PointIndex { tree: RTree::bulk_load(items), points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    /// Indices with squared distance to `center` at most `radius²`.
    pub fn within(&self, center: Point, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        // Slightly widened tree query, exact predicate applied afterwards.
        let mut out: Vec<usize> = self
            .tree
            .locate_within_distance(arr(center), r2 * (1.0 + 1e-9) + 1e-12)
            .map(|g| g.data)
            .filter(|&i| self.points[i].dist2(center) <= r2)
            .collect();
        out.sort_unstable();
        out
    }

    /// The `k` nearest points, ordered by distance then index.
    pub fn nearest(&self, center: Point, k: usize) -> Vec<usize> {
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for (g, d2) in self.tree.nearest_neighbor_iter_with_distance_2(arr(center)) {
            if cands.len() >= k && d2 > cands[k - 1].0 {
                break;
            }
            cands.push((self.points[g.data].dist2(center), g.data));
            cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        cands.truncate(k);
        cands.into_iter().map(|(_, i)| i).collect()
    }
}

/// Footprint bounding boxes plus centroids.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    boxes: Vec<BBox>,
    tree: RTree<IndexedRect>,
    centroids: PointIndex,
}

impl SpatialIndex {
    pub fn build(footprints: &[Footprint]) -> Self {
        let boxes: Vec<BBox> = footprints.iter().map(|f| f.bbox()).collect();
        let items = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| IndexedRect::new(Rectangle::from_corners(arr(b.min), arr(b.max)), i))
            .collect();
        SpatialIndex {
            tree: RTree::bulk_load(items),
            centroids: PointIndex::new(footprints.iter().map(|f| f.centroid()).collect()),
            boxes,
        }
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn centroid(&self, i: usize) -> Point {
        self.centroids.point(i)
    }

    pub fn centroids(&self) -> &PointIndex {
        &self.centroids
    }

    /// Footprints whose bounding box intersects `query`.
    pub fn query_box(&self, query: &BBox) -> Vec<usize> {
        let env = AABB::from_corners(arr(query.min), arr(query.max));
        let mut out: Vec<usize> = self
            .tree
            .locate_in_envelope_intersecting(env)
            .map(|g| g.data)
            .filter(|&i| self.boxes[i].intersects(query))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn nearest(&self, p: Point, k: usize) -> Vec<usize> {
        self.centroids.nearest(p, k)
    }

    pub fn within(&self, p: Point, radius: f64) -> Vec<usize> {
        self.centroids.within(p, radius)
    }
}

/// Segments tagged with an owner id, for nearest-owner queries.
#[derive(Clone, Debug)]
pub struct SegmentIndex {
    tree: RTree<IndexedLine>,
}

impl SegmentIndex {
    pub fn new(segments: impl IntoIterator<Item = (Point, Point, usize)>) -> Self {
        let items = segments.into_iter().map(|(a, b, id)| IndexedLine::new(Line::new(arr(a), arr(b)), id)).collect();
        SegmentIndex { tree: RTree::bulk_load(items) }
    }

    /// Owner ids of all segments within squared distance `max_d2` of `p`, unsorted, may repeat.
    pub fn owners_within(&self, p: Point, max_d2: f64) -> impl Iterator<Item = usize> + '_ {
        self.tree.locate_within_distance(arr(p), max_d2).map(|g| g.data)
    }

    /// Squared distance to the closest segment.
    pub fn nearest_d2(&self, p: Point) -> Option<f64> {
        self.tree.nearest_neighbor_iter_with_distance_2(arr(p)).next().map(|(_, d2)| d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::BuildingFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(id: usize, x: f64, y: f64, s: f64) -> Footprint {
        let ring = [Point::new(x, y), Point::new(x + s, y), Point::new(x + s, y + s), Point::new(x, y + s)];
        Footprint::new(format!("b{id}"), &ring, &[], BuildingFunction::Unknown).unwrap()
    }

    #[test]
    fn all_and_none() {
        let fps: Vec<_> = (0..5).map(|i| square(i, i as f64 * 10.0, 0.0, 5.0)).collect();
        let idx = SpatialIndex::build(&fps);
        let all = BBox { min: Point::new(-1.0, -1.0), max: Point::new(100.0, 100.0) };
        assert_eq!(idx.query_box(&all), vec![0, 1, 2, 3, 4]);
        let none = BBox { min: Point::new(200.0, 200.0), max: Point::new(300.0, 300.0) };
        assert!(idx.query_box(&none).is_empty());
    }

    #[test]
    fn matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fps: Vec<_> = (0..200)
            .map(|i| square(i, rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0), rng.random_range(1.0..30.0)))
            .collect();
        let idx = SpatialIndex::build(&fps);
        for _ in 0..50 {
            let (x, y) = (rng.random_range(-50.0..1000.0), rng.random_range(-50.0..1000.0));
            let q = BBox { min: Point::new(x, y), max: Point::new(x + rng.random_range(1.0..300.0), y + rng.random_range(1.0..300.0)) };
            let scan: Vec<usize> = (0..fps.len()).filter(|&i| fps[i].bbox().intersects(&q)).collect();
            assert_eq!(idx.query_box(&q), scan);

            let c = Point::new(x, y);
            let mut order: Vec<usize> = (0..fps.len()).collect();
            order.sort_by(|&a, &b| fps[a].centroid().dist2(c).total_cmp(&fps[b].centroid().dist2(c)).then(a.cmp(&b)));
            assert_eq!(idx.nearest(c, 7), order[..7].to_vec());

            let r = rng.random_range(10.0..200.0);
            let scan: Vec<usize> = (0..fps.len()).filter(|&i| fps[i].centroid().dist2(c) <= r * r).collect();
            assert_eq!(idx.within(c, r), scan);
        }
    }
}

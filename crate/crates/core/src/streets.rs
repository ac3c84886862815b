//! Street ingestion and noding into a planar graph.

use crate::error::{Error, Result};
use crate::geodata::{feature_id, feature_tags, parse_feature_collection, GeoPoint, LoadReport, LocalProjection};
use crate::geom::{edges, point_polyline_distance, polyline_length, segment_intersection, BBox, Point, SegmentHit};
use crate::index::SegmentIndex;
use geojson::GeometryValue;
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

/// Intersection points closer than this are merged into one node.
pub const NODE_TOLERANCE_M: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreetSegment {
    pub id: String,
    pub polyline: Vec<Point>,
    pub width_hint: Option<f64>,
}

impl StreetSegment {
    /// Drops consecutive duplicates; `None` if fewer than two distinct points remain.
    pub fn new(id: impl Into<String>, raw: &[Point], width_hint: Option<f64>) -> Option<Self> {
        let mut polyline: Vec<Point> = Vec::with_capacity(raw.len());
        for &p in raw {
            if polyline.last().is_none_or(|q: &Point| q.dist(p) > crate::geodata::RING_TOLERANCE_M) {
                polyline.push(p);
            }
        }
        if polyline.len() < 2 || polyline_length(&polyline) <= 0.0 {
            return None;
        }
        Some(StreetSegment { id: id.into(), polyline, width_hint })
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.polyline)
    }
}

/// A split piece of a street between two graph nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub polyline: Vec<Point>,
    pub length: f64,
    pub width_hint: Option<f64>,
    /// Index of the source segment.
    pub segment: usize,
}

impl Edge {
    /// Straight endpoint distance over path length.
    pub fn linearity(&self) -> f64 {
        let a = self.polyline[0];
        let b = *self.polyline.last().unwrap();
        if self.length > 0.0 {
            a.dist(b) / self.length
        } else {
            0.0
        }
    }
}

/// Noded planar street graph.
#[derive(Clone, Debug)]
pub struct StreetNetwork {
    pub segments: Vec<StreetSegment>,
    pub nodes: Vec<Point>,
    pub edges: Vec<Edge>,
    /// Per node: `(edge index, neighbour node)`.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    edge_index: SegmentIndex,
}

type SubSeg = GeomWithData<Rectangle<[f64; 2]>, usize>;

struct NodeSnapper {
    cells: HashMap<(i64, i64), Vec<usize>>,
    nodes: Vec<Point>,
}

impl NodeSnapper {
    fn cell(p: Point) -> (i64, i64) {
        let s = NODE_TOLERANCE_M * 10.0;
        ((p.x / s).floor() as i64, (p.y / s).floor() as i64)
    }

    fn get_or_insert(&mut self, p: Point) -> usize {
        let (cx, cy) = Self::cell(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                    if let Some(&i) = ids.iter().find(|&&i| self.nodes[i].dist(p) <= NODE_TOLERANCE_M) {
                        return i;
                    }
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.cells.entry((cx, cy)).or_default().push(id);
        id
    }
}

impl StreetNetwork {
    /// Node the segments: every crossing, touch and overlap end becomes a node.
    pub fn from_segments(segments: Vec<StreetSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        // Flatten into sub-segments (segment index, vertex index).
        let mut subs: Vec<(usize, usize, Point, Point)> = Vec::new();
        for (si, s) in segments.iter().enumerate() {
            for (k, (a, b)) in edges(&s.polyline).enumerate() {
                subs.push((si, k, a, b));
            }
        }
        // Cut positions per sub-segment: (t, point).
        let mut cuts: Vec<Vec<(f64, Point)>> = vec![Vec::new(); subs.len()];
        let eps = NODE_TOLERANCE_M * 0.1;
        let tree: RTree<SubSeg> = RTree::bulk_load(
            subs.iter()
                .enumerate()
                .map(|(i, &(_, _, a, b))| {
                    let bb = BBox::of_points([a, b].iter()).expand(eps);
                    SubSeg::new(Rectangle::from_corners([bb.min.x, bb.min.y], [bb.max.x, bb.max.y]), i)
                })
                .collect(),
        );
        for (i, &(si, ki, a, b)) in subs.iter().enumerate() {
            let bb = BBox::of_points([a, b].iter()).expand(eps);
            let env = AABB::from_corners([bb.min.x, bb.min.y], [bb.max.x, bb.max.y]);
            let mut others: Vec<usize> = tree.locate_in_envelope_intersecting(env).map(|g| g.data).filter(|&j| j > i).collect();
            others.sort_unstable();
            for j in others {
                let (sj, kj, c, d) = subs[j];
                // Consecutive pieces of one polyline share a vertex that is not a node.
                if si == sj && kj == ki + 1 {
                    continue;
                }
                match segment_intersection(a, b, c, d, eps) {
                    SegmentHit::None => {}
                    SegmentHit::Point { t, u } => {
                        let p = a + (b - a) * t;
                        cuts[i].push((t, p));
                        cuts[j].push((u, p));
                    }
                    SegmentHit::Overlap { t0, t1 } => {
                        for t in [t0, t1] {
                            let p = a + (b - a) * t;
                            cuts[i].push((t, p));
                            let cd = d - c;
                            let u = ((p - c).dot(cd) / cd.dot(cd)).clamp(0.0, 1.0);
                            cuts[j].push((u, p));
                        }
                    }
                }
            }
        }

        let mut snapper = NodeSnapper { cells: HashMap::new(), nodes: Vec::new() };
        let mut edge_list: Vec<Edge> = Vec::new();
        let mut sub_cursor = 0usize;
        for (si, s) in segments.iter().enumerate() {
            let n_sub = s.polyline.len() - 1;
            // Ordered cut list over the whole polyline: (sub index, t, point).
            let mut seq: Vec<(usize, f64, Point)> = vec![(0, 0.0, s.polyline[0])];
            for k in 0..n_sub {
                let mut c = cuts[sub_cursor + k].clone();
                c.sort_by(|x, y| x.0.total_cmp(&y.0));
                seq.extend(c.into_iter().map(|(t, p)| (k, t, p)));
            }
            seq.push((n_sub - 1, 1.0, *s.polyline.last().unwrap()));
            sub_cursor += n_sub;

            let mut prev_node = snapper.get_or_insert(seq[0].2);
            let mut current: Vec<Point> = vec![snapper.nodes[prev_node]];
            let mut last_k = 0usize;
            for &(k, t, p) in seq.iter().skip(1) {
                // Original vertices passed since the last cut.
                for v in last_k + 1..=k {
                    let q = s.polyline[v];
                    if current.last().unwrap().dist(q) > 0.0 && !(v == k && t == 0.0) {
                        current.push(q);
                    }
                }
                last_k = k;
                let node = snapper.get_or_insert(p);
                let np = snapper.nodes[node];
                if current.last().unwrap().dist(np) > 0.0 {
                    current.push(np);
                }
                if node != prev_node || current.len() > 2 {
                    let length = polyline_length(&current);
                    if length > NODE_TOLERANCE_M {
                        edge_list.push(Edge {
                            from: prev_node,
                            to: node,
                            polyline: std::mem::take(&mut current),
                            length,
                            width_hint: s.width_hint,
                            segment: si,
                        });
                    }
                }
                current = vec![np];
                prev_node = node;
            }
        }

        // Duplicate edges arise from overlapping input streets.
        let mut seen: HashMap<(usize, usize, i64, i64), usize> = HashMap::new();
        let mut deduped: Vec<Edge> = Vec::new();
        for e in edge_list {
            let mid = polyline_midpoint(&e.polyline);
            let q = |v: f64| (v / (NODE_TOLERANCE_M * 10.0)).round() as i64;
            let key = (e.from.min(e.to), e.from.max(e.to), q(mid.x), q(mid.y));
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key, deduped.len());
            deduped.push(e);
        }

        let nodes = snapper.nodes;
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (ei, e) in deduped.iter().enumerate() {
            adjacency[e.from].push((ei, e.to));
            if e.to != e.from {
                adjacency[e.to].push((ei, e.from));
            } else {
                adjacency[e.from].push((ei, e.from));
            }
        }
        let edge_index = SegmentIndex::new(deduped.iter().enumerate().flat_map(|(ei, e)| edges(&e.polyline).map(move |(a, b)| (a, b, ei))));
        Ok(StreetNetwork { segments, nodes, edges: deduped, adjacency, edge_index })
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Nodes where at least three edge ends meet.
    pub fn intersections(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&n| self.degree(n) >= 3).collect()
    }

    /// Closest edge to `p` by polyline distance; ties go to the lower edge index.
    pub fn nearest_edge(&self, p: Point) -> Option<(usize, f64)> {
        let d2 = self.edge_index.nearest_d2(p)?;
        let margin = d2 * 1e-9 + 1e-9;
        let mut cands: Vec<usize> = self.edge_index.owners_within(p, d2 + margin).collect();
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .map(|e| (e, point_polyline_distance(p, &self.edges[e].polyline)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Edge ids whose polyline lies within `radius` of `p`, sorted.
    pub fn edges_within(&self, p: Point, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        let mut cands: Vec<usize> = self.edge_index.owners_within(p, r2 * (1.0 + 1e-9) + 1e-12).collect();
        cands.sort_unstable();
        cands.dedup();
        cands.retain(|&e| point_polyline_distance(p, &self.edges[e].polyline) <= radius);
        cands
    }
}

/// Point halfway along a polyline by arc length.
fn polyline_midpoint(line: &[Point]) -> Point {
    let half = polyline_length(line) / 2.0;
    let mut acc = 0.0;
    for (a, b) in edges(line) {
        let l = a.dist(b);
        if acc + l >= half && l > 0.0 {
            return a + (b - a) * ((half - acc) / l);
        }
        acc += l;
    }
    *line.last().unwrap()
}

fn parse_width(v: &str) -> Option<f64> {
    let t = v.trim().trim_end_matches('m').trim();
    t.parse::<f64>().ok().filter(|w| w.is_finite() && *w > 0.0)
}

/// Ingest street linestrings from a GeoJSON string.
pub fn parse_streets(text: &str, proj: &LocalProjection) -> Result<(StreetNetwork, LoadReport)> {
    let features = parse_feature_collection(text)?;
    let mut report = LoadReport::default();
    let mut segments = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let id = feature_id(f, i);
        let tags = feature_tags(f);
        let width = tags.get("width").and_then(|w| parse_width(w));
        let lines: Vec<&Vec<geojson::Position>> = match f.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::LineString { coordinates }) => vec![coordinates],
            Some(GeometryValue::MultiLineString { coordinates }) => coordinates.iter().collect(),
            _ => {
                report.read += 1;
                report.skip(id, "not a linestring");
                continue;
            }
        };
        let multi = lines.len() > 1;
        for (k, line) in lines.into_iter().enumerate() {
            report.read += 1;
            let part_id = if multi { format!("{id}#{k}") } else { id.clone() };
            let pts = line
                .iter()
                .map(|p| {
                    if p.len() < 2 {
                        return Err(Error::Input("position with fewer than two coordinates".into()));
                    }
                    proj.project(GeoPoint { lon: p[0], lat: p[1] })
                })
                .collect::<Result<Vec<_>>>()?;
            match StreetSegment::new(part_id.clone(), &pts, width) {
                Some(s) => {
                    segments.push(s);
                    report.kept += 1;
                }
                None => report.skip(part_id, "fewer than 2 distinct points"),
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    Ok((StreetNetwork::from_segments(segments)?, report))
}

pub fn load_streets(path: impl AsRef<Path>, proj: &LocalProjection) -> Result<(StreetNetwork, LoadReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_streets(&text, proj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: &str, pts: &[(f64, f64)]) -> StreetSegment {
        let pts: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        StreetSegment::new(id, &pts, None).unwrap()
    }

    #[test]
    fn x_shape_is_noded() {
        let net = StreetNetwork::from_segments(vec![seg("a", &[(-1.0, -1.0), (1.0, 1.0)]), seg("b", &[(-1.0, 1.0), (1.0, -1.0)])]).unwrap();
        assert_eq!(net.nodes.len(), 5);
        assert_eq!(net.edges.len(), 4);
        assert_eq!(net.intersections().len(), 1);
        for e in &net.edges {
            assert!((e.length - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_and_parallel() {
        let net = StreetNetwork::from_segments(vec![seg("a", &[(0.0, 0.0), (10.0, 0.0)])]).unwrap();
        assert_eq!((net.nodes.len(), net.edges.len()), (2, 1));
        let net = StreetNetwork::from_segments(vec![seg("a", &[(0.0, 0.0), (10.0, 0.0)]), seg("b", &[(0.0, 1.0), (10.0, 1.0)])]).unwrap();
        assert_eq!((net.nodes.len(), net.edges.len()), (4, 2));
    }

    #[test]
    fn polyline_vertices_are_not_nodes() {
        let net = StreetNetwork::from_segments(vec![seg("a", &[(0.0, 0.0), (5.0, 0.0), (5.0, 5.0)])]).unwrap();
        assert_eq!((net.nodes.len(), net.edges.len()), (2, 1));
        assert_eq!(net.edges[0].polyline.len(), 3);
        assert!((net.edges[0].length - 10.0).abs() < 1e-12);
        assert!((net.edges[0].linearity() - 50f64.sqrt() / 10.0).abs() < 1e-12);
    }

    #[test]
    fn t_junction_and_shared_endpoints() {
        let net = StreetNetwork::from_segments(vec![
            seg("a", &[(0.0, 0.0), (10.0, 0.0)]),
            seg("b", &[(5.0, 0.0), (5.0, 5.0)]),
            seg("c", &[(10.0, 0.0), (10.0, 5.0)]),
        ])
        .unwrap();
        assert_eq!(net.nodes.len(), 5);
        assert_eq!(net.edges.len(), 4);
        let ix = net.intersections();
        assert_eq!(ix.len(), 1);
        assert_eq!(net.nodes[ix[0]], Point::new(5.0, 0.0));
    }

    #[test]
    fn overlapping_streets_are_deduplicated() {
        let net = StreetNetwork::from_segments(vec![seg("a", &[(0.0, 0.0), (10.0, 0.0)]), seg("b", &[(5.0, 0.0), (15.0, 0.0)])]).unwrap();
        assert_eq!(net.nodes.len(), 4);
        assert_eq!(net.edges.len(), 3);
    }

    #[test]
    fn width_tag() {
        assert_eq!(parse_width("7.5"), Some(7.5));
        assert_eq!(parse_width("6 m"), Some(6.0));
        assert_eq!(parse_width("wide"), None);
    }

    #[test]
    fn empty_network_error() {
        assert!(matches!(StreetNetwork::from_segments(vec![]), Err(Error::EmptyNetwork)));
        let proj = LocalProjection::new(GeoPoint { lon: 8.0, lat: 49.0 });
        let text = r#"{"type":"FeatureCollection","features":[]}"#;
        assert!(matches!(parse_streets(text, &proj), Err(Error::EmptyNetwork)));
    }
}

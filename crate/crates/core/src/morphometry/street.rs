//! Street-level descriptors of each building.

use super::centrality::{all_local_closeness, betweenness, WeightedGraph};
use super::shape::Agg;
use super::MorphometryConfig;
use crate::geom::Point;
use crate::index::PointIndex;
use crate::streets::StreetNetwork;

/// Precomputed network state shared by all buildings.
#[derive(Clone, Debug)]
pub struct StreetContext<'a> {
    pub net: &'a StreetNetwork,
    pub nodes: PointIndex,
    pub intersections: Vec<usize>,
    pub intersection_index: PointIndex,
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub default_width: f64,
}

impl<'a> StreetContext<'a> {
    pub fn new(net: &'a StreetNetwork, cfg: &MorphometryConfig) -> Self {
        let g = WeightedGraph::from_network(net);
        let intersections = net.intersections();
        StreetContext {
            nodes: PointIndex::new(net.nodes.clone()),
            intersection_index: PointIndex::new(intersections.iter().map(|&i| net.nodes[i]).collect()),
            intersections,
            betweenness: betweenness(&g),
            closeness: all_local_closeness(&g, cfg.local_closeness_radius_m),
            default_width: cfg.default_street_width_m,
            net,
        }
    }
}

/// Per-building street values before neighbour aggregation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StreetBase {
    pub nearest_edge: usize,
    pub nearest_segment_length: f64,
    pub nearest_segment_width: f64,
    pub distance_to_nearest_segment: f64,
    pub nearest_segment_linearity: f64,
    pub distance_to_nearest_intersection: f64,
    pub nearest_intersection_degree: f64,
    pub local_closeness: f64,
    pub betweenness: f64,
    pub buildings_on_nearest_segment: f64,
}

impl StreetBase {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.nearest_segment_length,
            self.nearest_segment_width,
            self.distance_to_nearest_segment,
            self.nearest_segment_linearity,
            self.distance_to_nearest_intersection,
            self.nearest_intersection_degree,
            self.local_closeness,
            self.betweenness,
            self.buildings_on_nearest_segment,
        ]
    }
}

/// Street values measured from a building centroid. `buildings_on_nearest_segment` is filled by
/// [`count_segment_sharing`].
pub fn street_base_features(centroid: Point, ctx: &StreetContext) -> StreetBase {
    let net = ctx.net;
    let (ei, d) = net.nearest_edge(centroid).expect("network has edges");
    let e = &net.edges[ei];
    let node = ctx.nodes.nearest(centroid, 1)[0];
    let (di, deg) = match ctx.intersection_index.nearest(centroid, 1).first() {
        Some(&k) => {
            let n = ctx.intersections[k];
            (net.nodes[n].dist(centroid), net.degree(n) as f64)
        }
        None => (0.0, 0.0),
    };
    StreetBase {
        nearest_edge: ei,
        nearest_segment_length: e.length,
        nearest_segment_width: e.width_hint.unwrap_or(ctx.default_width),
        distance_to_nearest_segment: d,
        nearest_segment_linearity: e.linearity(),
        distance_to_nearest_intersection: di,
        nearest_intersection_degree: deg,
        local_closeness: ctx.closeness[node],
        betweenness: ctx.betweenness[node],
        buildings_on_nearest_segment: 0.0,
    }
}

/// Count, for each building, how many buildings (itself included) share its nearest edge.
pub fn count_segment_sharing(base: &mut [StreetBase], n_edges: usize) {
    let mut counts = vec![0usize; n_edges];
    for b in base.iter() {
        counts[b.nearest_edge] += 1;
    }
    for b in base.iter_mut() {
        b.buildings_on_nearest_segment = counts[b.nearest_edge] as f64;
    }
}

/// Eleven values per buffer: segments, intersections and neighbour street distances.
pub fn street_buffered_aggregates(
    subject: usize,
    centroids: &PointIndex,
    base: &[StreetBase],
    ctx: &StreetContext,
    buffers: &[u32],
) -> Vec<f64> {
    let c = centroids.point(subject);
    let mut out = Vec::with_capacity(buffers.len() * 11);
    for &r in buffers {
        let r = r as f64;
        let segs = ctx.net.edges_within(c, r);
        out.push(segs.len() as f64);
        out.extend(Agg::of(segs.iter().map(|&e| ctx.net.edges[e].length)).to_array());

        let xs = ctx.intersection_index.within(c, r);
        out.push(xs.len() as f64);
        out.extend(Agg::of(xs.iter().map(|&k| ctx.intersection_index.point(k).dist(c))).to_array());

        let nbrs = centroids.within(c, r);
        out.extend(Agg::of(nbrs.iter().filter(|&&j| j != subject).map(|&j| base[j].distance_to_nearest_segment)).to_array());
    }
    out
}

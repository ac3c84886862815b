//! Street blocks as bounded faces of the noded street graph.

use super::shape::{Agg, ShapeMetrics};
use crate::geom::{clean_ring, point_in_ring, ring_signed_area, Point, Polygon};
use crate::index::PointIndex;
use crate::streets::StreetNetwork;

/// Face rings shorter than this in area are numerical slivers and dropped.
const MIN_BLOCK_AREA_M2: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub id: String,
    pub polygon: Polygon,
    /// Indices into the footprint list, ascending.
    pub building_ids: Vec<usize>,
}

/// Edges that survive dangle pruning and bridge removal.
fn cycle_edges(net: &StreetNetwork) -> Vec<bool> {
    let n = net.nodes.len();
    let mut alive = vec![true; net.edges.len()];
    let mut deg: Vec<usize> = (0..n).map(|v| net.adjacency[v].len()).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if deg[v] != 1 {
            continue;
        }
        if let Some(&(e, w)) = net.adjacency[v].iter().find(|(e, _)| alive[*e]) {
            alive[e] = false;
            deg[v] -= 1;
            deg[w] -= 1;
            if deg[w] == 1 {
                stack.push(w);
            }
        }
    }
    for e in bridges(net, &alive) {
        alive[e] = false;
    }
    alive
}

/// Bridge edges among the alive ones, by iterative low-link search.
fn bridges(net: &StreetNetwork, alive: &[bool]) -> Vec<usize> {
    let n = net.nodes.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut out = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, edge used to enter, next adjacency position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut pos)) = stack.last_mut() {
            if *pos < net.adjacency[v].len() {
                let (e, w) = net.adjacency[v][*pos];
                *pos += 1;
                if !alive[e] || e == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        out.push(via);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Traverse faces of the graph restricted to `alive` edges. Returns closed rings with their
/// signed areas, one per face.
fn faces(net: &StreetNetwork, alive: &[bool]) -> Vec<(Vec<Point>, Vec<usize>)> {
    // Half-edge h = 2*e + dir; dir 0 runs from -> to.
    let n_he = net.edges.len() * 2;
    let origin = |h: usize| {
        let e = &net.edges[h / 2];
        if h % 2 == 0 {
            e.from
        } else {
            e.to
        }
    };
    let path = |h: usize| -> Vec<Point> {
        let mut p = net.edges[h / 2].polyline.clone();
        if h % 2 == 1 {
            p.reverse();
        }
        p
    };
    let mut outgoing: Vec<Vec<(f64, usize)>> = vec![Vec::new(); net.nodes.len()];
    for h in 0..n_he {
        if !alive[h / 2] {
            continue;
        }
        let p = path(h);
        let d = p[1] - p[0];
        outgoing[origin(h)].push((d.y.atan2(d.x), h));
    }
    for list in &mut outgoing {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    let mut rank = vec![usize::MAX; n_he];
    for list in &outgoing {
        for (i, &(_, h)) in list.iter().enumerate() {
            rank[h] = i;
        }
    }
    let next = |h: usize| -> usize {
        let twin = h ^ 1;
        let list = &outgoing[origin(twin)];
        let i = rank[twin];
        list[(i + list.len() - 1) % list.len()].1
    };

    let mut visited = vec![false; n_he];
    let mut out = Vec::new();
    for start in 0..n_he {
        if !alive[start / 2] || visited[start] {
            continue;
        }
        let mut ring: Vec<Point> = Vec::new();
        let mut hs = Vec::new();
        let mut h = start;
        while !visited[h] {
            visited[h] = true;
            hs.push(h);
            let p = path(h);
            ring.extend_from_slice(&p[..p.len() - 1]);
            h = next(h);
        }
        ring.push(ring[0]);
        out.push((ring, hs));
    }
    out
}

/// Bounded faces of the street graph, with nested components attached as holes.
pub fn tessellate_blocks(net: &StreetNetwork) -> Vec<Block> {
    let alive = cycle_edges(net);
    let mut bounded: Vec<Vec<Point>> = Vec::new();
    let mut outer: Vec<Vec<Point>> = Vec::new();
    for (ring, _) in faces(net, &alive) {
        let a = ring_signed_area(&ring);
        if a > MIN_BLOCK_AREA_M2 {
            if let Some(r) = clean_ring(&ring, crate::geodata::RING_TOLERANCE_M) {
                bounded.push(r);
            }
        } else if a < -MIN_BLOCK_AREA_M2 {
            outer.push(ring);
        }
    }
    let mut holes: Vec<Vec<Vec<Point>>> = vec![Vec::new(); bounded.len()];
    for o in outer {
        // A component boundary is a hole in the smallest face of another component enclosing it.
        let probe = o[0];
        let host = (0..bounded.len())
            .filter(|&i| !bounded[i].contains(&probe) && point_in_ring(probe, &bounded[i]))
            .min_by(|&a, &b| ring_signed_area(&bounded[a]).total_cmp(&ring_signed_area(&bounded[b])).then(a.cmp(&b)));
        if let Some(i) = host {
            if let Some(mut r) = clean_ring(&o, crate::geodata::RING_TOLERANCE_M) {
                crate::geom::orient_ring(&mut r, false);
                holes[i].push(r);
            }
        }
    }
    bounded
        .into_iter()
        .zip(holes)
        .enumerate()
        .map(|(i, (ext, hs))| Block { id: format!("blk{i}"), polygon: Polygon::new(ext, hs), building_ids: Vec::new() })
        .collect()
}

/// Assign each building centroid to the first block containing it. Returns the block index per
/// building, `None` for the unbounded block.
pub fn assign_buildings(blocks: &mut [Block], centroids: &[Point]) -> Vec<Option<usize>> {
    let boxes: Vec<_> = blocks.iter().map(|b| b.polygon.bbox()).collect();
    let mut out = vec![None; centroids.len()];
    for (i, &c) in centroids.iter().enumerate() {
        for (k, b) in blocks.iter().enumerate() {
            let bb = &boxes[k];
            if c.x < bb.min.x || c.x > bb.max.x || c.y < bb.min.y || c.y > bb.max.y {
                continue;
            }
            if b.polygon.contains(c) {
                out[i] = Some(k);
                break;
            }
        }
    }
    for (i, a) in out.iter().enumerate() {
        if let Some(k) = a {
            blocks[*k].building_ids.push(i);
        }
    }
    out
}

/// Eight shape values plus building count and area total/mean/std.
pub fn block_features(polygon: Option<&Polygon>, member_areas: &[f64]) -> [f64; 12] {
    let s = polygon.map(ShapeMetrics::of).unwrap_or_default();
    let agg = Agg::of(member_areas.iter().copied());
    [
        s.area,
        s.perimeter,
        s.convexity,
        s.circular_compactness,
        s.orientation,
        s.corner_count,
        s.longest_axis_length,
        s.equivalent_rectangular_index,
        member_areas.len() as f64,
        agg.total,
        agg.mean,
        agg.std,
    ]
}

/// Block count and area total/mean/std per buffer, then corner count mean/std at the widest
/// buffer, over blocks whose centroid falls within each buffer.
pub fn block_buffered_aggregates(c: Point, block_centroids: &PointIndex, shapes: &[ShapeMetrics], buffers: &[u32]) -> Vec<f64> {
    let mut out = Vec::with_capacity(buffers.len() * 4 + 2);
    for &r in buffers {
        let ids = block_centroids.within(c, r as f64);
        out.push(ids.len() as f64);
        out.extend(Agg::of(ids.iter().map(|&k| shapes[k].area)).to_array());
    }
    if let Some(&r) = buffers.iter().max() {
        let ids = block_centroids.within(c, r as f64);
        let a = Agg::of(ids.iter().map(|&k| shapes[k].corner_count));
        out.extend([a.mean, a.std]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streets::StreetSegment;

    fn net(lines: Vec<Vec<(f64, f64)>>) -> StreetNetwork {
        let segs = lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let pts: Vec<Point> = l.iter().map(|&(x, y)| Point::new(x, y)).collect();
                StreetSegment::new(format!("s{i}"), &pts, None).unwrap()
            })
            .collect();
        StreetNetwork::from_segments(segs).unwrap()
    }

    fn grid(k: usize, spacing: f64) -> StreetNetwork {
        let end = (k - 1) as f64 * spacing;
        let mut lines = Vec::new();
        for i in 0..k {
            let v = i as f64 * spacing;
            lines.push(vec![(0.0, v), (end, v)]);
            lines.push(vec![(v, 0.0), (v, end)]);
        }
        net(lines)
    }

    #[test]
    fn grid_block_counts() {
        for k in 2..=6 {
            let blocks = tessellate_blocks(&grid(k, 100.0));
            assert_eq!(blocks.len(), (k - 1) * (k - 1), "k={k}");
            for b in &blocks {
                assert!((b.polygon.area() - 10_000.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn triangle_and_tree() {
        let tri = net(vec![vec![(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (0.0, 0.0)]]);
        assert_eq!(tessellate_blocks(&tri).len(), 1);
        let tree = net(vec![vec![(0.0, 0.0), (10.0, 0.0)], vec![(5.0, 0.0), (5.0, 10.0)], vec![(5.0, 5.0), (8.0, 5.0)]]);
        assert!(tessellate_blocks(&tree).is_empty());
    }

    #[test]
    fn dangles_and_bridges_are_ignored() {
        // Two squares joined by a bridge, with a dangling spur.
        let n = net(vec![
            vec![(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0), (0.0, 0.0)],
            vec![(10.0, 5.0), (30.0, 5.0)],
            vec![(30.0, 0.0), (40.0, 0.0), (40.0, 10.0), (30.0, 10.0), (30.0, 0.0)],
            vec![(5.0, 5.0), (5.0, 8.0)],
        ]);
        let blocks = tessellate_blocks(&n);
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| (b.polygon.area() - 100.0).abs() < 1e-9));
    }

    #[test]
    fn nested_ring_becomes_hole() {
        let n = net(vec![
            vec![(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0), (0.0, 0.0)],
            vec![(40.0, 40.0), (60.0, 40.0), (60.0, 60.0), (40.0, 60.0), (40.0, 40.0)],
        ]);
        let mut blocks = tessellate_blocks(&n);
        assert_eq!(blocks.len(), 2);
        let outer = blocks.iter().position(|b| b.polygon.holes.len() == 1).unwrap();
        assert!((blocks[outer].polygon.area() - 9600.0).abs() < 1e-9);
        let assign = assign_buildings(&mut blocks, &[Point::new(50.0, 50.0), Point::new(10.0, 10.0), Point::new(500.0, 0.0)]);
        assert_eq!(assign[1], Some(outer));
        assert_ne!(assign[0], Some(outer));
        assert!(assign[0].is_some());
        assert_eq!(assign[2], None);
    }

    #[test]
    fn unit_block_with_one_building() {
        let sq = Polygon::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0), Point::new(0.0, 0.0)],
            vec![],
        );
        let f = block_features(Some(&sq), &[0.25]);
        assert_eq!(f[0], 1.0);
        assert_eq!(&f[8..], &[1.0, 0.25, 0.25, 0.0]);
        assert_eq!(block_features(None, &[]), [0.0; 12]);
    }

    #[test]
    fn buffered_block_areas() {
        let idx = PointIndex::new(vec![Point::new(0.0, 10.0), Point::new(0.0, -10.0)]);
        let shapes = [ShapeMetrics { area: 1.0, ..Default::default() }, ShapeMetrics { area: 3.0, ..Default::default() }];
        let v = block_buffered_aggregates(Point::new(0.0, 0.0), &idx, &shapes, &[50]);
        assert_eq!(v[..4], [2.0, 4.0, 2.0, 1.0]);
        let far = block_buffered_aggregates(Point::new(1e4, 0.0), &idx, &shapes, &[50, 200, 500]);
        assert!(far.iter().all(|&x| x == 0.0));
        assert_eq!(far.len(), 14);
    }
}

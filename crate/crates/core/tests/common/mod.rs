//! Brute-force reference computations used to check the library from a second route.
#![allow(dead_code)]

use bheight_core::geom::Point;
use bheight_core::synth::SyntheticCity;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

/// Open ring (no closing duplicate).
pub fn open(ring: &[Point]) -> Vec<Point> {
    let mut v = ring.to_vec();
    if v.len() > 1 && v[0] == v[v.len() - 1] {
        v.pop();
    }
    v
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Area by a triangle fan from the first vertex.
pub fn fan_area(ring: &[Point]) -> f64 {
    let r = open(ring);
    (1..r.len().saturating_sub(1)).map(|i| cross(r[0], r[i], r[i + 1]) / 2.0).sum::<f64>().abs()
}

/// Centroid as the area-weighted mean of fan triangle centroids.
pub fn fan_centroid(ring: &[Point]) -> Point {
    let r = open(ring);
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 1..r.len() - 1 {
        let t = cross(r[0], r[i], r[i + 1]) / 2.0;
        a += t;
        cx += t * (r[0].x + r[i].x + r[i + 1].x) / 3.0;
        cy += t * (r[0].y + r[i].y + r[i + 1].y) / 3.0;
    }
    Point::new(cx / a, cy / a)
}

pub fn perimeter(ring: &[Point]) -> f64 {
    let r = open(ring);
    (0..r.len()).map(|i| r[i].dist(r[(i + 1) % r.len()])).sum()
}

/// Gift wrapping; returns the hull vertices without collinear points.
pub fn jarvis_hull(pts: &[Point]) -> Vec<Point> {
    let start = (0..pts.len()).min_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.total_cmp(&pts[b].y))).unwrap();
    let mut hull = vec![pts[start]];
    let mut cur = start;
    loop {
        let mut next = if cur == 0 { 1 } else { 0 };
        for j in 0..pts.len() {
            if j == cur {
                continue;
            }
            let c = cross(pts[cur], pts[next], pts[j]);
            // Clockwise candidate, or collinear and farther.
            if c < 0.0 || (c == 0.0 && pts[cur].dist2(pts[j]) > pts[cur].dist2(pts[next])) {
                next = j;
            }
        }
        if next == start {
            break;
        }
        hull.push(pts[next]);
        cur = next;
        assert!(hull.len() <= pts.len(), "hull did not close");
    }
    hull
}

/// Smallest circle over all pair diameters and triple circumcircles that covers every point.
pub fn brute_mec_radius(pts: &[Point]) -> f64 {
    let covers = |c: Point, r: f64| pts.iter().all(|p| p.dist(c) <= r * (1.0 + 1e-12) + 1e-12);
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let c = Point::new((pts[i].x + pts[j].x) / 2.0, (pts[i].y + pts[j].y) / 2.0);
            let r = pts[i].dist(pts[j]) / 2.0;
            if r < best && covers(c, r) {
                best = r;
            }
            for k in j + 1..pts.len() {
                let (a, b, cc) = (pts[i], pts[j], pts[k]);
                let d = 2.0 * (a.x * (b.y - cc.y) + b.x * (cc.y - a.y) + cc.x * (a.y - b.y));
                if d.abs() < 1e-12 {
                    continue;
                }
                let a2 = a.x * a.x + a.y * a.y;
                let b2 = b.x * b.x + b.y * b.y;
                let c2 = cc.x * cc.x + cc.y * cc.y;
                let ux = (a2 * (b.y - cc.y) + b2 * (cc.y - a.y) + c2 * (a.y - b.y)) / d;
                let uy = (a2 * (cc.x - b.x) + b2 * (a.x - cc.x) + c2 * (b.x - a.x)) / d;
                let center = Point::new(ux, uy);
                let r = center.dist(a);
                if r < best && covers(center, r) {
                    best = r;
                }
            }
        }
    }
    best
}

/// Minimum-area bounding rectangle over every direction spanned by two points:
/// (area, perimeter, long-axis direction).
pub fn brute_min_rect(pts: &[Point]) -> (f64, f64, Point) {
    let mut best = (f64::INFINITY, 0.0, Point::new(1.0, 0.0));
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let d = Point::new(pts[j].x - pts[i].x, pts[j].y - pts[i].y);
            let n = (d.x * d.x + d.y * d.y).sqrt();
            let u = Point::new(d.x / n, d.y / n);
            let v = Point::new(-u.y, u.x);
            let pu: Vec<f64> = pts.iter().map(|p| p.x * u.x + p.y * u.y).collect();
            let pv: Vec<f64> = pts.iter().map(|p| p.x * v.x + p.y * v.y).collect();
            let span = |s: &[f64]| s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min);
            let (l, w) = (span(&pu), span(&pv));
            let cand = (l * w, 2.0 * (l + w), if l >= w { u } else { v });
            // Equal areas: smaller perimeter, then the axis nearest to x or y.
            let better = if (cand.0 - best.0).abs() > 1e-9 * best.0.min(cand.0) {
                cand.0 < best.0
            } else if (cand.1 - best.1).abs() > 1e-9 * best.1 {
                cand.1 < best.1
            } else {
                axis_deviation(cand.2) < axis_deviation(best.2) - 1e-9
            };
            if best.0.is_infinite() || better {
                best = cand;
            }
        }
    }
    best
}

/// Degrees in [0, 45] between a direction and the closest of the x or y axis.
pub fn axis_deviation(d: Point) -> f64 {
    let a = (d.y.abs()).atan2(d.x.abs()).to_degrees();
    a.min(90.0 - a)
}

/// Vertices where the boundary direction changes by more than `deg` degrees.
pub fn corners(ring: &[Point], deg: f64) -> usize {
    let r = open(ring);
    let n = r.len();
    (0..n)
        .filter(|&i| {
            let (p, c, q) = (r[(i + n - 1) % n], r[i], r[(i + 1) % n]);
            let (ax, ay, bx, by) = (c.x - p.x, c.y - p.y, q.x - c.x, q.y - c.y);
            let cos = ((ax * bx + ay * by) / ((ax * ax + ay * ay).sqrt() * (bx * bx + by * by).sqrt())).clamp(-1.0, 1.0);
            cos.acos().to_degrees() > deg
        })
        .count()
}

pub fn max_pair_distance(pts: &[Point]) -> f64 {
    let mut m = 0.0f64;
    for a in pts {
        for b in pts {
            m = m.max(a.dist(*b));
        }
    }
    m
}

/// area, perimeter, circular compactness, convexity, orientation, corners, longest axis, ERI.
pub fn shape_oracle(ring: &[Point]) -> [f64; 8] {
    let pts = open(ring);
    let area = fan_area(ring);
    let per = perimeter(ring);
    let hull = jarvis_hull(&pts);
    let hull_area = fan_area(&hull);
    let r = brute_mec_radius(&hull);
    let (ra, rp, axis) = brute_min_rect(&hull);
    [
        area,
        per,
        area / (PI * r * r),
        area / hull_area,
        axis_deviation(axis),
        corners(ring, 10.0) as f64,
        max_pair_distance(&pts),
        (area / ra).sqrt() * rp / per,
    ]
}

pub fn tms(v: &[f64]) -> [f64; 3] {
    if v.is_empty() {
        return [0.0; 3];
    }
    let n = v.len() as f64;
    let total: f64 = v.iter().sum();
    let mean = total / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    [total, mean, var.sqrt()]
}

struct AxisRect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn axis_rect(ring: &[Point]) -> AxisRect {
    let xs = ring.iter().map(|p| p.x);
    let ys = ring.iter().map(|p| p.y);
    AxisRect {
        x0: xs.clone().fold(f64::MAX, f64::min),
        x1: xs.fold(f64::MIN, f64::max),
        y0: ys.clone().fold(f64::MAX, f64::min),
        y1: ys.fold(f64::MIN, f64::max),
    }
}

/// Shared wall length between axis-aligned rectangles: touching sides times their overlap.
fn rect_shared_wall(a: &AxisRect, b: &AxisRect, tol: f64) -> f64 {
    let ov = |lo0: f64, hi0: f64, lo1: f64, hi1: f64| (hi0.min(hi1) - lo0.max(lo1)).max(0.0);
    let mut s = 0.0;
    if (a.x1 - b.x0).abs() <= tol || (a.x0 - b.x1).abs() <= tol {
        s += ov(a.y0, a.y1, b.y0, b.y1);
    }
    if (a.y1 - b.y0).abs() <= tol || (a.y0 - b.y1).abs() <= tol {
        s += ov(a.x0, a.x1, b.x0, b.x1);
    }
    s
}

fn dist_to_axis_segment(p: Point, a: Point, b: Point) -> f64 {
    let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
    let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
    let dx = (x0 - p.x).max(0.0).max(p.x - x1);
    let dy = (y0 - p.y).max(0.0).max(p.y - y1);
    (dx * dx + dy * dy).sqrt()
}

/// Street grid graph rebuilt straight from the grid line positions.
pub struct Grid {
    pub nodes: Vec<Point>,
    pub edges: Vec<(usize, usize, f64)>,
    pub degree: Vec<usize>,
    pub dist: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(xs: &[f64], ys: &[f64]) -> Grid {
        let (nx, ny) = (xs.len(), ys.len());
        let id = |i: usize, j: usize| j * nx + i;
        let nodes: Vec<Point> = (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| Point::new(xs[i], ys[j])).collect();
        let mut edges = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if i + 1 < nx {
                    edges.push((id(i, j), id(i + 1, j), xs[i + 1] - xs[i]));
                }
                if j + 1 < ny {
                    edges.push((id(i, j), id(i, j + 1), ys[j + 1] - ys[j]));
                }
            }
        }
        let n = nodes.len();
        let mut degree = vec![0; n];
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (v, row) in dist.iter_mut().enumerate() {
            row[v] = 0.0;
        }
        for &(a, b, w) in &edges {
            degree[a] += 1;
            degree[b] += 1;
            dist[a][b] = w;
            dist[b][a] = w;
        }
        // Floyd-Warshall.
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        // Shortest path counts by increasing distance from each source.
        let eq = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let mut sigma = vec![vec![0.0; n]; n];
        for s in 0..n {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| dist[s][a].total_cmp(&dist[s][b]));
            sigma[s][s] = 1.0;
            for &t in &order[1..] {
                let mut c = 0.0;
                for &(a, b, w) in &edges {
                    for (u, v) in [(a, b), (b, a)] {
                        if v == t && eq(dist[s][u] + w, dist[s][t]) {
                            c += sigma[s][u];
                        }
                    }
                }
                sigma[s][t] = c;
            }
        }
        Grid { nodes, edges, degree, dist, sigma }
    }

    /// Pair-dependency definition summed over ordered pairs, over (n-1)(n-2).
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let eq = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let mut out = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    continue;
                }
                for v in 0..n {
                    if v == s || v == t {
                        continue;
                    }
                    if eq(self.dist[s][v] + self.dist[v][t], self.dist[s][t]) {
                        out[v] += self.sigma[s][v] * self.sigma[v][t] / self.sigma[s][t];
                    }
                }
            }
        }
        let scale = ((n - 1) * (n - 2)) as f64;
        out.into_iter().map(|b| b / scale).collect()
    }

    pub fn closeness(&self, v: usize, radius: f64) -> f64 {
        let reach: Vec<f64> = (0..self.nodes.len()).filter(|&u| u != v && self.dist[v][u] <= radius).map(|u| self.dist[v][u]).collect();
        let sum: f64 = reach.iter().sum();
        if reach.is_empty() {
            0.0
        } else {
            reach.len() as f64 / sum
        }
    }
}

/// Index of the smallest value; panics if the runner-up is within `gap`, since then the choice
/// depends on tie-breaking rather than geometry.
fn unique_argmin(v: impl IntoIterator<Item = f64>, gap: f64, what: &str) -> (usize, f64) {
    let mut items: Vec<(f64, usize)> = v.into_iter().enumerate().map(|(i, d)| (d, i)).collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    if items.len() > 1 {
        assert!(items[1].0 - items[0].0 > gap, "near tie for {what}: {} vs {}", items[0].0, items[1].0);
    }
    (items[0].1, items[0].0)
}

/// Every feature of every building of a grid city, by column name.
pub fn city_features(city: &SyntheticCity, buffers: &[u32], closeness_radius: f64, default_width: f64) -> Vec<BTreeMap<String, f64>> {
    let fps = &city.footprints;
    let n = fps.len();
    let rects: Vec<AxisRect> = fps.iter().map(|f| axis_rect(&f.polygon.exterior)).collect();
    let cents: Vec<Point> = fps.iter().map(|f| fan_centroid(&f.polygon.exterior)).collect();
    let shapes: Vec<[f64; 8]> = fps.iter().map(|f| shape_oracle(&f.polygon.exterior)).collect();
    let shared: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| rect_shared_wall(&rects[i], &rects[j], 1e-6)).sum()).collect();

    let grid = Grid::new(&city.xs, &city.ys);
    let bc = grid.betweenness();
    let inter: Vec<usize> = (0..grid.nodes.len()).filter(|&v| grid.degree[v] >= 3).collect();
    let seg_d = |p: Point, e: usize| dist_to_axis_segment(p, grid.nodes[grid.edges[e].0], grid.nodes[grid.edges[e].1]);
    let nearest_edge: Vec<(usize, f64)> = cents.iter().map(|&c| unique_argmin((0..grid.edges.len()).map(|e| seg_d(c, e)), 1e-6, "edge")).collect();

    // Blocks are the grid cells.
    let k = city.xs.len() - 1;
    let mut blocks: Vec<Vec<Point>> = Vec::new();
    for j in 0..k {
        for i in 0..k {
            let (x0, x1, y0, y1) = (city.xs[i], city.xs[i + 1], city.ys[j], city.ys[j + 1]);
            blocks.push(vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]);
        }
    }
    let block_shape: Vec<[f64; 8]> = blocks.iter().map(|b| shape_oracle(b)).collect();
    let block_cent: Vec<Point> = blocks.iter().map(|b| fan_centroid(b)).collect();
    let inside = |c: Point, b: &[Point]| c.x > b[0].x && c.x < b[1].x && c.y > b[0].y && c.y < b[2].y;
    let block_of: Vec<usize> = cents.iter().map(|&c| (0..blocks.len()).find(|&b| inside(c, &blocks[b])).expect("building inside a block")).collect();

    let agg_names = ["area", "perimeter", "convexity", "circular_compactness", "orientation", "corner_count"];
    let agg_idx = [0, 1, 3, 2, 4, 5];
    let shape_names = ["area", "perimeter", "circular_compactness", "convexity", "orientation", "corner_count", "longest_axis_length", "equivalent_rectangular_index"];

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = BTreeMap::new();
        let mut put = |name: String, v: f64| {
            assert!(m.insert(name.clone(), v).is_none(), "duplicate {name}");
        };
        for (s, name) in shape_names.iter().enumerate() {
            put(format!("bldg_{name}"), shapes[i][s]);
        }
        put("bldg_shared_wall_length".into(), shared[i]);
        for &r in buffers {
            let r = r as f64;
            let nb: Vec<usize> = (0..n).filter(|&j| j != i && cents[i].dist(cents[j]) <= r).collect();
            for (name, &s) in agg_names.iter().zip(&agg_idx) {
                let t = tms(&nb.iter().map(|&j| shapes[j][s]).collect::<Vec<_>>());
                for (a, v) in ["total", "mean", "std"].iter().zip(t) {
                    put(format!("bldg_nbr_{name}_{a}_{r}m"), v);
                }
            }
        }

        let c = cents[i];
        let (e, d) = nearest_edge[i];
        let (na, nb_, len) = grid.edges[e];
        put("street_nearest_segment_length".into(), len);
        put("street_nearest_segment_width".into(), default_width);
        put("street_distance_to_nearest_segment".into(), d);
        put("street_nearest_segment_linearity".into(), grid.nodes[na].dist(grid.nodes[nb_]) / len);
        let (ki, di) = unique_argmin(inter.iter().map(|&v| grid.nodes[v].dist(c)), 1e-6, "intersection");
        put("street_distance_to_nearest_intersection".into(), di);
        put("street_nearest_intersection_degree".into(), grid.degree[inter[ki]] as f64);
        let (node, _) = unique_argmin(grid.nodes.iter().map(|p| p.dist(c)), 1e-6, "node");
        put("street_local_closeness".into(), grid.closeness(node, closeness_radius));
        put("street_betweenness".into(), bc[node]);
        put("street_buildings_on_nearest_segment".into(), nearest_edge.iter().filter(|(f, _)| *f == e).count() as f64);
        for &r in buffers {
            let rf = r as f64;
            let segs: Vec<f64> = (0..grid.edges.len()).filter(|&s| seg_d(c, s) <= rf).map(|s| grid.edges[s].2).collect();
            put(format!("street_segment_count_{r}m"), segs.len() as f64);
            for (a, v) in ["total", "mean", "std"].iter().zip(tms(&segs)) {
                put(format!("street_segment_length_{a}_{r}m"), v);
            }
            let ds: Vec<f64> = inter.iter().map(|&v| grid.nodes[v].dist(c)).filter(|&x| x <= rf).collect();
            put(format!("street_intersection_count_{r}m"), ds.len() as f64);
            for (a, v) in ["total", "mean", "std"].iter().zip(tms(&ds)) {
                put(format!("street_intersection_distance_{a}_{r}m"), v);
            }
            let nd: Vec<f64> = (0..n).filter(|&j| j != i && cents[j].dist(c) <= rf).map(|j| nearest_edge[j].1).collect();
            for (a, v) in ["total", "mean", "std"].iter().zip(tms(&nd)) {
                put(format!("street_nbr_distance_to_nearest_segment_{a}_{r}m"), v);
            }
        }

        let b = block_of[i];
        for (s, name) in [0, 1, 3, 2, 4, 5, 6, 7].iter().zip(["area", "perimeter", "convexity", "circular_compactness", "orientation", "corner_count", "longest_axis_length", "equivalent_rectangular_index"]) {
            put(format!("block_{name}"), block_shape[b][*s]);
        }
        let members: Vec<f64> = (0..n).filter(|&j| block_of[j] == b).map(|j| shapes[j][0]).collect();
        put("block_building_count".into(), members.len() as f64);
        for (a, v) in ["total", "mean", "std"].iter().zip(tms(&members)) {
            put(format!("block_building_area_{a}"), v);
        }
        for &r in buffers {
            let near: Vec<usize> = (0..blocks.len()).filter(|&q| block_cent[q].dist(c) <= r as f64).collect();
            put(format!("blocks_block_count_{r}m"), near.len() as f64);
            for (a, v) in ["total", "mean", "std"].iter().zip(tms(&near.iter().map(|&q| block_shape[q][0]).collect::<Vec<_>>())) {
                put(format!("blocks_area_{a}_{r}m"), v);
            }
        }
        if let Some(&r) = buffers.iter().max() {
            let near: Vec<f64> = (0..blocks.len()).filter(|&q| block_cent[q].dist(c) <= r as f64).map(|q| block_shape[q][5]).collect();
            let t = tms(&near);
            put(format!("blocks_corner_count_mean_{r}m"), t[1]);
            put(format!("blocks_corner_count_std_{r}m"), t[2]);
        }
        rows.push(m);
    }
    rows
}

/// Winding number of a closed ring around `p`; non-zero means inside.
pub fn winding_number(p: Point, ring: &[Point]) -> i32 {
    let r = open(ring);
    let mut w = 0;
    for i in 0..r.len() {
        let (a, b) = (r[i], r[(i + 1) % r.len()]);
        if a.y <= p.y {
            if b.y > p.y && cross(a, b, p) > 0.0 {
                w += 1;
            }
        } else if b.y <= p.y && cross(a, b, p) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Parameter along the ray `o + t*d` where it meets segment `a-b`, by Cramer's rule.
pub fn ray_segment(o: Point, d: Point, a: Point, b: Point) -> Option<f64> {
    let e = Point::new(b.x - a.x, b.y - a.y);
    let det = d.x * (-e.y) - d.y * (-e.x);
    if det.abs() < 1e-15 {
        return None;
    }
    let rx = a.x - o.x;
    let ry = a.y - o.y;
    let t = (rx * (-e.y) - ry * (-e.x)) / det;
    let s = (d.x * ry - d.y * rx) / det;
    if (0.0..=1.0).contains(&s) {
        Some(t)
    } else {
        None
    }
}

/// Exhaustive minimum within-cluster sum of squares over every split into two non-empty groups.
pub fn exhaustive_two_partition(v: &[f64]) -> f64 {
    let n = v.len();
    let sse = |g: &[f64]| {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let (a, b): (Vec<f64>, Vec<f64>) = (0..n).map(|i| (mask >> i & 1 == 1, v[i])).fold((vec![], vec![]), |(mut a, mut b), (s, x)| {
            if s {
                a.push(x)
            } else {
                b.push(x)
            }
            (a, b)
        });
        best = best.min(sse(&a) + sse(&b));
    }
    best
}

/// Least squares with intercept by Gaussian elimination on the normal equations.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let m = x[0].len() + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, &t) in x.iter().zip(y) {
        let z: Vec<f64> = row.iter().copied().chain([1.0]).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += z[i] * z[j];
            }
            a[i][m] += z[i] * t;
        }
    }
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let sol: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    (sol[..m - 1].to_vec(), sol[m - 1])
}

/// Signed volume of a closed triangulated surface (sum of origin tetrahedra).
pub fn mesh_volume(v: &[[f64; 3]], tris: &[[usize; 3]]) -> f64 {
    tris.iter()
        .map(|&[a, b, c]| {
            let (p, q, r) = (v[a], v[b], v[c]);
            (p[0] * (q[1] * r[2] - q[2] * r[1]) - p[1] * (q[0] * r[2] - q[2] * r[0]) + p[2] * (q[0] * r[1] - q[1] * r[0])) / 6.0
        })
        .sum()
}

/// Signed volume of a solid given as planar polygon faces with holes, fanned per ring.
pub fn polygon_solid_volume(v: &[[f64; 3]], faces: &[Vec<Vec<usize>>]) -> f64 {
    let mut tris = Vec::new();
    for face in faces {
        for ring in face {
            // Fan triangles per ring around a common apex cancel on the face plane, so holes
            // (opposite winding) subtract correctly.
            for k in 1..ring.len() - 1 {
                tris.push([ring[0], ring[k], ring[k + 1]]);
            }
        }
    }
    mesh_volume(v, &tris)
}

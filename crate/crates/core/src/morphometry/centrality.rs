//! Length-weighted node centralities on the street graph.

use crate::streets::StreetNetwork;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Relative tolerance for treating two path lengths as equal.
pub const PATH_TOLERANCE: f64 = 1e-9;

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Simple weighted graph: parallel edges collapsed to their shortest length, self loops dropped.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    pub fn from_network(net: &StreetNetwork) -> Self {
        let n = net.nodes.len();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for e in &net.edges {
            if e.from == e.to {
                continue;
            }
            for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                match adj[a].iter_mut().find(|(v, _)| *v == b) {
                    Some(slot) => slot.1 = slot.1.min(e.length),
                    None => adj[a].push((b, e.length)),
                }
            }
        }
        for list in &mut adj {
            list.sort_by(|x, y| x.0.cmp(&y.0));
        }
        WeightedGraph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    d: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.d.total_cmp(&self.d).then(o.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest-path distances from `src`, stopping beyond `limit`. Unreached nodes are infinite.
pub fn dijkstra(g: &WeightedGraph, src: usize, limit: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry { d: 0.0, node: src });
    while let Some(Entry { d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(w, len) in &g.adj[node] {
            let nd = d + len;
            if nd <= limit && nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry { d: nd, node: w });
            }
        }
    }
    dist
}

/// Single-source stage of Brandes: dependency of every node on paths from `s`.
fn brandes_source(g: &WeightedGraph, s: usize) -> Vec<f64> {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    sigma[s] = 1.0;
    heap.push(Entry { d: 0.0, node: s });
    while let Some(Entry { d, node: v }) = heap.pop() {
        if settled[v] || d > dist[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, len) in &g.adj[v] {
            if settled[w] {
                continue;
            }
            let nd = d + len;
            if dist[w].is_finite() && same_length(nd, dist[w]) {
                sigma[w] += sigma[v];
                preds[w].push(v);
            } else if nd < dist[w] {
                dist[w] = nd;
                sigma[w] = sigma[v];
                preds[w] = vec![v];
                heap.push(Entry { d: nd, node: w });
            }
        }
    }
    let mut delta = vec![0f64; n];
    for &w in order.iter().rev() {
        for &v in &preds[w] {
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
    }
    delta[s] = 0.0;
    delta
}

const CHUNK: usize = 32;

/// Normalized betweenness: pair dependencies summed over ordered pairs, divided by (n-1)(n-2).
pub fn betweenness(g: &WeightedGraph) -> Vec<f64> {
    let n = g.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let sources: Vec<usize> = (0..n).collect();
    // Fixed chunks reduced in order keep the floating point sum reproducible.
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0f64; n];
            for &s in chunk {
                for (a, d) in acc.iter_mut().zip(brandes_source(g, s)) {
                    *a += d;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0f64; n];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let scale = ((n - 1) * (n - 2)) as f64;
    total.into_iter().map(|v| v / scale).collect()
}

/// Closeness of `v` over nodes within network distance `radius`: reached count over summed distance.
pub fn local_closeness(g: &WeightedGraph, v: usize, radius: f64) -> f64 {
    let dist = dijkstra(g, v, radius);
    let (mut k, mut sum) = (0usize, 0.0);
    for (u, &d) in dist.iter().enumerate() {
        if u != v && d.is_finite() {
            k += 1;
            sum += d;
        }
    }
    if k == 0 || sum <= 0.0 {
        0.0
    } else {
        k as f64 / sum
    }
}

pub fn all_local_closeness(g: &WeightedGraph, radius: f64) -> Vec<f64> {
    (0..g.len()).into_par_iter().map(|v| local_closeness(g, v, radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
        let mut adj = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        WeightedGraph { adj }
    }

    #[test]
    fn path_middle_has_full_betweenness() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(betweenness(&g), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn square_splits_paths() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]);
        // Each node lies on one of two shortest paths between its two neighbours.
        for b in betweenness(&g) {
            assert!((b - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closeness_respects_radius() {
        let g = graph(3, &[(0, 1, 100.0), (1, 2, 500.0)]);
        assert!((local_closeness(&g, 0, 400.0) - 1.0 / 100.0).abs() < 1e-15);
        assert!((local_closeness(&g, 0, 1000.0) - 2.0 / 700.0).abs() < 1e-15);
        let lone = graph(1, &[]);
        assert_eq!(local_closeness(&lone, 0, 400.0), 0.0);
    }
}

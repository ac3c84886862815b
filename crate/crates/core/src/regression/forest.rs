//! Random forest of CART regression trees.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features tried per split; `None` means a third of them.
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 1000, max_depth: None, min_leaf: 1, feature_subsample: None, bootstrap: true, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Best variance-reducing split of `rows` on one feature: `(score, threshold)` where a higher
/// score means lower child squared error.
pub fn best_split_on(x: &[Vec<f64>], y: &[f64], rows: &[usize], feature: usize, min_leaf: usize) -> Option<(f64, f64)> {
    let mut order: Vec<usize> = rows.to_vec();
    order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
    let n = order.len();
    let total: f64 = order.iter().map(|&i| y[i]).sum();
    let mut left = 0.0;
    let mut best: Option<(f64, f64)> = None;
    for k in 1..n {
        left += y[order[k - 1]];
        let (lo, hi) = (x[order[k - 1]][feature], x[order[k]][feature]);
        if lo == hi || k < min_leaf || n - k < min_leaf {
            continue;
        }
        let right = total - left;
        let score = left * left / k as f64 + right * right / (n - k) as f64;
        if best.is_none_or(|(s, _)| score > s) {
            let mut t = lo + (hi - lo) / 2.0;
            if t >= hi {
                t = lo;
            }
            best = Some((score, t));
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    p: &'a ForestParams,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = rows.iter().map(|&i| self.y[i]).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf(mean));
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&i| self.y[i] == first);
        if pure || rows.len() < 2 * self.p.min_leaf || self.p.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let m = self.x[0].len();
        let mut feats = sample(&mut self.rng, m, self.mtry).into_vec();
        feats.sort_unstable();
        let mut best: Option<(f64, usize, f64)> = None;
        for f in feats {
            if let Some((s, t)) = best_split_on(self.x, self.y, &rows, f, self.p.min_leaf) {
                if best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, f, t));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

pub fn fit_tree(x: &[Vec<f64>], y: &[f64], p: &ForestParams, tree_index: u64) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(tree_index);
    let n = y.len();
    let rows: Vec<usize> = if p.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
    let m = x[0].len();
    let mtry = p.feature_subsample.unwrap_or((m / 3).max(1)).clamp(1, m.max(1));
    let mut g = Grower { x, y, p, mtry, rng, nodes: Vec::new() };
    g.grow(rows, 0);
    Tree { nodes: g.nodes }
}

/// Trees are grown in parallel; each draws from its own stream of the seed, so the result does
/// not depend on scheduling.
pub fn fit(x: &[Vec<f64>], y: &[f64], p: &ForestParams) -> Forest {
    let trees = (0..p.n_trees as u64).into_par_iter().map(|t| fit_tree(x, y, p, t)).collect();
    Forest { trees }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tree_takes_best_split() {
        let x = vec![vec![0.0, 5.0], vec![1.0, 4.0], vec![2.0, 7.0], vec![3.0, 6.0]];
        let y = vec![1.0, 1.2, 9.0, 9.4];
        let p = ForestParams { n_trees: 1, bootstrap: false, feature_subsample: Some(2), ..Default::default() };
        let t = fit_tree(&x, &y, &p, 0);
        match t.nodes[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((feature, threshold), (0, 1.5)),
            _ => panic!("root should split"),
        }
        for (r, v) in x.iter().zip(&y) {
            assert_eq!(t.predict(r), *v);
        }
    }

    #[test]
    fn identical_trees_average_to_one() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * 0.5 + r[1]).collect();
        let p = ForestParams { n_trees: 5, bootstrap: false, feature_subsample: Some(2), ..Default::default() };
        let f = fit(&x, &y, &p);
        let probe = [12.5, 3.0];
        assert_eq!(f.predict(&probe), f.trees[0].predict(&probe));
        assert_eq!(fit(&x, &y, &p), f);
    }

    #[test]
    fn constant_target() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let f = fit(&x, &[7.0; 10], &ForestParams { n_trees: 10, ..Default::default() });
        assert!(x.iter().all(|r| f.predict(r) == 7.0));
    }
}

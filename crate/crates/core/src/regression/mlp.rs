//! Fully connected ReLU network trained by mini-batch gradient descent on MSE.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenseParams {
    pub layers: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for DenseParams {
    fn default() -> Self {
        DenseParams { layers: vec![128, 64, 32], learning_rate: 0.01, epochs: 100, batch: 32, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row-major `out × in`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub n_in: usize,
    pub n_out: usize,
}

impl Layer {
    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.b[o] + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
    /// The network predicts `(y - y_mean) / y_scale`.
    pub y_mean: f64,
    pub y_scale: f64,
}

impl DenseNet {
    /// Activations of every layer, input first.
    fn activations(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![z.to_vec()];
        let mut buf = Vec::new();
        for (k, l) in self.layers.iter().enumerate() {
            l.forward(acts.last().unwrap(), &mut buf);
            if k + 1 < self.layers.len() {
                buf.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(buf.clone());
        }
        acts
    }

    pub fn predict_row(&self, z: &[f64]) -> f64 {
        self.y_mean + self.y_scale * self.activations(z).last().unwrap()[0]
    }
}

pub fn fit(x: &[Vec<f64>], y: &[f64], p: &DenseParams) -> DenseNet {
    let n = y.len();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sd = (y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64).sqrt();
    let y_scale = if sd > 0.0 { sd } else { 1.0 };
    let target: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

    let mut sizes = vec![x[0].len()];
    sizes.extend(&p.layers);
    sizes.push(1);
    let last = sizes.len() - 2;
    let layers = (0..sizes.len() - 1)
        .map(|k| {
            let (n_in, n_out) = (sizes[k], sizes[k + 1]);
            // He initialisation; the output layer starts at zero so the net starts at the mean.
            let w = if k == last {
                vec![0.0; n_in * n_out]
            } else {
                let d = Normal::new(0.0, (2.0 / n_in.max(1) as f64).sqrt()).expect("valid normal");
                (0..n_in * n_out).map(|_| d.sample(&mut rng)).collect()
            };
            Layer { w, b: vec![0.0; n_out], n_in, n_out }
        })
        .collect();
    let mut net = DenseNet { layers, y_mean, y_scale };

    let mut order: Vec<usize> = (0..n).collect();
    let batch = p.batch.max(1);
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut gw: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect();
            let mut gb: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect();
            for &i in chunk {
                let acts = net.activations(&x[i]);
                let out = acts.last().unwrap()[0];
                let mut delta = vec![2.0 * (out - target[i])];
                for k in (0..net.layers.len()).rev() {
                    let l = &net.layers[k];
                    let input = &acts[k];
                    for o in 0..l.n_out {
                        gb[k][o] += delta[o];
                        let row = &mut gw[k][o * l.n_in..(o + 1) * l.n_in];
                        for (g, v) in row.iter_mut().zip(input) {
                            *g += delta[o] * v;
                        }
                    }
                    if k > 0 {
                        let mut prev = vec![0.0; l.n_in];
                        for o in 0..l.n_out {
                            let row = &l.w[o * l.n_in..(o + 1) * l.n_in];
                            for (pv, wv) in prev.iter_mut().zip(row) {
                                *pv += delta[o] * wv;
                            }
                        }
                        for (pv, a) in prev.iter_mut().zip(input) {
                            if *a <= 0.0 {
                                *pv = 0.0;
                            }
                        }
                        delta = prev;
                    }
                }
            }
            let scale = p.learning_rate / chunk.len() as f64;
            for (k, l) in net.layers.iter_mut().enumerate() {
                for (w, g) in l.w.iter_mut().zip(&gw[k]) {
                    *w -= scale * g;
                }
                for (b, g) in l.b.iter_mut().zip(&gb[k]) {
                    *b -= scale * g;
                }
            }
        }
    }
    net
}

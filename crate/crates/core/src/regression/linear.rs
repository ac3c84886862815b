//! Linear model fitted by full-batch gradient descent.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Mse,
    Mae,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub loss: Loss,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams { learning_rate: 0.1, epochs: 5000, loss: Loss::Mse }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Weights on standardized features.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Loss after each epoch.
    pub loss_trace: Vec<f64>,
}

impl LinearModel {
    pub fn predict_row(&self, z: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(z).map(|(w, v)| w * v).sum::<f64>()
    }
}

fn loss_of(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, loss: Loss) -> f64 {
    let n = y.len() as f64;
    let mut s = 0.0;
    for (row, t) in x.iter().zip(y) {
        let r = b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>() - t;
        s += match loss {
            Loss::Mse => r * r,
            Loss::Mae => r.abs(),
        };
    }
    s / n
}

/// Gradient descent from zero weights and mean bias. A step that would raise the loss is
/// rejected and the learning rate halved, so the trace never increases.
pub fn fit(x: &[Vec<f64>], y: &[f64], p: &LinearParams) -> LinearModel {
    let n = y.len() as f64;
    let m = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; m];
    let mut b = y.iter().sum::<f64>() / n;
    let mut lr = p.learning_rate;
    let mut current = loss_of(x, y, &w, b, p.loss);
    let mut trace = Vec::with_capacity(p.epochs);
    for _ in 0..p.epochs {
        let mut gw = vec![0.0; m];
        let mut gb = 0.0;
        for (row, t) in x.iter().zip(y) {
            let r = b + w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>() - t;
            let g = match p.loss {
                Loss::Mse => 2.0 * r,
                Loss::Mae => r.signum() * (r != 0.0) as i32 as f64,
            };
            gb += g;
            for (gj, v) in gw.iter_mut().zip(row) {
                *gj += g * v;
            }
        }
        gb /= n;
        gw.iter_mut().for_each(|g| *g /= n);
        while lr > 1e-15 {
            let cw: Vec<f64> = w.iter().zip(&gw).map(|(a, g)| a - lr * g).collect();
            let cb = b - lr * gb;
            let l = loss_of(x, y, &cw, cb, p.loss);
            if l <= current {
                w = cw;
                b = cb;
                current = l;
                break;
            }
            lr *= 0.5;
        }
        trace.push(current);
    }
    LinearModel { weights: w, bias: b, loss_trace: trace }
}

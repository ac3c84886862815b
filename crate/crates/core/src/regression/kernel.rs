//! RBF kernel regression: closed-form kernel ridge or epsilon-SVR trained by SMO.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSolver {
    KernelRidgeClosedForm,
    SvrSmo { epsilon: f64, c: f64 },
}

impl KernelSolver {
    pub fn label(&self) -> &'static str {
        match self {
            KernelSolver::KernelRidgeClosedForm => "kernel_ridge_closed_form",
            KernelSolver::SvrSmo { .. } => "svr_smo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    /// `None` uses one over the feature count.
    pub gamma: Option<f64>,
    pub regularization: f64,
    pub solver: KernelSolver,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { gamma: None, regularization: 1.0, solver: KernelSolver::KernelRidgeClosedForm }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub gamma: f64,
    pub dual: Vec<f64>,
    pub bias: f64,
    /// Standardized training inputs with non-zero dual weight.
    pub support: Vec<Vec<f64>>,
    pub solver: KernelSolver,
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

impl KernelModel {
    pub fn predict_row(&self, z: &[f64]) -> f64 {
        self.bias + self.support.iter().zip(&self.dual).map(|(s, a)| a * rbf(s, z, self.gamma)).sum::<f64>()
    }
}

fn gram(x: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rbf(&x[i], &x[j], gamma);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub fn fit(x: &[Vec<f64>], y: &[f64], p: &KernelParams) -> Result<KernelModel> {
    let m = x.first().map_or(0, Vec::len);
    let gamma = p.gamma.unwrap_or(1.0 / m.max(1) as f64);
    let k = gram(x, gamma);
    let (dual, bias) = match p.solver {
        KernelSolver::KernelRidgeClosedForm => kernel_ridge(&k, y, p.regularization)?,
        KernelSolver::SvrSmo { epsilon, c } => svr_smo(&k, y, epsilon, c),
    };
    let keep: Vec<usize> = (0..dual.len()).filter(|&i| dual[i] != 0.0).collect();
    Ok(KernelModel {
        gamma,
        dual: keep.iter().map(|&i| dual[i]).collect(),
        bias,
        support: keep.iter().map(|&i| x[i].clone()).collect(),
        solver: p.solver,
    })
}

/// Solve `(K + λI) α = y - ȳ` and predict `ȳ + k(x)ᵀα`.
fn kernel_ridge(k: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let a = k + DMatrix::identity(n, n) * lambda;
    let chol = a.cholesky().ok_or_else(|| Error::Training("kernel system is not positive definite".into()))?;
    let alpha = chol.solve(&DVector::from_iterator(n, y.iter().map(|v| v - mean)));
    Ok((alpha.iter().copied().collect(), mean))
}

const TAU: f64 = 1e-12;
const SMO_TOL: f64 = 1e-3;

/// Epsilon-SVR dual over 2n variables with second-order working set selection.
fn svr_smo(k: &DMatrix<f64>, y: &[f64], eps: f64, c: f64) -> (Vec<f64>, f64) {
    let n = y.len();
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let idx = |t: usize| t % n;
    let q = |s: usize, t: usize| sign(s) * sign(t) * k[(idx(s), idx(t))];
    let p: Vec<f64> = (0..l).map(|t| if t < n { eps - y[t] } else { eps + y[t - n] }).collect();
    let mut beta = vec![0.0; l];
    let mut grad = p.clone();
    let max_iter = 10_000_000usize.min(100 * l * l.max(100));

    for _ in 0..max_iter {
        // Select i maximizing -y_i ∇_i among I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let up = if sign(t) > 0.0 { beta[t] < c } else { beta[t] > 0.0 };
            if up && -sign(t) * grad[t] >= gmax {
                gmax = -sign(t) * grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let mut gmin = f64::INFINITY;
        let mut best_obj = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..l {
            let low = if sign(t) > 0.0 { beta[t] > 0.0 } else { beta[t] < c };
            if !low {
                continue;
            }
            let v = -sign(t) * grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let a = (q(i, i) + q(t, t) - 2.0 * sign(i) * sign(t) * q(i, t)).max(TAU);
                let obj = -b * b / a;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax - gmin < SMO_TOL {
            break;
        }
        let Some(j) = j_sel else { break };

        let (yi, yj) = (sign(i), sign(j));
        let (oi, oj) = (beta[i], beta[j]);
        if yi != yj {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = oi - oj;
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = oi + oj;
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - oi, beta[j] - oj);
        for t in 0..l {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias from free variables, else the midpoint of the feasible interval.
    let (mut ub, mut lb, mut sum, mut nfree) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if beta[t] >= c {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nfree += 1;
            sum += yg;
        }
    }
    let rho = if nfree > 0 { sum / nfree as f64 } else { (ub + lb) / 2.0 };
    let dual = (0..n).map(|i| beta[i] - beta[i + n]).collect();
    (dual, -rho)
}

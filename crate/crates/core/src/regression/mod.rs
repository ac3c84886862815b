//! Height regressors over the feature matrix, label mixing and evaluation.

pub mod dataset;
pub mod experiment;
pub mod forest;
pub mod kernel;
pub mod linear;
pub mod metrics;
pub mod mlp;
pub mod standardize;

pub use dataset::{assemble_training_set, split, LabeledDataset, TrainingMix};
pub use metrics::{evaluate, Metrics};
pub use standardize::Standardizer;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Predictions never go below one residential storey.
pub const MIN_HEIGHT_M: f64 = 2.5;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LinearGd(linear::LinearParams),
    RandomForest(forest::ForestParams),
    KernelRbf(kernel::KernelParams),
    DenseNet(mlp::DenseParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::LinearGd(_) => "linear_gd",
            ModelKind::RandomForest(_) => "random_forest",
            ModelKind::KernelRbf(_) => "kernel_rbf",
            ModelKind::DenseNet(_) => "dense_net",
        }
    }

    /// Kind with default hyperparameters, by name.
    pub fn from_name(name: &str) -> Result<ModelKind> {
        Ok(match name {
            "linear_gd" => ModelKind::LinearGd(Default::default()),
            "random_forest" => ModelKind::RandomForest(Default::default()),
            "kernel_rbf" => ModelKind::KernelRbf(Default::default()),
            "dense_net" => ModelKind::DenseNet(Default::default()),
            other => return Err(Error::Input(format!("unknown model kind `{other}`"))),
        })
    }

    pub fn solver(&self) -> &'static str {
        match self {
            ModelKind::LinearGd(_) => "gradient_descent",
            ModelKind::RandomForest(_) => "cart",
            ModelKind::KernelRbf(p) => p.solver.label(),
            ModelKind::DenseNet(_) => "minibatch_sgd",
        }
    }

    /// Same kind with its random seed replaced, where it has one.
    pub fn with_seed(&self, seed: u64) -> ModelKind {
        let mut k = self.clone();
        match &mut k {
            ModelKind::RandomForest(p) => p.seed = seed,
            ModelKind::DenseNet(p) => p.seed = seed,
            _ => {}
        }
        k
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Training(format!("{} needs positive {what}", self.name())));
        match self {
            ModelKind::LinearGd(p) if !(p.learning_rate > 0.0) => bad("learning_rate"),
            ModelKind::RandomForest(p) if p.n_trees == 0 || p.min_leaf == 0 || p.feature_subsample == Some(0) => bad("n_trees, min_leaf and feature_subsample"),
            ModelKind::KernelRbf(p) if !(p.regularization > 0.0) || p.gamma.is_some_and(|g| !(g > 0.0)) => bad("gamma and regularization"),
            ModelKind::KernelRbf(kernel::KernelParams { solver: kernel::KernelSolver::SvrSmo { epsilon, c }, .. }) if !(*epsilon >= 0.0 && *c > 0.0) => {
                bad("C")
            }
            ModelKind::DenseNet(p) if !(p.learning_rate > 0.0) || p.batch == 0 || p.layers.contains(&0) => bad("learning_rate, batch and layer widths"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Params {
    Linear(linear::LinearModel),
    Forest(forest::Forest),
    Kernel(kernel::KernelModel),
    Dense(mlp::DenseNet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    pub manifest_hash: String,
    pub standardizer: Standardizer,
    pub params: Params,
}

pub fn train(kind: &ModelKind, d: &LabeledDataset) -> Result<TrainedModel> {
    kind.validate()?;
    d.validate()?;
    if d.len() < 2 {
        return Err(Error::Training(format!("need at least 2 rows, got {}", d.len())));
    }
    if d.x.iter().all(|r| r == &d.x[0]) && d.y.iter().all(|v| *v == d.y[0]) {
        return Err(Error::Training("all training rows are identical".into()));
    }
    let standardizer = Standardizer::fit(&d.x);
    let z = standardizer.transform(&d.x);
    let params = match kind {
        ModelKind::LinearGd(p) => Params::Linear(linear::fit(&z, &d.y, p)),
        ModelKind::RandomForest(p) => Params::Forest(forest::fit(&z, &d.y, p)),
        ModelKind::KernelRbf(p) => Params::Kernel(kernel::fit(&z, &d.y, p)?),
        ModelKind::DenseNet(p) => Params::Dense(mlp::fit(&z, &d.y, p)),
    };
    Ok(TrainedModel { format_version: MODEL_FORMAT_VERSION, kind: kind.clone(), manifest_hash: d.manifest_hash.clone(), standardizer, params })
}

impl TrainedModel {
    /// Raw model output for one feature row, before clipping.
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.transform_row(row);
        match &self.params {
            Params::Linear(m) => m.predict_row(&z),
            Params::Forest(f) => f.predict(&z),
            Params::Kernel(k) => k.predict_row(&z),
            Params::Dense(n) => n.predict_row(&z),
        }
    }

    /// Heights in metres for rows built under the manifest with hash `manifest_hash`.
    pub fn predict(&self, x: &[Vec<f64>], manifest_hash: &str) -> Result<Vec<f64>> {
        if manifest_hash != self.manifest_hash {
            return Err(Error::Contract(format!("model trained on manifest {} but features use {}", self.manifest_hash, manifest_hash)));
        }
        let width = self.standardizer.mean.len();
        x.iter()
            .map(|r| {
                if r.len() != width {
                    return Err(Error::Contract(format!("row has {} features, model expects {width}", r.len())));
                }
                let h = self.predict_raw(r);
                if h.is_finite() {
                    Ok(h.max(MIN_HEIGHT_M))
                } else {
                    Err(Error::Evaluation("model produced a non-finite prediction".into()))
                }
            })
            .collect()
    }

    /// Linear coefficients and intercept in original feature units.
    pub fn linear_coefficients(&self) -> Option<(Vec<f64>, f64)> {
        let Params::Linear(m) = &self.params else { return None };
        let s = &self.standardizer;
        let mut bias = m.bias;
        let coef = m
            .weights
            .iter()
            .zip(s.mean.iter().zip(&s.std))
            .map(|(w, (mu, sd))| {
                if *sd == 0.0 {
                    0.0
                } else {
                    bias -= w * mu / sd;
                    w / sd
                }
            })
            .collect();
        Some((coef, bias))
    }

    /// `.json` writes versioned JSON, anything else a binary dump.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = if is_json(path) {
            let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Export(e.to_string()))?;
            s.push('\n');
            s.into_bytes()
        } else {
            bincode::serialize(self).map_err(|e| Error::Export(e.to_string()))?
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let m: TrainedModel = if is_json(path) {
            serde_json::from_slice(&bytes).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        } else {
            bincode::deserialize(&bytes).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
        };
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Contract(format!("model format {} is not supported", m.format_version)));
        }
        Ok(m)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floors::LabelSource;

    fn line_data() -> LabeledDataset {
        let mut d = LabeledDataset::empty("m");
        for i in 0..30 {
            let x = i as f64 / 3.0;
            d.push(format!("b{i}"), vec![x, (i % 4) as f64], 3.0 * x + 1.0 + 2.5, LabelSource::Raw);
        }
        d
    }

    #[test]
    fn zero_weights_predict_bias_and_clip() {
        let m = TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            kind: ModelKind::from_name("linear_gd").unwrap(),
            manifest_hash: "m".into(),
            standardizer: Standardizer { mean: vec![0.0; 2], std: vec![1.0; 2] },
            params: Params::Linear(linear::LinearModel { weights: vec![0.0, 0.0], bias: 10.0, loss_trace: vec![] }),
        };
        assert_eq!(m.predict(&[vec![5.0, 1.0], vec![-3.0, 2.0]], "m").unwrap(), vec![10.0, 10.0]);
        let low = TrainedModel { params: Params::Linear(linear::LinearModel { weights: vec![1.0, 0.0], bias: 0.0, loss_trace: vec![] }), ..m.clone() };
        assert_eq!(low.predict(&[vec![-100.0, 0.0]], "m").unwrap(), vec![2.5]);
        assert!(matches!(m.predict(&[vec![0.0, 0.0]], "other"), Err(Error::Contract(_))));
    }

    #[test]
    fn linear_coefficients_in_original_units() {
        let m = train(&ModelKind::from_name("linear_gd").unwrap(), &line_data()).unwrap();
        let (c, b) = m.linear_coefficients().unwrap();
        assert!((c[0] - 3.0).abs() < 1e-3 && c[1].abs() < 1e-3 && (b - 3.5).abs() < 1e-3, "{c:?} {b}");
    }

    #[test]
    fn every_kind_fits_a_constant() {
        let mut d = line_data();
        d.y.iter_mut().for_each(|v| *v = 7.0);
        for name in ["linear_gd", "random_forest", "kernel_rbf", "dense_net"] {
            let kind = match ModelKind::from_name(name).unwrap() {
                ModelKind::RandomForest(p) => ModelKind::RandomForest(forest::ForestParams { n_trees: 20, ..p }),
                ModelKind::DenseNet(p) => ModelKind::DenseNet(mlp::DenseParams { epochs: 5, ..p }),
                k => k,
            };
            let m = train(&kind, &d).unwrap();
            for p in m.predict(&d.x, "m").unwrap() {
                assert!((p - 7.0).abs() < 1e-6, "{name}: {p}");
            }
        }
    }

    #[test]
    fn degenerate_sets_are_rejected() {
        let mut d = LabeledDataset::empty("m");
        d.push("a".into(), vec![1.0], 3.0, LabelSource::Raw);
        assert!(matches!(train(&ModelKind::from_name("linear_gd").unwrap(), &d), Err(Error::Training(_))));
        d.push("b".into(), vec![1.0], 3.0, LabelSource::Raw);
        assert!(matches!(train(&ModelKind::from_name("linear_gd").unwrap(), &d), Err(Error::Training(_))));
    }

    #[test]
    fn save_and_load_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let kind = ModelKind::RandomForest(forest::ForestParams { n_trees: 3, ..Default::default() });
        let m = train(&kind, &line_data()).unwrap();
        for name in ["m.json", "m.bin"] {
            let p = dir.path().join(name);
            m.save(&p).unwrap();
            assert_eq!(TrainedModel::load(&p).unwrap(), m);
        }
    }
}

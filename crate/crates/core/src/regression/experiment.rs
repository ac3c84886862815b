//! Train every configured model on every training-set variant and score it on a held-out set.

use super::dataset::{assemble_training_set, split, LabeledDataset, TrainingMix};
use super::metrics::evaluate;
use super::{train, ModelKind};
use crate::error::{Error, Result};
use crate::floors::LabelSource;
use crate::morphometry::{FeatureMatrix, Level};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TrainingSet {
    Raw,
    Svi,
    Ssl,
}

impl TrainingSet {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrainingSet::Raw => "RAW",
            TrainingSet::Svi => "SVI",
            TrainingSet::Ssl => "SSL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub kinds: Vec<ModelKind>,
    pub sets: Vec<TrainingSet>,
    pub mix_a: f64,
    pub seeds: Vec<u64>,
    pub split_ratio: f64,
    /// Buildings held out for scoring; their reference heights come with the validation labels.
    pub validation_ids: Option<Vec<String>>,
    pub target_size: Option<usize>,
    /// Restrict features to these levels; empty keeps every column.
    pub feature_levels: Vec<Level>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kinds: vec![ModelKind::from_name("random_forest").expect("known kind")],
            sets: vec![TrainingSet::Raw, TrainingSet::Svi, TrainingSet::Ssl],
            mix_a: 0.5,
            seeds: vec![0],
            split_ratio: 0.7,
            validation_ids: None,
            target_size: None,
            feature_levels: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: String,
    pub set: TrainingSet,
    pub seed: u64,
    pub mae: f64,
    pub rmse: f64,
    pub r2: f64,
    pub n_train: usize,
    pub n_validation: usize,
    pub solver: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_validation: usize,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// Median MAE over seeds per `(kind, set)`.
    pub fn median_mae(&self) -> BTreeMap<(String, TrainingSet), f64> {
        let mut groups: BTreeMap<(String, TrainingSet), Vec<f64>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.kind.clone(), r.set)).or_default().push(r.mae);
        }
        groups
            .into_iter()
            .map(|(k, mut v)| {
                v.sort_by(f64::total_cmp);
                let n = v.len();
                let m = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
                (k, m)
            })
            .collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Export(format!("{}: {e}", path.display())))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Export(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("json") + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn feature_columns(matrix: &FeatureMatrix, levels: &[Level]) -> Option<Vec<usize>> {
    if levels.is_empty() {
        return None;
    }
    Some((0..matrix.manifest.len()).filter(|&c| levels.contains(&matrix.manifest.entries[c].level)).collect())
}

/// Run the configured grid.
///
/// With `validation` labels those buildings form the scoring set and are removed from the
/// training pools. Otherwise the RAW pool is split by `split_ratio` per seed and the held-out
/// part is scored.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    matrix: &FeatureMatrix,
    raw: &[(String, f64)],
    pseudo: &[(String, f64)],
    validation: Option<&[(String, f64)]>,
) -> Result<ExperimentReport> {
    let raw_all = LabeledDataset::from_labels(matrix, raw, LabelSource::Raw)?;
    let pseudo_all = LabeledDataset::from_labels(matrix, pseudo, LabelSource::Svi)?;
    let fixed_val = match validation {
        Some(v) => {
            let v: Vec<(String, f64)> = match &cfg.validation_ids {
                Some(ids) => {
                    let keep: HashSet<&str> = ids.iter().map(String::as_str).collect();
                    v.iter().filter(|(id, _)| keep.contains(id.as_str())).cloned().collect()
                }
                None => v.to_vec(),
            };
            Some(LabeledDataset::from_labels(matrix, &v, LabelSource::Raw)?)
        }
        None => None,
    };
    let cols = feature_columns(matrix, &cfg.feature_levels);
    let project = |d: LabeledDataset| match &cols {
        Some(c) => {
            let hash = format!("{}:{:?}", d.manifest_hash, cfg.feature_levels);
            d.select_features(c, hash)
        }
        None => d,
    };

    let mut rows = Vec::new();
    let mut n_validation = 0;
    for &seed in &cfg.seeds {
        let (raw_pool, val) = match &fixed_val {
            Some(v) => {
                let held: HashSet<&str> = v.building_ids.iter().map(String::as_str).collect();
                let keep: Vec<usize> = (0..raw_all.len()).filter(|&i| !held.contains(raw_all.building_ids[i].as_str())).collect();
                (raw_all.subset(&keep), v.clone())
            }
            None => split(&raw_all, cfg.split_ratio, seed),
        };
        let held: HashSet<&str> = val.building_ids.iter().map(String::as_str).collect();
        let keep: Vec<usize> = (0..pseudo_all.len()).filter(|&i| !held.contains(pseudo_all.building_ids[i].as_str())).collect();
        let pseudo_pool = pseudo_all.subset(&keep);
        let val = project(val);
        n_validation = val.len();

        for &set in &cfg.sets {
            let a = match set {
                TrainingSet::Raw => 0.0,
                TrainingSet::Svi => 1.0,
                TrainingSet::Ssl => cfg.mix_a,
            };
            let train_set = project(assemble_training_set(&raw_pool, &pseudo_pool, TrainingMix::new(a, seed)?, cfg.target_size)?);
            for kind in &cfg.kinds {
                let model = train(&kind.with_seed(seed), &train_set)?;
                let pred = model.predict(&val.x, &val.manifest_hash)?;
                let m = evaluate(&pred, &val.y)?;
                log::info!("{} {} seed {seed}: mae {:.3} rmse {:.3} r2 {:.3}", kind.name(), set.as_str(), m.mae, m.rmse, m.r2);
                rows.push(ReportRow {
                    kind: kind.name().to_string(),
                    set,
                    seed,
                    mae: m.mae,
                    rmse: m.rmse,
                    r2: m.r2,
                    n_train: train_set.len(),
                    n_validation: val.len(),
                    solver: kind.solver().to_string(),
                });
            }
        }
    }
    Ok(ExperimentReport { n_validation, rows })
}

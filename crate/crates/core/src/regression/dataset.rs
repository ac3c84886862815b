//! Labelled rows, label mixing and train/test splitting.

use crate::error::{Error, Result};
use crate::floors::LabelSource;
use crate::morphometry::FeatureMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub building_ids: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub source: Vec<LabelSource>,
    pub manifest_hash: String,
}

impl LabeledDataset {
    pub fn empty(manifest_hash: impl Into<String>) -> Self {
        LabeledDataset { building_ids: Vec::new(), x: Vec::new(), y: Vec::new(), source: Vec::new(), manifest_hash: manifest_hash.into() }
    }

    /// Join `(building_id, height)` labels with feature rows.
    pub fn from_labels(matrix: &FeatureMatrix, labels: &[(String, f64)], source: LabelSource) -> Result<Self> {
        let rows: HashMap<&str, usize> = matrix.building_ids.iter().enumerate().map(|(i, b)| (b.as_str(), i)).collect();
        let mut d = LabeledDataset::empty(matrix.manifest_hash.clone());
        for (id, h) in labels {
            let &r = rows.get(id.as_str()).ok_or_else(|| Error::Input(format!("label for unknown building {id}")))?;
            d.push(id.clone(), matrix.values[r].clone(), *h, source);
        }
        d.validate()?;
        Ok(d)
    }

    pub fn push(&mut self, id: String, x: Vec<f64>, y: f64, source: LabelSource) {
        self.building_ids.push(id);
        self.x.push(x);
        self.y.push(y);
        self.source.push(source);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if self.x.len() != n || self.source.len() != n || self.building_ids.len() != n {
            return Err(Error::Contract("dataset columns have different lengths".into()));
        }
        if let Some(i) = self.y.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Input(format!("building {} has non-positive height {}", self.building_ids[i], self.y[i])));
        }
        Ok(())
    }

    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            building_ids: rows.iter().map(|&i| self.building_ids[i].clone()).collect(),
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            source: rows.iter().map(|&i| self.source[i]).collect(),
            manifest_hash: self.manifest_hash.clone(),
        }
    }

    /// Keep only the given feature columns.
    pub fn select_features(&self, cols: &[usize], manifest_hash: impl Into<String>) -> LabeledDataset {
        LabeledDataset {
            x: self.x.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect(),
            manifest_hash: manifest_hash.into(),
            ..self.clone()
        }
    }
}

/// Share of pseudo-labelled rows in a training set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMix {
    pub a: f64,
    pub seed: u64,
}

impl TrainingMix {
    pub fn new(a: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("mix ratio {a} outside [0, 1]")));
        }
        Ok(TrainingMix { a, seed })
    }

    /// `(raw rows, pseudo rows)` for a set of `n` rows.
    pub fn counts(&self, n: usize) -> (usize, usize) {
        let svi = (self.a * n as f64).round() as usize;
        (n - svi.min(n), svi.min(n))
    }
}

fn pick(n_avail: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n_avail).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Compose a training set from RAW and pseudo-labelled rows in proportion `mix.a`.
///
/// Without `target_size` the set is as large as availability allows. Buildings present in
/// both inputs keep only their RAW row.
pub fn assemble_training_set(raw: &LabeledDataset, pseudo: &LabeledDataset, mix: TrainingMix, target_size: Option<usize>) -> Result<LabeledDataset> {
    if raw.manifest_hash != pseudo.manifest_hash {
        return Err(Error::Contract("RAW and pseudo-label rows come from different feature manifests".into()));
    }
    let raw_ids: HashSet<&str> = raw.building_ids.iter().map(String::as_str).collect();
    let pseudo_rows: Vec<usize> = (0..pseudo.len()).filter(|&i| !raw_ids.contains(pseudo.building_ids[i].as_str())).collect();
    let pseudo = pseudo.subset(&pseudo_rows);

    let n = match target_size {
        Some(n) => n,
        None => {
            let a = mix.a;
            let mut n = if a == 0.0 {
                raw.len()
            } else if a == 1.0 {
                pseudo.len()
            } else {
                ((raw.len() as f64 / (1.0 - a)).min(pseudo.len() as f64 / a)).floor() as usize + 1
            };
            while n > 0 {
                let (r, s) = mix.counts(n);
                if r <= raw.len() && s <= pseudo.len() {
                    break;
                }
                n -= 1;
            }
            n
        }
    };
    let (n_raw, n_svi) = mix.counts(n);
    if n_raw > raw.len() {
        return Err(Error::Availability { source_kind: "RAW", requested: n_raw, available: raw.len() });
    }
    if n_svi > pseudo.len() {
        return Err(Error::Availability { source_kind: "SVI", requested: n_svi, available: pseudo.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix.seed);
    let raw_pick = pick(raw.len(), n_raw, &mut rng);
    let svi_pick = pick(pseudo.len(), n_svi, &mut rng);
    let mut out = raw.subset(&raw_pick);
    let extra = pseudo.subset(&svi_pick);
    out.building_ids.extend(extra.building_ids);
    out.x.extend(extra.x);
    out.y.extend(extra.y);
    out.source.extend(extra.source);
    Ok(out)
}

/// Seeded shuffle, first `round(ratio * n)` rows to train.
pub fn split(d: &LabeledDataset, ratio: f64, seed: u64) -> (LabeledDataset, LabeledDataset) {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ratio * d.len() as f64).round() as usize).min(d.len());
    (d.subset(&idx[..n_train]), d.subset(&idx[n_train..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(n: usize, prefix: &str, source: LabelSource) -> LabeledDataset {
        let mut d = LabeledDataset::empty("h");
        for i in 0..n {
            d.push(format!("{prefix}{i}"), vec![i as f64], 3.0 + i as f64, source);
        }
        d
    }

    #[test]
    fn endpoints_and_even_mix() {
        let raw = ds(308, "r", LabelSource::Raw);
        let svi = ds(308, "s", LabelSource::Svi);
        let only_raw = assemble_training_set(&raw, &svi, TrainingMix::new(0.0, 1).unwrap(), None).unwrap();
        assert!(only_raw.source.iter().all(|&s| s == LabelSource::Raw));
        let only_svi = assemble_training_set(&raw, &svi, TrainingMix::new(1.0, 1).unwrap(), None).unwrap();
        assert!(only_svi.source.iter().all(|&s| s == LabelSource::Svi));
        let both = assemble_training_set(&raw, &svi, TrainingMix::new(0.5, 1).unwrap(), Some(616)).unwrap();
        assert_eq!(both.len(), 616);
        assert_eq!(both.source.iter().filter(|&&s| s == LabelSource::Svi).count(), 308);
        assert_eq!(assemble_training_set(&raw, &svi, TrainingMix::new(0.5, 1).unwrap(), None).unwrap().len(), 616);
    }

    #[test]
    fn shortfall_is_reported() {
        let raw = ds(10, "r", LabelSource::Raw);
        let svi = ds(10, "s", LabelSource::Svi);
        let err = assemble_training_set(&raw, &svi, TrainingMix::new(0.5, 1).unwrap(), Some(30)).unwrap_err();
        assert!(matches!(err, Error::Availability { requested: 15, available: 10, .. }));
    }

    #[test]
    fn raw_wins_on_overlap() {
        let raw = ds(5, "b", LabelSource::Raw);
        let svi = ds(5, "b", LabelSource::Svi);
        let err = assemble_training_set(&raw, &svi, TrainingMix::new(0.5, 1).unwrap(), Some(4));
        assert!(matches!(err, Err(Error::Availability { source_kind: "SVI", available: 0, .. })));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let d = ds(10, "b", LabelSource::Raw);
        let (tr, te) = split(&d, 0.7, 9);
        assert_eq!((tr.len(), te.len()), (7, 3));
        assert_eq!(split(&d, 0.7, 9).0, tr);
        let mut all: Vec<_> = tr.building_ids.iter().chain(&te.building_ids).cloned().collect();
        all.sort();
        let mut orig = d.building_ids.clone();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn rejects_bad_mix_and_heights() {
        assert!(TrainingMix::new(1.5, 0).is_err());
        let mut d = ds(2, "b", LabelSource::Raw);
        d.y[1] = 0.0;
        assert!(d.validate().is_err());
    }
}

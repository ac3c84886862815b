//! Ordered, named column registry for the feature matrix.

use super::MorphometryConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Building,
    Street,
    Block,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    None,
    Total,
    Mean,
    Std,
    Count,
}

impl Aggregator {
    fn suffix(self) -> &'static str {
        match self {
            Aggregator::None => "",
            Aggregator::Total => "total",
            Aggregator::Mean => "mean",
            Aggregator::Std => "std",
            Aggregator::Count => "count",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub level: Level,
    pub base_feature: String,
    pub buffer_m: u32,
    pub aggregator: Aggregator,
}

/// Base shape features of a building footprint, in column order.
pub const BUILDING_BASE: [&str; 9] = [
    "area",
    "perimeter",
    "circular_compactness",
    "convexity",
    "orientation",
    "shared_wall_length",
    "corner_count",
    "longest_axis_length",
    "equivalent_rectangular_index",
];

/// Base features aggregated over neighbouring buildings.
pub const BUILDING_AGGREGATED: [&str; 6] = ["area", "perimeter", "convexity", "circular_compactness", "orientation", "corner_count"];

pub const STREET_BASE: [&str; 9] = [
    "nearest_segment_length",
    "nearest_segment_width",
    "distance_to_nearest_segment",
    "nearest_segment_linearity",
    "distance_to_nearest_intersection",
    "nearest_intersection_degree",
    "local_closeness",
    "betweenness",
    "buildings_on_nearest_segment",
];

pub const BLOCK_SHAPE: [&str; 8] = [
    "area",
    "perimeter",
    "convexity",
    "circular_compactness",
    "orientation",
    "corner_count",
    "longest_axis_length",
    "equivalent_rectangular_index",
];

const TMS: [Aggregator; 3] = [Aggregator::Total, Aggregator::Mean, Aggregator::Std];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub version: String,
    /// Parameters that change column semantics.
    pub buffers_m: Vec<u32>,
    pub local_closeness_radius_m: f64,
    pub default_street_width_m: f64,
    pub entries: Vec<ManifestEntry>,
}

impl FeatureManifest {
    pub fn new(cfg: &MorphometryConfig) -> Self {
        let mut e = Vec::new();
        let mut push = |level: Level, prefix: &str, base: &str, buffer_m: u32, agg: Aggregator| {
            let mut name = format!("{prefix}_{base}");
            if agg != Aggregator::None {
                name.push('_');
                name.push_str(agg.suffix());
            }
            if buffer_m > 0 {
                name.push_str(&format!("_{buffer_m}m"));
            }
            e.push(ManifestEntry { name, level, base_feature: base.to_string(), buffer_m, aggregator: agg });
        };

        for f in BUILDING_BASE {
            push(Level::Building, "bldg", f, 0, Aggregator::None);
        }
        for &r in &cfg.buffers {
            for f in BUILDING_AGGREGATED {
                for a in TMS {
                    push(Level::Building, "bldg_nbr", f, r, a);
                }
            }
        }

        for f in STREET_BASE {
            push(Level::Street, "street", f, 0, Aggregator::None);
        }
        for &r in &cfg.buffers {
            push(Level::Street, "street", "segment", r, Aggregator::Count);
            for a in TMS {
                push(Level::Street, "street", "segment_length", r, a);
            }
            push(Level::Street, "street", "intersection", r, Aggregator::Count);
            for a in TMS {
                push(Level::Street, "street", "intersection_distance", r, a);
            }
            for a in TMS {
                push(Level::Street, "street_nbr", "distance_to_nearest_segment", r, a);
            }
        }

        for f in BLOCK_SHAPE {
            push(Level::Block, "block", f, 0, Aggregator::None);
        }
        push(Level::Block, "block", "building", 0, Aggregator::Count);
        for a in TMS {
            push(Level::Block, "block", "building_area", 0, a);
        }
        for &r in &cfg.buffers {
            push(Level::Block, "blocks", "block", r, Aggregator::Count);
            for a in TMS {
                push(Level::Block, "blocks", "area", r, a);
            }
        }
        if let Some(&r) = cfg.buffers.iter().max() {
            push(Level::Block, "blocks", "corner_count", r, Aggregator::Mean);
            push(Level::Block, "blocks", "corner_count", r, Aggregator::Std);
        }

        FeatureManifest {
            version: MANIFEST_VERSION.to_string(),
            buffers_m: cfg.buffers.clone(),
            local_closeness_radius_m: cfg.local_closeness_radius_m,
            default_street_width_m: cfg.default_street_width_m,
            entries: e,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    /// Column indices of one level.
    pub fn level_columns(&self, level: Level) -> Vec<usize> {
        (0..self.entries.len()).filter(|&i| self.entries[i].level == level).collect()
    }

    /// Hex SHA-256 over the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("manifest serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Sidecar document `{version, hash, entries, ...}`.
    pub fn to_sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "version": self.version,
            "hash": self.hash(),
            "buffers_m": self.buffers_m,
            "local_closeness_radius_m": self.local_closeness_radius_m,
            "default_street_width_m": self.default_street_width_m,
            "entries": self.entries,
        })
    }
}

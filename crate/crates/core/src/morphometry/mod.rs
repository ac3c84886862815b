//! Multi-level morphometric features of building footprints.

pub mod blocks;
pub mod centrality;
pub mod manifest;
pub mod matrix;
pub mod shape;
pub mod street;

pub use blocks::{tessellate_blocks, Block};
pub use manifest::{FeatureManifest, Level};
pub use matrix::{assemble_matrix, FeatureMatrix};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MorphometryConfig {
    /// Neighbourhood radii in metres.
    pub buffers: Vec<u32>,
    pub local_closeness_radius_m: f64,
    pub default_street_width_m: f64,
}

impl Default for MorphometryConfig {
    fn default() -> Self {
        MorphometryConfig { buffers: vec![50, 200, 500], local_closeness_radius_m: 400.0, default_street_width_m: 6.0 }
    }
}

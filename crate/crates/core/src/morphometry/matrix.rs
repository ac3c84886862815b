//! Feature matrix assembly and export.

use super::blocks::{assign_buildings, block_buffered_aggregates, block_features, tessellate_blocks, Block};
use super::manifest::FeatureManifest;
use super::shape::{building_base_features, buffered_aggregates, ShapeMetrics};
use super::street::{count_segment_sharing, street_base_features, street_buffered_aggregates, StreetContext};
use super::MorphometryConfig;
use crate::error::{Error, Result};
use crate::geodata::Footprint;
use crate::index::{PointIndex, SpatialIndex};
use crate::streets::StreetNetwork;
use rayon::prelude::*;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub building_ids: Vec<String>,
    /// Row-major, one row per building.
    pub values: Vec<Vec<f64>>,
    pub manifest: FeatureManifest,
    pub manifest_hash: String,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.manifest.len()
    }

    pub fn row_of(&self, building_id: &str) -> Option<usize> {
        self.building_ids.iter().position(|b| b == building_id)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.manifest.position(name)?;
        Some(self.values.iter().map(|r| r[c]).collect())
    }

    /// Keep only the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Vec<Vec<f64>> {
        self.values.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Export(format!("{}: {e}", path.display())))?;
        let mut header = vec!["building_id".to_string()];
        header.extend(self.manifest.names().map(str::to_string));
        w.write_record(&header).map_err(|e| Error::Export(e.to_string()))?;
        for (id, row) in self.building_ids.iter().zip(&self.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(|e| Error::Export(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.manifest.to_sidecar_json()).expect("json");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Read a matrix written by [`write_csv`](Self::write_csv) and check it against `manifest`.
    pub fn read_csv(path: impl AsRef<Path>, manifest: &FeatureManifest) -> Result<FeatureMatrix> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        let header: Vec<String> = r.headers().map_err(|e| Error::Input(e.to_string()))?.iter().map(str::to_string).collect();
        let expected: Vec<&str> = std::iter::once("building_id").chain(manifest.names()).collect();
        if header != expected {
            return Err(Error::Contract(format!("{} columns do not match the feature manifest", path.display())));
        }
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
            ids.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Input(format!("bad number `{v}` for building {}", &rec[0]))))
                .collect::<Result<Vec<f64>>>()?;
            values.push(row);
        }
        Ok(FeatureMatrix { building_ids: ids, values, manifest: manifest.clone(), manifest_hash: manifest.hash() })
    }
}

/// Intermediate state, exposed for tests and diagnostics.
pub struct Scene {
    pub blocks: Vec<Block>,
    pub block_of: Vec<Option<usize>>,
}

/// Compute every manifest column for every footprint.
pub fn assemble_matrix(footprints: &[Footprint], net: &StreetNetwork, cfg: &MorphometryConfig) -> Result<FeatureMatrix> {
    assemble_with_scene(footprints, net, cfg).map(|(m, _)| m)
}

pub fn assemble_with_scene(footprints: &[Footprint], net: &StreetNetwork, cfg: &MorphometryConfig) -> Result<(FeatureMatrix, Scene)> {
    if net.edges.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let manifest = FeatureManifest::new(cfg);
    let index = SpatialIndex::build(footprints);
    let centroids = index.centroids();

    let bldg: Vec<_> = (0..footprints.len()).into_par_iter().map(|i| building_base_features(i, footprints, &index)).collect();

    let ctx = StreetContext::new(net, cfg);
    let mut street: Vec<_> = (0..footprints.len()).into_par_iter().map(|i| street_base_features(centroids.point(i), &ctx)).collect();
    count_segment_sharing(&mut street, net.edges.len());

    let mut blocks = tessellate_blocks(net);
    let cpts: Vec<_> = (0..footprints.len()).map(|i| centroids.point(i)).collect();
    let block_of = assign_buildings(&mut blocks, &cpts);
    let block_shapes: Vec<ShapeMetrics> = blocks.iter().map(|b| ShapeMetrics::of(&b.polygon)).collect();
    let block_centroids = PointIndex::new(blocks.iter().map(|b| b.polygon.centroid()).collect());
    let unbounded: Vec<f64> = (0..footprints.len()).filter(|&i| block_of[i].is_none()).map(|i| bldg[i].shape.area).collect();
    let block_rows: Vec<[f64; 12]> = blocks
        .iter()
        .map(|b| block_features(Some(&b.polygon), &b.building_ids.iter().map(|&i| bldg[i].shape.area).collect::<Vec<_>>()))
        .collect();
    let unbounded_row = block_features(None, &unbounded);

    let values: Vec<Vec<f64>> = (0..footprints.len())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(manifest.len());
            row.extend(bldg[i].to_array());
            row.extend(buffered_aggregates(i, &bldg, &index, &cfg.buffers));
            row.extend(street[i].to_array());
            row.extend(street_buffered_aggregates(i, centroids, &street, &ctx, &cfg.buffers));
            row.extend(match block_of[i] {
                Some(k) => block_rows[k],
                None => unbounded_row,
            });
            row.extend(block_buffered_aggregates(cpts[i], &block_centroids, &block_shapes, &cfg.buffers));
            row
        })
        .collect();

    for (i, row) in values.iter().enumerate() {
        if row.len() != manifest.len() {
            return Err(Error::Feature { building_id: footprints[i].id.clone(), reason: format!("{} values for {} columns", row.len(), manifest.len()) });
        }
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Feature { building_id: footprints[i].id.clone(), reason: format!("non-finite {}", manifest.entries[c].name) });
        }
    }
    let manifest_hash = manifest.hash();
    Ok((
        FeatureMatrix { building_ids: footprints.iter().map(|f| f.id.clone()).collect(), values, manifest, manifest_hash },
        Scene { blocks, block_of },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::BuildingFunction;
    use crate::geom::Point;
    use crate::streets::StreetSegment;

    #[test]
    fn single_building_single_street() {
        let fp = Footprint::new("a", &[Point::new(0.0, 5.0), Point::new(10.0, 5.0), Point::new(10.0, 15.0), Point::new(0.0, 15.0)], &[], BuildingFunction::Residential).unwrap();
        let net = StreetNetwork::from_segments(vec![StreetSegment::new("s", &[Point::new(-50.0, 0.0), Point::new(50.0, 0.0)], None).unwrap()]).unwrap();
        let m = assemble_matrix(&[fp], &net, &MorphometryConfig::default()).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (1, 131));
        assert!(m.values[0].iter().all(|v| v.is_finite()));
        assert_eq!(m.column("street_distance_to_nearest_segment").unwrap(), vec![10.0]);
    }
}

//! Seeded synthetic cities with known heights, for tests and demonstrations.

use crate::error::{Error, Result};
use crate::floors::{Detection, DetectionClass, DetectionSet, FloorHeights};
use crate::geodata::{BuildingFunction, Footprint, GeoPoint, LocalProjection};
use crate::geom::Point;
use crate::streets::StreetSegment;
use crate::svi::CameraRecord;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCitySpec {
    /// Blocks per side; the street grid has `grid_blocks + 1` lines each way.
    pub grid_blocks: usize,
    pub buildings_per_block: usize,
    pub spacing_min_m: f64,
    pub spacing_max_m: f64,
    pub setback_m: f64,
    /// Probability that a building is attached to its left neighbour.
    pub terrace_probability: f64,
    pub commercial_fraction: f64,
    /// Height = intercept + w_area * footprint area + w_block * block area + N(0, noise_sigma).
    pub intercept_m: f64,
    pub weight_footprint_area: f64,
    pub weight_block_area: f64,
    pub noise_sigma_m: f64,
    /// Chance that a facade shows one storey too many or too few.
    pub floor_error_probability: f64,
    pub n_svi: usize,
    pub n_raw: usize,
    pub n_validation: usize,
    pub origin: GeoPoint,
    pub seed: u64,
}

impl Default for SyntheticCitySpec {
    fn default() -> Self {
        SyntheticCitySpec {
            grid_blocks: 5,
            buildings_per_block: 4,
            spacing_min_m: 60.0,
            spacing_max_m: 140.0,
            setback_m: 5.0,
            terrace_probability: 0.3,
            commercial_fraction: 0.2,
            intercept_m: 3.0,
            weight_footprint_area: 0.02,
            weight_block_area: 0.0008,
            noise_sigma_m: 1.0,
            floor_error_probability: 0.2,
            n_svi: 20,
            n_raw: 20,
            n_validation: 40,
            origin: GeoPoint { lon: 8.6724, lat: 49.3988 },
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCity {
    pub spec: SyntheticCitySpec,
    pub footprints: Vec<Footprint>,
    pub streets: Vec<StreetSegment>,
    /// Grid line positions.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `(column, row)` of the block holding each building.
    pub block_of: Vec<(usize, usize)>,
    pub truth: BTreeMap<String, f64>,
    pub cameras: Vec<CameraRecord>,
    pub detections: Vec<DetectionSet>,
    /// Storey count each facade was drawn with, by building.
    pub facade_floors: BTreeMap<String, u32>,
    pub svi_ids: Vec<String>,
    pub raw_ids: Vec<String>,
    pub validation_ids: Vec<String>,
}

fn grid_lines(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0];
    for _ in 0..n {
        let step: f64 = rng.random_range(lo..=hi);
        v.push(v.last().unwrap() + step.round());
    }
    v
}

/// Rectangle building from its lower-left corner.
fn rect(id: String, x: f64, y: f64, w: f64, d: f64, function: BuildingFunction) -> Footprint {
    let ring = [Point::new(x, y), Point::new(x + w, y), Point::new(x + w, y + d), Point::new(x, y + d)];
    let mut f = Footprint::new(id, &ring, &[], function).expect("positive rectangle");
    let tag = match function {
        BuildingFunction::CommercialPublic => "commercial",
        _ => "residential",
    };
    f.tags.insert("building".into(), tag.into());
    f
}

/// Facade image with `floors` evenly spaced window rows and no jitter.
pub fn facade_detections(image_id: &str, floors: u32, rng: &mut ChaCha8Rng) -> DetectionSet {
    let (w, h) = (1200u32, 1600u32);
    let spacing = h as f64 / (floors as f64 + 1.0);
    let win_h = 0.4 * spacing;
    let mut detections = Vec::new();
    for row in 0..floors {
        let yc = spacing * (row as f64 + 1.0);
        let n: usize = rng.random_range(1..=6);
        let slot = w as f64 / n as f64;
        for k in 0..n {
            let xc = slot * (k as f64 + 0.5);
            detections.push(Detection {
                class: DetectionClass::Window,
                bbox: [xc - 0.3 * slot, yc - win_h / 2.0, xc + 0.3 * slot, yc + win_h / 2.0],
                confidence: 0.9,
            });
        }
    }
    DetectionSet { image_id: image_id.to_string(), image_width_px: w, image_height_px: h, detections }
}

pub fn generate_synthetic_city(spec: &SyntheticCitySpec) -> Result<SyntheticCity> {
    if spec.grid_blocks == 0 || spec.buildings_per_block == 0 || !(spec.spacing_min_m > 2.0 * spec.setback_m + 20.0) || spec.spacing_max_m < spec.spacing_min_m {
        return Err(Error::Input("synthetic city needs at least one block and room for buildings".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = spec.grid_blocks;
    let xs = grid_lines(k, spec.spacing_min_m, spec.spacing_max_m, &mut rng);
    let ys = grid_lines(k, spec.spacing_min_m, spec.spacing_max_m, &mut rng);
    let mut streets = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        streets.push(StreetSegment::new(format!("v{i}"), &[Point::new(x, ys[0]), Point::new(x, ys[k])], None).expect("street"));
    }
    for (j, &y) in ys.iter().enumerate() {
        streets.push(StreetSegment::new(format!("h{j}"), &[Point::new(xs[0], y), Point::new(xs[k], y)], None).expect("street"));
    }

    let per_floor = FloorHeights::default();
    let noise = Normal::new(0.0, spec.noise_sigma_m.max(0.0)).map_err(|e| Error::Input(e.to_string()))?;
    let mut footprints = Vec::new();
    let mut block_of = Vec::new();
    let mut facing = Vec::new();
    let mut truth = BTreeMap::new();
    for bj in 0..k {
        for bi in 0..k {
            let (x0, x1, y0, y1) = (xs[bi], xs[bi + 1], ys[bj], ys[bj + 1]);
            let block_area = (x1 - x0) * (y1 - y0);
            let usable = x1 - x0 - 2.0 * spec.setback_m;
            let max_depth = ((y1 - y0 - 2.0 * spec.setback_m) / 2.0 - 2.0).min(16.0);
            let south = spec.buildings_per_block.div_ceil(2);
            for (side, count) in [(0usize, south), (1, spec.buildings_per_block - south)] {
                if count == 0 {
                    continue;
                }
                let widths: Vec<f64> = (0..count).map(|_| rng.random_range(8.0..20.0)).collect();
                let gaps: Vec<f64> = (0..count).map(|i| if i > 0 && rng.random_bool(spec.terrace_probability) { 0.0 } else { rng.random_range(1.0..4.0) }).collect();
                let total: f64 = widths.iter().sum::<f64>() + gaps.iter().sum::<f64>();
                let scale = (usable / total).min(1.0);
                let mut x = x0 + spec.setback_m;
                for n in 0..count {
                    x += gaps[n] * scale;
                    let w = (widths[n] * scale * 1000.0).round() / 1000.0;
                    let d = (rng.random_range(8.0..max_depth.max(8.5)) * 1000.0).round() / 1000.0;
                    let function = if rng.random_bool(spec.commercial_fraction) { BuildingFunction::CommercialPublic } else { BuildingFunction::Residential };
                    let id = format!("b{bj:02}_{bi:02}_{side}{n:02}");
                    let y = if side == 0 { y0 + spec.setback_m } else { y1 - spec.setback_m - d };
                    let xr = (x * 1000.0).round() / 1000.0;
                    let f = rect(id.clone(), xr, y, w, d, function);
                    let h = (spec.intercept_m + spec.weight_footprint_area * f.area() + spec.weight_block_area * block_area + noise.sample(&mut rng)).max(per_floor.residential_m);
                    truth.insert(id, h);
                    footprints.push(f);
                    block_of.push((bi, bj));
                    facing.push(if side == 0 { (xr + w / 2.0, y0, 0.0) } else { (xr + w / 2.0, y1, 180.0) });
                    x = xr + w;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..footprints.len()).collect();
    order.shuffle(&mut rng);
    let need = spec.n_svi + spec.n_raw + spec.n_validation;
    if need > footprints.len() {
        return Err(Error::Input(format!("synthetic city has {} buildings, {need} requested for labels", footprints.len())));
    }
    let ids = |r: std::ops::Range<usize>| -> Vec<usize> {
        let mut v = order[r].to_vec();
        v.sort_unstable();
        v
    };
    let svi = ids(0..spec.n_svi);
    let raw = ids(spec.n_svi..spec.n_svi + spec.n_raw);
    let val = ids(spec.n_svi + spec.n_raw..need);

    let proj = LocalProjection::new(spec.origin);
    let mut cameras = Vec::new();
    let mut detections = Vec::new();
    let mut facade_floors = BTreeMap::new();
    for &i in &svi {
        let f = &footprints[i];
        let per = per_floor.per_floor(f.function);
        let mut floors = ((truth[&f.id] / per).round() as i64).max(1);
        if rng.random_bool(spec.floor_error_probability) {
            floors += if rng.random_bool(0.5) { 1 } else { -1 };
            floors = floors.max(1);
        }
        let floors = floors as u32;
        let image_id = format!("img_{}", f.id);
        let (cx, cy, angle) = facing[i];
        let position = Point::new(cx, cy);
        cameras.push(CameraRecord {
            image_id: image_id.clone(),
            geo: proj.unproject(position),
            position,
            compass_angle: angle,
            altitude: None,
            camera_type: Some(crate::svi::CameraType::Perspective),
            captured_at: Some(1_600_000_000_000 + i as i64),
            camera_parameters: None,
            computed_rotation: None,
            exif_orientation: None,
        });
        detections.push(facade_detections(&image_id, floors, &mut rng));
        facade_floors.insert(f.id.clone(), floors);
    }
    let names = |v: &[usize]| v.iter().map(|&i| footprints[i].id.clone()).collect::<Vec<_>>();
    Ok(SyntheticCity {
        spec: spec.clone(),
        svi_ids: names(&svi),
        raw_ids: names(&raw),
        validation_ids: names(&val),
        footprints,
        streets,
        xs,
        ys,
        block_of,
        truth,
        cameras,
        detections,
        facade_floors,
    })
}

fn lonlat(p: &GeoPoint) -> serde_json::Value {
    json!([p.lon, p.lat])
}

impl SyntheticCity {
    fn proj(&self) -> LocalProjection {
        LocalProjection::new(self.spec.origin)
    }

    pub fn buildings_geojson(&self) -> String {
        let proj = self.proj();
        let features: Vec<_> = self
            .footprints
            .iter()
            .map(|f| {
                let ring: Vec<_> = f.polygon.exterior.iter().map(|&p| lonlat(&proj.unproject(p))).collect();
                json!({"type": "Feature", "id": f.id, "properties": f.tags, "geometry": {"type": "Polygon", "coordinates": [ring]}})
            })
            .collect();
        serde_json::to_string(&json!({"type": "FeatureCollection", "features": features})).expect("json") + "\n"
    }

    pub fn streets_geojson(&self) -> String {
        let proj = self.proj();
        let features: Vec<_> = self
            .streets
            .iter()
            .map(|s| {
                let line: Vec<_> = s.polyline.iter().map(|&p| lonlat(&proj.unproject(p))).collect();
                json!({"type": "Feature", "id": s.id, "properties": {"highway": "residential"}, "geometry": {"type": "LineString", "coordinates": line}})
            })
            .collect();
        serde_json::to_string(&json!({"type": "FeatureCollection", "features": features})).expect("json") + "\n"
    }

    /// Camera records shaped like the Mapillary image API.
    pub fn cameras_jsonl(&self) -> String {
        self.cameras
            .iter()
            .map(|c| {
                let v = json!({
                    "id": c.image_id,
                    "computed_geometry": {"type": "Point", "coordinates": lonlat(&c.geo)},
                    "computed_compass_angle": c.compass_angle,
                    "camera_type": "perspective",
                    "captured_at": c.captured_at,
                });
                serde_json::to_string(&v).expect("json") + "\n"
            })
            .collect()
    }

    fn heights_csv(&self, ids: &[String]) -> String {
        let mut s = String::from("building_id,height_m\n");
        for id in ids {
            s.push_str(&format!("{id},{:?}\n", self.truth[id]));
        }
        s
    }

    /// Write the scene as pipeline inputs into `dir`.
    pub fn write_inputs(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("buildings.geojson", self.buildings_geojson()),
            ("streets.geojson", self.streets_geojson()),
            ("cameras.jsonl", self.cameras_jsonl()),
            ("detections.jsonl", crate::floors::to_detection_lines(&self.detections)),
            ("raw_labels.csv", self.heights_csv(&self.raw_ids)),
            ("validation_labels.csv", self.heights_csv(&self.validation_ids)),
            ("truth.csv", self.heights_csv(&self.truth.keys().cloned().collect::<Vec<_>>())),
        ];
        for (name, text) in files {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

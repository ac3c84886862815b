//! Floor counting from facade detections and conversion to height pseudo-labels.

use crate::error::{Error, Result};
use crate::geodata::BuildingFunction;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.5;

/// Gap sets whose largest gap is below this multiple of the smallest have no usable split.
pub const DEGENERATE_GAP_RATIO: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionClass {
    Window,
    Door,
    Balcony,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: DetectionClass,
    /// `[xmin, ymin, xmax, ymax]` in pixels, y pointing down.
    pub bbox: [f64; 4],
    pub confidence: f64,
}

impl Detection {
    pub fn y_center(&self) -> f64 {
        (self.bbox[1] + self.bbox[3]) / 2.0
    }

    pub fn height(&self) -> f64 {
        self.bbox[3] - self.bbox[1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub image_id: String,
    pub image_width_px: u32,
    pub image_height_px: u32,
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.image_width_px as f64, self.image_height_px as f64);
        for (i, d) in self.detections.iter().enumerate() {
            let [x0, y0, x1, y1] = d.bbox;
            let ok = 0.0 <= x0 && x0 < x1 && x1 <= w && 0.0 <= y0 && y0 < y1 && y1 <= h;
            if !ok {
                return Err(Error::Input(format!("image {}: detection {i} box {:?} outside {}x{}", self.image_id, d.bbox, w, h)));
            }
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(Error::Input(format!("image {}: detection {i} confidence {}", self.image_id, d.confidence)));
            }
        }
        Ok(())
    }
}

/// Parse and validate JSON lines of detection sets.
pub fn parse_detection_lines(text: &str) -> Result<Vec<DetectionSet>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let d: DetectionSet = serde_json::from_str(line).map_err(|e| Error::Input(format!("detections line {}: {e}", i + 1)))?;
        d.validate()?;
        out.push(d);
    }
    Ok(out)
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<Vec<DetectionSet>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detection_lines(&text)
}

/// One canonical JSON line per set.
pub fn to_detection_lines(sets: &[DetectionSet]) -> String {
    sets.iter().map(|s| serde_json::to_string(s).expect("json") + "\n").collect()
}

/// Best split of sorted values into a low and a high group: returns the number of values in the
/// low group and the total within-group sum of squares. Splits only between distinct values.
pub fn two_means_split(sorted: &[f64]) -> Option<(usize, f64)> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let mut prefix = vec![(0.0, 0.0); n + 1];
    for (i, &v) in sorted.iter().enumerate() {
        prefix[i + 1] = (prefix[i].0 + v, prefix[i].1 + v * v);
    }
    let sse = |a: usize, b: usize| {
        let (s, q) = (prefix[b].0 - prefix[a].0, prefix[b].1 - prefix[a].1);
        (q - s * s / (b - a) as f64).max(0.0)
    };
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n {
        if sorted[k] == sorted[k - 1] {
            continue;
        }
        let w = sse(0, k) + sse(k, n);
        if best.is_none_or(|(_, bw)| w < bw) {
            best = Some((k, w));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowClustering {
    /// Indices into the detection list, grouped top to bottom.
    pub rows: Vec<Vec<usize>>,
    /// Gaps between consecutive retained centers, in vertical order.
    pub gap_values: Vec<f64>,
    /// Parallel to `gap_values`: true where the gap separates rows.
    pub gap_partition: Vec<bool>,
}

fn median_lower(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

/// Group windows and doors into horizontal rows by clustering vertical gaps.
pub fn cluster_rows(d: &DetectionSet, min_confidence: f64) -> Result<RowClustering> {
    let mut kept: Vec<usize> = (0..d.detections.len())
        .filter(|&i| {
            let x = &d.detections[i];
            x.class != DetectionClass::Balcony && x.confidence >= min_confidence
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::NoDetections { image_id: d.image_id.clone() });
    }
    kept.sort_by(|&a, &b| d.detections[a].y_center().total_cmp(&d.detections[b].y_center()).then(a.cmp(&b)));
    let gaps: Vec<f64> = kept.windows(2).map(|w| d.detections[w[1]].y_center() - d.detections[w[0]].y_center()).collect();

    let separators: Vec<bool> = if gaps.is_empty() {
        Vec::new()
    } else {
        let max = gaps.iter().cloned().fold(f64::MIN, f64::max);
        let min = gaps.iter().cloned().fold(f64::MAX, f64::min);
        let mut sorted = gaps.clone();
        sorted.sort_by(f64::total_cmp);
        let split = if kept.len() > 2 && max >= DEGENERATE_GAP_RATIO * min { two_means_split(&sorted) } else { None };
        match split {
            Some((k, _)) => {
                let cut = sorted[k];
                gaps.iter().map(|&g| g >= cut).collect()
            }
            None => {
                let windows: Vec<f64> = kept.iter().map(|&i| &d.detections[i]).filter(|x| x.class == DetectionClass::Window).map(Detection::height).collect();
                let heights = if windows.is_empty() { kept.iter().map(|&i| d.detections[i].height()).collect() } else { windows };
                let threshold = median_lower(heights);
                gaps.iter().map(|&g| g > threshold).collect()
            }
        }
    };

    let mut rows = vec![vec![kept[0]]];
    for (k, &sep) in separators.iter().enumerate() {
        if sep {
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push(kept[k + 1]);
    }
    Ok(RowClustering { rows, gap_values: gaps, gap_partition: separators })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorEstimate {
    pub image_id: String,
    pub floors: u32,
    pub window_rows: u32,
    pub door_adjusted: bool,
}

/// Count window rows and add a floor for a door below or between them.
pub fn estimate_floors(r: &RowClustering, d: &DetectionSet) -> FloorEstimate {
    let det = &d.detections;
    let bands: Vec<(f64, f64)> = r
        .rows
        .iter()
        .filter_map(|row| {
            let w: Vec<&Detection> = row.iter().map(|&i| &det[i]).filter(|x| x.class == DetectionClass::Window).collect();
            if w.is_empty() {
                None
            } else {
                Some((w.iter().map(|x| x.bbox[1]).fold(f64::MAX, f64::min), w.iter().map(|x| x.bbox[3]).fold(f64::MIN, f64::max)))
            }
        })
        .collect();
    let doors = r.rows.iter().flatten().map(|&i| &det[i]).filter(|x| x.class == DetectionClass::Door);
    let window_rows = bands.len() as u32;
    let mut door_adjusted = false;
    let mut has_door = false;
    for door in doors {
        has_door = true;
        if window_rows > 0 && !bands.iter().any(|&(lo, hi)| door.bbox[1] <= hi && door.bbox[3] >= lo) {
            door_adjusted = true;
        }
    }
    let floors = if window_rows == 0 {
        debug_assert!(has_door);
        1
    } else {
        window_rows + door_adjusted as u32
    };
    FloorEstimate { image_id: d.image_id.clone(), floors, window_rows, door_adjusted }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorHeights {
    pub residential_m: f64,
    pub commercial_public_m: f64,
    pub unknown_m: f64,
}

impl Default for FloorHeights {
    fn default() -> Self {
        FloorHeights { residential_m: 2.5, commercial_public_m: 3.5, unknown_m: 2.5 }
    }
}

impl FloorHeights {
    pub fn per_floor(&self, f: BuildingFunction) -> f64 {
        match f {
            BuildingFunction::Residential => self.residential_m,
            BuildingFunction::CommercialPublic => self.commercial_public_m,
            BuildingFunction::Unknown => self.unknown_m,
        }
    }

    pub fn floors_to_height(&self, floors: u32, function: BuildingFunction) -> Result<f64> {
        if floors < 1 {
            return Err(Error::Domain(format!("floor count must be at least 1, got {floors}")));
        }
        Ok(floors as f64 * self.per_floor(function))
    }
}

/// Height of a building with `floors` storeys under the default storey heights.
pub fn floors_to_height(floors: u32, function: BuildingFunction) -> Result<f64> {
    FloorHeights::default().floors_to_height(floors, function)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LabelSource {
    Raw,
    Svi,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub building_id: String,
    pub height: f64,
    pub source: LabelSource,
    pub floors: u32,
    pub function_used: BuildingFunction,
    pub n_images: usize,
}

#[derive(Clone, Debug, Default)]
pub struct LabelReport {
    pub labels: Vec<PseudoLabel>,
    /// `(image_id, reason)` for every assignment that produced no estimate.
    pub skipped: Vec<(String, String)>,
}

/// One label per assigned building; several images resolve to the median height (lower middle).
pub fn make_pseudo_labels(
    assignments: &[(String, String)],
    detections: &HashMap<String, DetectionSet>,
    functions: &HashMap<String, BuildingFunction>,
    heights: &FloorHeights,
    min_confidence: f64,
) -> LabelReport {
    let mut per_building: BTreeMap<&str, Vec<(f64, u32)>> = BTreeMap::new();
    let mut report = LabelReport::default();
    for (image_id, building_id) in assignments {
        let Some(d) = detections.get(image_id) else {
            report.skipped.push((image_id.clone(), "no detection set".into()));
            continue;
        };
        let est = match cluster_rows(d, min_confidence) {
            Ok(r) => estimate_floors(&r, d),
            Err(e) => {
                report.skipped.push((image_id.clone(), e.to_string()));
                continue;
            }
        };
        let f = functions.get(building_id).copied().unwrap_or(BuildingFunction::Unknown);
        let h = heights.floors_to_height(est.floors, f).expect("estimates have at least one floor");
        per_building.entry(building_id.as_str()).or_default().push((h, est.floors));
    }
    for (b, mut obs) in per_building {
        obs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (height, floors) = obs[(obs.len() - 1) / 2];
        report.labels.push(PseudoLabel {
            building_id: b.to_string(),
            height,
            source: LabelSource::Svi,
            floors,
            function_used: functions.get(b).copied().unwrap_or(BuildingFunction::Unknown),
            n_images: obs.len(),
        });
    }
    report
}

pub fn write_pseudo_labels_csv(path: impl AsRef<Path>, labels: &[PseudoLabel]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Export(format!("{}: {e}", path.display())))?;
    w.write_record(["building_id", "floors", "height_m", "n_images"]).map_err(|e| Error::Export(e.to_string()))?;
    for l in labels {
        w.write_record([l.building_id.clone(), l.floors.to_string(), format!("{:?}", l.height), l.n_images.to_string()])
            .map_err(|e| Error::Export(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(building_id, height_m)` pairs from a pseudo-label or reference-height CSV.
pub fn read_heights_csv(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Input(e.to_string()))?.clone();
    let id_col = header.iter().position(|h| h == "building_id").ok_or_else(|| Error::MissingField { field: "building_id".into() })?;
    let h_col = header.iter().position(|h| h == "height_m").ok_or_else(|| Error::MissingField { field: "height_m".into() })?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        let h: f64 = rec[h_col].parse().map_err(|_| Error::Input(format!("bad height `{}` for {}", &rec[h_col], &rec[id_col])))?;
        out.push((rec[id_col].to_string(), h));
    }
    Ok(out)
}

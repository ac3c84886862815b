//! Street-view camera metadata and image-to-building assignment by ray casting.

use crate::error::{Error, Result};
use crate::geodata::{Footprint, GeoPoint, LocalProjection};
use crate::geom::{edges, point_polyline_distance, segment_intersection, BBox, Point, SegmentHit};
use crate::index::SpatialIndex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeSet;
use std::path::Path;

pub const DEFAULT_MAX_RANGE_M: f64 = 100.0;

/// Hits closer than this (camera on a wall) are ignored, as are distance differences below it
/// when breaking ties.
pub const HIT_TOLERANCE_M: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraType {
    Perspective,
    Fisheye,
    Equirectangular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub image_id: String,
    pub geo: GeoPoint,
    pub position: Point,
    pub compass_angle: f64,
    pub altitude: Option<f64>,
    pub camera_type: Option<CameraType>,
    pub captured_at: Option<i64>,
    pub camera_parameters: Option<[f64; 3]>,
    pub computed_rotation: Option<[f64; 3]>,
    pub exif_orientation: Option<i64>,
}

fn missing(field: &str) -> Error {
    Error::MissingField { field: field.to_string() }
}

fn float_array<const N: usize>(v: &Value, field: &str) -> Result<[f64; N]> {
    let arr = v.as_array().ok_or_else(|| Error::Input(format!("`{field}` is not an array")))?;
    if arr.len() != N {
        return Err(Error::Input(format!("`{field}` needs {N} numbers, got {}", arr.len())));
    }
    let mut out = [0.0; N];
    for (o, x) in out.iter_mut().zip(arr) {
        *o = x.as_f64().ok_or_else(|| Error::Input(format!("`{field}` holds a non-number")))?;
    }
    Ok(out)
}

/// Parse one Mapillary v4 image record.
pub fn parse_camera_metadata(record: &Value, proj: &LocalProjection) -> Result<CameraRecord> {
    let image_id = match record.get("id").or_else(|| record.get("image_id")) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err(missing("id")),
    };
    let geom = record.get("computed_geometry").filter(|v| !v.is_null()).ok_or_else(|| missing("computed_geometry"))?;
    let coords = geom.get("coordinates").ok_or_else(|| missing("computed_geometry.coordinates"))?;
    let c = coords.as_array().filter(|a| a.len() >= 2).ok_or_else(|| Error::Input("computed_geometry needs [lon, lat]".into()))?;
    let (lon, lat) = match (c[0].as_f64(), c[1].as_f64()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Input("computed_geometry coordinates are not numbers".into())),
    };
    let geo = GeoPoint::new(lon, lat)?;
    let position = proj.project(geo)?;

    let raw = record
        .get("computed_compass_angle")
        .filter(|v| !v.is_null())
        .ok_or_else(|| missing("computed_compass_angle"))?
        .as_f64()
        .filter(|a| a.is_finite())
        .ok_or_else(|| Error::Input("computed_compass_angle is not a finite number".into()))?;
    let compass_angle = normalize_angle(raw);
    if compass_angle != raw {
        log::warn!("image {image_id}: compass angle {raw} normalized to {compass_angle}");
    }

    let opt = |k: &str| record.get(k).filter(|v| !v.is_null());
    let camera_type = match opt("camera_type") {
        Some(v) => Some(serde_json::from_value(v.clone()).map_err(|_| Error::Input(format!("unknown camera_type {v}")))?),
        None => None,
    };
    Ok(CameraRecord {
        image_id,
        geo,
        position,
        compass_angle,
        altitude: opt("computed_altitude").or_else(|| opt("altitude")).and_then(Value::as_f64),
        camera_type,
        captured_at: opt("captured_at").and_then(Value::as_i64),
        camera_parameters: opt("camera_parameters").map(|v| float_array(v, "camera_parameters")).transpose()?,
        computed_rotation: opt("computed_rotation").map(|v| float_array(v, "computed_rotation")).transpose()?,
        exif_orientation: opt("exif_orientation").and_then(Value::as_i64),
    })
}

/// Angle in degrees folded into [0, 360).
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Unit viewing direction (east, north) for a compass bearing in degrees.
pub fn bearing_to_direction(compass_angle: f64) -> Point {
    let t = compass_angle.to_radians();
    Point::new(t.sin(), t.cos())
}

/// Parse JSON lines of camera records. Malformed lines are returned as `(line number, error)`.
pub fn parse_camera_lines(text: &str, proj: &LocalProjection) -> (Vec<CameraRecord>, Vec<(usize, Error)>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Value>(line)
            .map_err(|e| Error::Input(format!("line {}: {e}", i + 1)))
            .and_then(|v| parse_camera_metadata(&v, proj));
        match parsed {
            Ok(r) => ok.push(r),
            Err(e) => bad.push((i + 1, e)),
        }
    }
    (ok, bad)
}

pub fn load_cameras(path: impl AsRef<Path>, proj: &LocalProjection) -> Result<(Vec<CameraRecord>, Vec<(usize, Error)>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_camera_lines(&text, proj))
}

/// Image ids, one per line; blank lines and `#` comments ignored.
pub fn load_allowlist(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub image_id: String,
    pub building_id: String,
    /// Index into the footprint list used for alignment.
    #[serde(skip)]
    pub building_index: usize,
    pub hit_point: Point,
    pub hit_distance: f64,
}

/// Nearest footprint boundary crossed by the camera's viewing ray, if any within `max_range`.
pub fn cast_ray(cam: &CameraRecord, footprints: &[Footprint], index: &SpatialIndex, max_range: f64) -> Result<Option<Assignment>> {
    let o = cam.position;
    let dir = bearing_to_direction(cam.compass_angle);
    let end = o + dir * max_range;
    let query = BBox::of_points([o, end].iter()).expand(HIT_TOLERANCE_M);
    let cands = index.query_box(&query);

    for &i in &index.query_box(&BBox { min: o, max: o }) {
        let poly = &footprints[i].polygon;
        if poly.contains(o) && poly.rings().all(|r| point_polyline_distance(o, r) > HIT_TOLERANCE_M) {
            return Err(Error::InsideBuilding { image_id: cam.image_id.clone(), building_id: footprints[i].id.clone() });
        }
    }

    let mut best: Option<(f64, usize)> = None;
    for i in cands {
        let mut nearest = f64::INFINITY;
        for ring in footprints[i].polygon.rings() {
            for (a, b) in edges(ring) {
                let t = match segment_intersection(o, end, a, b, 0.0) {
                    SegmentHit::None => continue,
                    SegmentHit::Point { t, .. } => t,
                    SegmentHit::Overlap { t0, .. } => t0,
                };
                let d = t * max_range;
                if d > HIT_TOLERANCE_M && d < nearest {
                    nearest = d;
                }
            }
        }
        if !nearest.is_finite() {
            continue;
        }
        best = match best {
            None => Some((nearest, i)),
            Some((bd, bi)) => {
                let tie = (nearest - bd).abs() <= HIT_TOLERANCE_M;
                if nearest < bd - HIT_TOLERANCE_M || (tie && footprints[i].id < footprints[bi].id) {
                    Some((nearest, i))
                } else {
                    Some((bd, bi))
                }
            }
        };
    }
    Ok(best.map(|(d, i)| Assignment {
        image_id: cam.image_id.clone(),
        building_id: footprints[i].id.clone(),
        building_index: i,
        hit_point: o + dir * d,
        hit_distance: d,
    }))
}

#[derive(Clone, Debug, Default)]
pub struct AlignmentReport {
    pub assignments: Vec<Assignment>,
    /// Images whose ray hit nothing.
    pub unassigned: Vec<String>,
    /// Images rejected with a reason, e.g. camera inside a building.
    pub errors: Vec<(String, String)>,
    /// Images dropped by the allowlist before casting.
    pub filtered: usize,
}

impl AlignmentReport {
    pub fn considered(&self) -> usize {
        self.assignments.len() + self.unassigned.len() + self.errors.len()
    }
}

/// Cast every camera (optionally restricted to an allowlist); output keeps input order.
pub fn align_cameras(
    cams: &[CameraRecord],
    footprints: &[Footprint],
    index: &SpatialIndex,
    max_range: f64,
    allowlist: Option<&BTreeSet<String>>,
) -> AlignmentReport {
    let selected: Vec<&CameraRecord> = cams.iter().filter(|c| allowlist.is_none_or(|a| a.contains(&c.image_id))).collect();
    let results: Vec<_> = selected.par_iter().map(|c| (c.image_id.clone(), cast_ray(c, footprints, index, max_range))).collect();
    let mut report = AlignmentReport { filtered: cams.len() - selected.len(), ..Default::default() };
    for (id, r) in results {
        match r {
            Ok(Some(a)) => report.assignments.push(a),
            Ok(None) => report.unassigned.push(id),
            Err(e) => {
                log::warn!("{e}");
                report.errors.push((id, e.to_string()));
            }
        }
    }
    report
}

pub fn write_assignments_csv(path: impl AsRef<Path>, assignments: &[Assignment]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Export(format!("{}: {e}", path.display())))?;
    w.write_record(["image_id", "building_id", "hit_distance_m"]).map_err(|e| Error::Export(e.to_string()))?;
    for a in assignments {
        w.write_record([a.image_id.as_str(), a.building_id.as_str(), &format!("{:?}", a.hit_distance)])
            .map_err(|e| Error::Export(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `(image_id, building_id)` pairs from an assignments CSV.
pub fn read_assignments_csv(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Input(e.to_string()))?;
        if rec.len() < 2 {
            return Err(Error::Input(format!("{}: short assignment row", path.display())));
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::BuildingFunction;
    use serde_json::json;

    fn proj() -> LocalProjection {
        LocalProjection::new(GeoPoint::new(8.69, 49.41).unwrap())
    }

    fn cam(x: f64, y: f64, angle: f64) -> CameraRecord {
        CameraRecord {
            image_id: "img".into(),
            geo: GeoPoint { lon: 0.0, lat: 0.0 },
            position: Point::new(x, y),
            compass_angle: angle,
            altitude: None,
            camera_type: None,
            captured_at: None,
            camera_parameters: None,
            computed_rotation: None,
            exif_orientation: None,
        }
    }

    fn rect(id: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Footprint {
        let r = [Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)];
        Footprint::new(id, &r, &[], BuildingFunction::Residential).unwrap()
    }

    #[test]
    fn parses_origin_record() {
        let v = json!({"id": "1", "computed_geometry": {"type": "Point", "coordinates": [8.69, 49.41]},
            "computed_compass_angle": 0.0, "camera_type": "perspective", "captured_at": 1600000000000i64,
            "camera_parameters": [0.8, 0.01, -0.02]});
        let c = parse_camera_metadata(&v, &proj()).unwrap();
        assert_eq!(c.position, Point::new(0.0, 0.0));
        assert_eq!(c.compass_angle, 0.0);
        assert_eq!(c.camera_type, Some(CameraType::Perspective));
        assert_eq!(c.camera_parameters, Some([0.8, 0.01, -0.02]));
    }

    #[test]
    fn normalizes_and_reports_missing() {
        let v = json!({"id": 7, "computed_geometry": {"coordinates": [8.69, 49.41]}, "computed_compass_angle": 450});
        assert_eq!(parse_camera_metadata(&v, &proj()).unwrap().compass_angle, 90.0);
        assert_eq!(normalize_angle(-90.0), 270.0);
        let v = json!({"id": "x", "computed_geometry": {"coordinates": [8.69, 49.41]}});
        let err = parse_camera_metadata(&v, &proj()).unwrap_err();
        assert!(err.to_string().contains("computed_compass_angle"));
    }

    #[test]
    fn bearings() {
        let close = |p: Point, x: f64, y: f64| (p.x - x).abs() < 1e-15 && (p.y - y).abs() < 1e-15;
        assert!(close(bearing_to_direction(0.0), 0.0, 1.0));
        assert!(close(bearing_to_direction(90.0), 1.0, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(bearing_to_direction(225.0), -h, -h));
    }

    #[test]
    fn hits_square_ahead_only() {
        let fps = vec![rect("a", -0.5, 9.5, 0.5, 10.5)];
        let idx = SpatialIndex::build(&fps);
        let a = cast_ray(&cam(0.0, 0.0, 0.0), &fps, &idx, 100.0).unwrap().unwrap();
        assert_eq!(a.building_id, "a");
        assert!((a.hit_distance - 9.5).abs() < 1e-12);
        assert!(a.hit_point.dist(Point::new(0.0, 9.5)) < 1e-12);
        assert!(cast_ray(&cam(0.0, 0.0, 180.0), &fps, &idx, 100.0).unwrap().is_none());
        assert!(cast_ray(&cam(0.0, 0.0, 0.0), &fps, &idx, 5.0).unwrap().is_none());
    }

    #[test]
    fn nearer_building_wins_and_ties_go_to_lower_id() {
        let fps = vec![rect("far", -1.0, 20.0, 1.0, 22.0), rect("near", -1.0, 10.0, 1.0, 12.0)];
        let idx = SpatialIndex::build(&fps);
        assert_eq!(cast_ray(&cam(0.0, 0.0, 0.0), &fps, &idx, 100.0).unwrap().unwrap().building_id, "near");
        // Ray along the shared wall x=0 of two touching buildings.
        let fps = vec![rect("b", 0.0, 10.0, 1.0, 12.0), rect("a", -1.0, 10.0, 0.0, 12.0)];
        let idx = SpatialIndex::build(&fps);
        assert_eq!(cast_ray(&cam(0.0, 0.0, 0.0), &fps, &idx, 100.0).unwrap().unwrap().building_id, "a");
    }

    #[test]
    fn inside_camera_is_rejected() {
        let fps = vec![rect("a", -5.0, -5.0, 5.0, 5.0)];
        let idx = SpatialIndex::build(&fps);
        assert!(matches!(cast_ray(&cam(0.0, 0.0, 0.0), &fps, &idx, 100.0), Err(Error::InsideBuilding { .. })));
        let rep = align_cameras(&[cam(0.0, 0.0, 0.0), cam(0.0, -20.0, 0.0), cam(0.0, -20.0, 180.0)], &fps, &idx, 100.0, None);
        assert_eq!((rep.assignments.len(), rep.unassigned.len(), rep.errors.len()), (1, 1, 1));
        assert_eq!(rep.considered(), 3);
    }
}

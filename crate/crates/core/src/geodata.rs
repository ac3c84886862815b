//! Building footprint ingestion and the local metric projection.

use crate::error::{Error, Result};
use crate::geom::{clean_ring, orient_ring, BBox, Point, Polygon};
use geojson::{Feature, GeoJson, GeometryValue};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Mean earth radius (IUGG), metres.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Vertices closer than this are merged when cleaning rings.
pub const RING_TOLERANCE_M: f64 = 1e-9;

/// Points further than this from the projection origin are rejected.
pub const MAX_PROJECTION_RANGE_M: f64 = 100_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Projection(format!("coordinate out of WGS84 range: ({lon}, {lat})")));
        }
        Ok(GeoPoint { lon, lat })
    }

    /// Great-circle distance on the projection sphere.
    pub fn haversine_m(&self, o: &GeoPoint) -> f64 {
        let (p1, p2) = (self.lat.to_radians(), o.lat.to_radians());
        let dphi = p2 - p1;
        let dlam = (o.lon - self.lon).to_radians();
        let h = (dphi / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dlam / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
    }
}

/// Spherical azimuthal equidistant projection about a local origin.
///
/// Distances and bearings from the origin are preserved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub origin: GeoPoint,
}

impl LocalProjection {
    pub fn new(origin: GeoPoint) -> Self {
        LocalProjection { origin }
    }

    pub fn project(&self, p: GeoPoint) -> Result<Point> {
        let p = GeoPoint::new(p.lon, p.lat)?;
        let (phi0, lam0) = (self.origin.lat.to_radians(), self.origin.lon.to_radians());
        let (phi, lam) = (p.lat.to_radians(), p.lon.to_radians());
        let dlam = lam - lam0;
        let h = ((phi - phi0) / 2.0).sin().powi(2) + phi0.cos() * phi.cos() * (dlam / 2.0).sin().powi(2);
        let c = 2.0 * h.sqrt().min(1.0).asin();
        let rho = EARTH_RADIUS_M * c;
        if rho >= MAX_PROJECTION_RANGE_M {
            return Err(Error::Projection(format!(
                "point ({}, {}) is {:.0} m from the projection origin (limit {} m)",
                p.lon, p.lat, rho, MAX_PROJECTION_RANGE_M
            )));
        }
        if c == 0.0 {
            return Ok(Point::new(0.0, 0.0));
        }
        let dx = phi.cos() * dlam.sin();
        let dy = phi0.cos() * phi.sin() - phi0.sin() * phi.cos() * dlam.cos();
        let n = dx.hypot(dy);
        Ok(Point::new(rho * dx / n, rho * dy / n))
    }

    pub fn unproject(&self, q: Point) -> GeoPoint {
        let rho = q.norm();
        if rho == 0.0 {
            return self.origin;
        }
        let (phi0, lam0) = (self.origin.lat.to_radians(), self.origin.lon.to_radians());
        let c = rho / EARTH_RADIUS_M;
        let (sc, cc) = c.sin_cos();
        let phi = (cc * phi0.sin() + q.y * sc * phi0.cos() / rho).clamp(-1.0, 1.0).asin();
        let lam = lam0 + (q.x * sc).atan2(rho * phi0.cos() * cc - q.y * phi0.sin() * sc);
        let lon = (lam.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
        GeoPoint { lon, lat: phi.to_degrees() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingFunction {
    Residential,
    CommercialPublic,
    Unknown,
}

impl BuildingFunction {
    pub fn as_str(&self) -> &'static str {
        match self {
            BuildingFunction::Residential => "residential",
            BuildingFunction::CommercialPublic => "commercial_public",
            BuildingFunction::Unknown => "unknown",
        }
    }
}

/// Tag-value lookup deciding a footprint's function class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FunctionMap {
    pub residential_buildings: BTreeSet<String>,
    pub commercial_buildings: BTreeSet<String>,
    /// `amenity` values consulted when the `building` value is not in either set.
    pub commercial_amenities: BTreeSet<String>,
}

impl Default for FunctionMap {
    fn default() -> Self {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        FunctionMap {
            residential_buildings: set(&["house", "residential", "apartments", "detached", "semidetached_house", "terrace"]),
            commercial_buildings: set(&[
                "commercial", "retail", "office", "industrial", "public", "school", "church", "university", "hospital",
            ]),
            commercial_amenities: set(&[
                "school", "university", "college", "hospital", "place_of_worship", "townhall", "library", "kindergarten",
            ]),
        }
    }
}

impl FunctionMap {
    pub fn classify(&self, tags: &BTreeMap<String, String>) -> BuildingFunction {
        if let Some(b) = tags.get("building") {
            if self.residential_buildings.contains(b) {
                return BuildingFunction::Residential;
            }
            if self.commercial_buildings.contains(b) {
                return BuildingFunction::CommercialPublic;
            }
        }
        match tags.get("amenity") {
            Some(a) if self.commercial_amenities.contains(a) => BuildingFunction::CommercialPublic,
            _ => BuildingFunction::Unknown,
        }
    }
}

/// One building: a single cleaned polygon in the projected plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub id: String,
    pub polygon: Polygon,
    pub function: BuildingFunction,
    pub tags: BTreeMap<String, String>,
}

impl Footprint {
    /// Clean and orient rings. Returns `None` for degenerate exteriors.
    /// Degenerate holes are dropped silently.
    pub fn new(id: impl Into<String>, exterior: &[Point], holes: &[Vec<Point>], function: BuildingFunction) -> Option<Self> {
        let mut ext = clean_ring(exterior, RING_TOLERANCE_M)?;
        orient_ring(&mut ext, true);
        let holes = holes
            .iter()
            .filter_map(|h| clean_ring(h, RING_TOLERANCE_M))
            .map(|mut h| {
                orient_ring(&mut h, false);
                h
            })
            .collect();
        let polygon = Polygon::new(ext, holes);
        if polygon.area() <= 0.0 {
            return None;
        }
        Some(Footprint { id: id.into(), polygon, function, tags: BTreeMap::new() })
    }

    pub fn area(&self) -> f64 {
        self.polygon.area()
    }

    pub fn centroid(&self) -> Point {
        self.polygon.centroid()
    }

    pub fn bbox(&self) -> BBox {
        self.polygon.bbox()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SkipReason {
    pub id: String,
    pub reason: String,
}

/// Summary emitted after ingestion.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub read: usize,
    pub kept: usize,
    pub skipped: usize,
    pub reasons: Vec<SkipReason>,
}

impl LoadReport {
    pub(crate) fn skip(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        self.skipped += 1;
        self.reasons.push(SkipReason { id: id.into(), reason: reason.into() });
    }
}

pub(crate) fn parse_feature_collection(text: &str) -> Result<Vec<Feature>> {
    let gj: GeoJson = text.parse().map_err(|e| Error::Input(format!("not valid GeoJSON: {e}")))?;
    match gj {
        GeoJson::FeatureCollection(fc) => Ok(fc.features),
        GeoJson::Feature(f) => Ok(vec![f]),
        GeoJson::Geometry(g) => Ok(vec![Feature { geometry: Some(g), ..Default::default() }]),
    }
}

pub(crate) fn feature_id(f: &Feature, index: usize) -> String {
    use geojson::feature::Id;
    match &f.id {
        Some(Id::String(s)) => return s.clone(),
        Some(Id::Number(n)) => return n.to_string(),
        None => {}
    }
    if let Some(props) = &f.properties {
        for key in ["id", "@id", "osm_id"] {
            match props.get(key) {
                Some(serde_json::Value::String(s)) => return s.clone(),
                Some(serde_json::Value::Number(n)) => return n.to_string(),
                _ => {}
            }
        }
    }
    format!("f{index}")
}

pub(crate) fn feature_tags(f: &Feature) -> BTreeMap<String, String> {
    let mut tags = BTreeMap::new();
    if let Some(props) = &f.properties {
        for (k, v) in props {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => continue,
                other => other.to_string(),
            };
            tags.insert(k.clone(), s);
        }
    }
    tags
}

fn project_ring(ring: &[geojson::Position], proj: &LocalProjection) -> Result<Vec<Point>> {
    ring.iter()
        .map(|pos| {
            if pos.len() < 2 {
                return Err(Error::Input("position with fewer than two coordinates".into()));
            }
            proj.project(GeoPoint { lon: pos[0], lat: pos[1] })
        })
        .collect()
}

/// Ingest building footprints from a GeoJSON string.
pub fn parse_buildings(text: &str, proj: &LocalProjection, functions: &FunctionMap) -> Result<(Vec<Footprint>, LoadReport)> {
    let features = parse_feature_collection(text)?;
    let mut report = LoadReport::default();
    let mut out = Vec::new();
    for (i, f) in features.iter().enumerate() {
        let id = feature_id(f, i);
        let tags = feature_tags(f);
        let function = functions.classify(&tags);
        let polygons: Vec<&Vec<Vec<geojson::Position>>> = match f.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon { coordinates }) => vec![coordinates],
            Some(GeometryValue::MultiPolygon { coordinates }) => coordinates.iter().collect(),
            Some(other) => {
                report.read += 1;
                report.skip(id, format!("unsupported geometry type {}", other.type_name()));
                continue;
            }
            None => {
                report.read += 1;
                report.skip(id, "missing geometry");
                continue;
            }
        };
        let multi = polygons.len() > 1;
        for (k, rings) in polygons.into_iter().enumerate() {
            report.read += 1;
            let part_id = if multi { format!("{id}#{k}") } else { id.clone() };
            let Some((ext, holes)) = rings.split_first() else {
                report.skip(part_id, "polygon without rings");
                continue;
            };
            let ext = project_ring(ext, proj)?;
            let holes = holes.iter().map(|h| project_ring(h, proj)).collect::<Result<Vec<_>>>()?;
            match Footprint::new(part_id.clone(), &ext, &holes, function) {
                Some(mut fp) => {
                    fp.tags = tags.clone();
                    out.push(fp);
                    report.kept += 1;
                }
                None => report.skip(part_id, "fewer than 3 distinct vertices or zero area"),
            }
        }
    }
    Ok((out, report))
}

pub fn load_buildings(path: impl AsRef<Path>, proj: &LocalProjection, functions: &FunctionMap) -> Result<(Vec<Footprint>, LoadReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_buildings(&text, proj, functions)
}

/// Mean of all polygon exterior vertices, used as the projection origin.
pub fn dataset_centroid(text: &str) -> Result<GeoPoint> {
    let features = parse_feature_collection(text)?;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    let mut add = |rings: &Vec<Vec<geojson::Position>>| {
        if let Some(ext) = rings.first() {
            for p in ext.iter().filter(|p| p.len() >= 2) {
                sx += p[0];
                sy += p[1];
                n += 1;
            }
        }
    };
    for f in &features {
        match f.geometry.as_ref().map(|g| &g.value) {
            Some(GeometryValue::Polygon { coordinates }) => add(coordinates),
            Some(GeometryValue::MultiPolygon { coordinates }) => coordinates.iter().for_each(&mut add),
            _ => {}
        }
    }
    if n == 0 {
        return Err(Error::Input("no polygon vertices to derive a projection origin from".into()));
    }
    GeoPoint::new(sx / n as f64, sy / n as f64)
}

pub fn dataset_centroid_from_path(path: impl AsRef<Path>) -> Result<GeoPoint> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    dataset_centroid(&text)
}

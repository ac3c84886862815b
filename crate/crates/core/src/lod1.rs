//! Flat-roofed prism models of buildings, written as CityJSON or OBJ.

use crate::error::{Error, Result};
use crate::geodata::{Footprint, GeoPoint};
use crate::geom::Point;
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

pub const DEFAULT_MIN_HEIGHT_M: f64 = 2.5;

/// CityJSON coordinates are stored as integer multiples of this many metres.
pub const CITYJSON_SCALE: f64 = 0.001;

#[derive(Clone, Debug, PartialEq)]
pub struct PrismSolid {
    pub building_id: String,
    pub height: f64,
    pub footprint_area: f64,
    pub vertices: Vec<[f64; 3]>,
    /// Surfaces as lists of rings of vertex indices; the first ring is the outer one.
    /// Order: bottom, top, then one wall per ring edge.
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl PrismSolid {
    pub fn volume(&self) -> f64 {
        self.footprint_area * self.height
    }

    pub fn wall_count(&self) -> usize {
        self.faces.len() - 2
    }
}

/// Extrude the footprint from z=0 up to `height`, faces oriented outwards.
pub fn extrude(f: &Footprint, height: f64, min_height: f64) -> Result<PrismSolid> {
    if !(height >= min_height) || !height.is_finite() {
        return Err(Error::Domain(format!("building {}: height {height} below minimum {min_height}", f.id)));
    }
    let mut vertices = Vec::new();
    // (base indices, top indices) per ring, rings open.
    let mut rings: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for ring in f.polygon.rings() {
        let open = &ring[..ring.len() - 1];
        let base: Vec<usize> = (0..open.len()).map(|k| vertices.len() + k).collect();
        vertices.extend(open.iter().map(|p| [p.x, p.y, 0.0]));
        let top: Vec<usize> = (0..open.len()).map(|k| vertices.len() + k).collect();
        vertices.extend(open.iter().map(|p| [p.x, p.y, height]));
        rings.push((base, top));
    }
    let bottom = rings.iter().map(|(b, _)| b.iter().rev().copied().collect()).collect();
    let top = rings.iter().map(|(_, t)| t.clone()).collect();
    let mut faces = vec![bottom, top];
    for (b, t) in &rings {
        let n = b.len();
        for k in 0..n {
            let j = (k + 1) % n;
            faces.push(vec![vec![b[k], b[j], t[j], t[k]]]);
        }
    }
    Ok(PrismSolid { building_id: f.id.clone(), height, footprint_area: f.area(), vertices, faces })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CityModel {
    pub solids: Vec<PrismSolid>,
    /// Per-solid footprint geometry, kept for triangulation.
    pub footprints: Vec<Footprint>,
    pub origin: GeoPoint,
    pub parameters: BTreeMap<String, Value>,
}

impl CityModel {
    /// Extrude every footprint that has a height; footprints without one are skipped.
    /// Vertices and heights are snapped to the CityJSON grid first.
    pub fn build(footprints: &[Footprint], heights: &HashMap<String, f64>, origin: GeoPoint, min_height: f64) -> Result<CityModel> {
        let mut solids = Vec::new();
        let mut kept = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for f in footprints {
            let Some(&h) = heights.get(&f.id) else { continue };
            if !seen.insert(f.id.clone()) {
                return Err(Error::Contract(format!("duplicate building id {}", f.id)));
            }
            if !(h >= min_height) {
                return Err(Error::Domain(format!("building {}: height {h} below minimum {min_height}", f.id)));
            }
            let f = snap_footprint(f)?;
            solids.push(extrude(&f, snap(h).max(min_height), min_height)?);
            kept.push(f);
        }
        let mut parameters = BTreeMap::new();
        parameters.insert("min_height_m".to_string(), json!(min_height));
        Ok(CityModel { solids, footprints: kept, origin, parameters })
    }
}

fn snap(v: f64) -> f64 {
    (v / CITYJSON_SCALE).round() * CITYJSON_SCALE
}

/// Footprint with every vertex moved to the export grid, so the model equals what a file can hold.
fn snap_footprint(f: &Footprint) -> Result<Footprint> {
    let ring = |r: &[Point]| r.iter().map(|p| Point::new(snap(p.x), snap(p.y))).collect::<Vec<_>>();
    let holes: Vec<Vec<Point>> = f.polygon.holes.iter().map(|h| ring(h)).collect();
    let mut out = Footprint::new(f.id.clone(), &ring(&f.polygon.exterior), &holes, f.function)
        .ok_or_else(|| Error::Export(format!("building {}: footprint collapses at {} m resolution", f.id, CITYJSON_SCALE)))?;
    out.tags = f.tags.clone();
    Ok(out)
}

fn quantize(v: f64, t: f64) -> i64 {
    ((v - t) / CITYJSON_SCALE).round() as i64
}

/// CityJSON 1.1 document with one Building per solid and a shared, deduplicated vertex pool.
/// Generation parameters and frame origin. CityJSON 1.1 has no schema-valid slot for
/// these without a published extension, so callers record them next to the export.
pub fn generation_metadata(m: &CityModel) -> Value {
    let mut parameters: Map<String, Value> = m.parameters.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    parameters.insert("crs".into(), json!("local azimuthal equidistant, metres"));
    parameters.insert("origin_lon".into(), json!(m.origin.lon));
    parameters.insert("origin_lat".into(), json!(m.origin.lat));
    Value::Object(parameters)
}

pub fn to_cityjson(m: &CityModel) -> Result<Value> {
    if m.solids.is_empty() {
        return Err(Error::Export("city model has no buildings".into()));
    }
    let mut min = [f64::INFINITY; 3];
    let mut max = [f64::NEG_INFINITY; 3];
    for v in m.solids.iter().flat_map(|s| &s.vertices) {
        for k in 0..3 {
            min[k] = min[k].min(v[k]);
            max[k] = max[k].max(v[k]);
        }
    }
    // Translation on the quantization grid keeps dequantized values reproducible.
    let translate: Vec<f64> = min.iter().map(|v| (v / CITYJSON_SCALE).floor() * CITYJSON_SCALE).collect();

    let mut pool: Vec<[i64; 3]> = Vec::new();
    let mut lookup: HashMap<[i64; 3], usize> = HashMap::new();
    let mut objects = Map::new();
    for s in &m.solids {
        let local: Vec<usize> = s
            .vertices
            .iter()
            .map(|v| {
                let q = [quantize(v[0], translate[0]), quantize(v[1], translate[1]), quantize(v[2], translate[2])];
                *lookup.entry(q).or_insert_with(|| {
                    pool.push(q);
                    pool.len() - 1
                })
            })
            .collect();
        let mut shell = Vec::new();
        for face in &s.faces {
            let mut surface = Vec::new();
            for ring in face {
                let mut r: Vec<usize> = ring.iter().map(|&i| local[i]).collect();
                r.dedup();
                while r.len() > 1 && r.first() == r.last() {
                    r.pop();
                }
                if r.len() < 3 {
                    return Err(Error::Export(format!("building {}: face collapses at {} m resolution", s.building_id, CITYJSON_SCALE)));
                }
                surface.push(r);
            }
            shell.push(surface);
        }
        objects.insert(
            s.building_id.clone(),
            json!({
                "type": "Building",
                "attributes": {"measuredHeight": s.height},
                "geometry": [{"type": "Solid", "lod": "1", "boundaries": [shell]}],
            }),
        );
    }
    Ok(json!({
        "type": "CityJSON",
        "version": "1.1",
        "transform": {"scale": [CITYJSON_SCALE, CITYJSON_SCALE, CITYJSON_SCALE], "translate": translate},
        "metadata": {
            "title": format!("LoD1 buildings in a local azimuthal equidistant frame centred on lon {}, lat {}", m.origin.lon, m.origin.lat),
            "geographicalExtent": [min[0], min[1], min[2], max[0], max[1], max[2]],
        },
        "CityObjects": objects,
        "vertices": pool,
    }))
}

pub fn export_cityjson(m: &CityModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = to_cityjson(m)?;
    let text = serde_json::to_string(&doc).map_err(|e| Error::Export(e.to_string()))? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Triangles of a polygon with holes, as indices into its open rings concatenated.
fn triangulate(f: &Footprint) -> Result<Vec<[usize; 3]>> {
    let mut coords = Vec::new();
    let mut holes = Vec::new();
    let mut count = 0;
    for (k, ring) in f.polygon.rings().enumerate() {
        if k > 0 {
            holes.push(count);
        }
        for p in &ring[..ring.len() - 1] {
            coords.extend([p.x, p.y]);
            count += 1;
        }
    }
    let idx = earcutr::earcut(&coords, &holes, 2).map_err(|e| Error::Export(format!("building {}: triangulation failed: {e:?}", f.id)))?;
    let tris: Vec<[usize; 3]> = idx.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let open_count = count;
    if tris.len() != open_count - 2 + 2 * holes.len() {
        return Err(Error::Export(format!("building {}: triangulation produced {} triangles", f.id, tris.len())));
    }
    // Orient every triangle counter-clockwise.
    let pt = |i: usize| Point::new(coords[2 * i], coords[2 * i + 1]);
    Ok(tris
        .into_iter()
        .map(|[a, b, c]| if (pt(b) - pt(a)).cross(pt(c) - pt(a)) < 0.0 { [a, c, b] } else { [a, b, c] })
        .collect())
}

/// Wavefront OBJ, one object per building, all faces triangles wound outwards.
pub fn to_obj(m: &CityModel) -> Result<String> {
    if m.solids.is_empty() {
        return Err(Error::Export("city model has no buildings".into()));
    }
    let mut out = String::new();
    let mut base = 1usize;
    for (s, f) in m.solids.iter().zip(&m.footprints) {
        let tris = triangulate(f)?;
        writeln!(out, "o {}", s.building_id).unwrap();
        for v in &s.vertices {
            writeln!(out, "v {:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
        }
        // Vertex layout from `extrude`: per ring, base block then top block.
        let mut ring_of = Vec::new();
        let mut offset = 0;
        for ring in f.polygon.rings() {
            let n = ring.len() - 1;
            for k in 0..n {
                ring_of.push((offset + k, offset + n + k));
            }
            offset += 2 * n;
        }
        for [a, b, c] in tris {
            writeln!(out, "f {} {} {}", base + ring_of[a].1, base + ring_of[b].1, base + ring_of[c].1).unwrap();
            writeln!(out, "f {} {} {}", base + ring_of[a].0, base + ring_of[c].0, base + ring_of[b].0).unwrap();
        }
        for face in &s.faces[2..] {
            let q = &face[0];
            writeln!(out, "f {} {} {}", base + q[0], base + q[1], base + q[2]).unwrap();
            writeln!(out, "f {} {} {}", base + q[0], base + q[2], base + q[3]).unwrap();
        }
        base += s.vertices.len();
    }
    Ok(out)
}

pub fn export_obj(m: &CityModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_obj(m)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

//! Pipeline stages wired from a declarative JSON config, each writing a run manifest.

use crate::error::{Error, Result};
use crate::floors::{self, FloorHeights};
use crate::geodata::{self, BuildingFunction, Footprint, FunctionMap, GeoPoint, LocalProjection};
use crate::index::SpatialIndex;
use crate::lod1::{self, CityModel};
use crate::morphometry::{assemble_matrix, FeatureManifest, FeatureMatrix, MorphometryConfig};
use crate::regression::experiment::{run_experiment, ExperimentConfig};
use crate::regression::{assemble_training_set, evaluate, train, LabeledDataset, ModelKind, TrainedModel, TrainingMix};
use crate::streets::{self, StreetNetwork};
use crate::svi;
use crate::floors::LabelSource;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Prefix of environment variables that override config fields.
pub const ENV_PREFIX: &str = "BHEIGHT_";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub buildings: PathBuf,
    pub streets: PathBuf,
    pub cameras: PathBuf,
    pub detections: PathBuf,
    pub raw_labels: PathBuf,
    /// Reference heights for scoring; without them the RAW labels are split.
    pub validation_labels: Option<PathBuf>,
    pub allowlist: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SviConfig {
    pub max_range_m: f64,
}

impl Default for SviConfig {
    fn default() -> Self {
        SviConfig { max_range_m: svi::DEFAULT_MAX_RANGE_M }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorsConfig {
    pub min_confidence: f64,
    pub storey_heights: FloorHeights,
}

impl Default for FloorsConfig {
    fn default() -> Self {
        FloorsConfig { min_confidence: floors::DEFAULT_MIN_CONFIDENCE, storey_heights: FloorHeights::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressionConfig {
    pub experiment: ExperimentConfig,
    /// Model used for the final height predictions.
    pub model: ModelKind,
    /// Share of pseudo-labels in the final training set.
    pub mix_a: f64,
    pub target_size: Option<usize>,
    /// `json` or `bin`.
    pub model_format: String,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            experiment: ExperimentConfig::default(),
            model: ModelKind::from_name("random_forest").expect("known kind"),
            mix_a: 0.5,
            target_size: None,
            model_format: "json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lod1Config {
    pub min_height_m: f64,
    /// Any of `cityjson` and `obj`.
    pub formats: Vec<String>,
    /// Use reference heights instead of predictions where a building has one.
    pub prefer_reference_heights: bool,
}

impl Default for Lod1Config {
    fn default() -> Self {
        Lod1Config { min_height_m: lod1::DEFAULT_MIN_HEIGHT_M, formats: vec!["cityjson".into(), "obj".into()], prefer_reference_heights: true }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Projection origin; defaults to the centroid of the building file.
    pub origin: Option<GeoPoint>,
    pub functions: FunctionMap,
    pub morphometry: MorphometryConfig,
    pub svi: SviConfig,
    pub floors: FloorsConfig,
    pub regression: RegressionConfig,
    pub lod1: Lod1Config,
    pub seed: u64,
}

/// Set `path` (segments joined by `__`, case-insensitive) inside a JSON object.
/// Values parse as JSON when they can and fall back to strings.
fn set_path(v: &mut Value, path: &[String], raw: &str) -> Result<()> {
    let Some((head, rest)) = path.split_first() else { return Ok(()) };
    let Value::Object(map) = v else {
        return Err(Error::Input(format!("override path through non-object at `{head}`")));
    };
    let key = map.keys().find(|k| k.eq_ignore_ascii_case(head)).cloned();
    let Some(key) = key else {
        return Err(Error::Input(format!("unknown config field `{head}`")));
    };
    let slot = map.get_mut(&key).expect("key exists");
    if rest.is_empty() {
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(())
    } else {
        if slot.is_null() {
            *slot = json!({});
        }
        set_path(slot, rest, raw)
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))
    }

    /// Read a config file; relative paths inside it resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.paths.rebase(dir);
        }
        Ok(cfg)
    }

    /// Apply `BHEIGHT_SEED=3` or `BHEIGHT_REGRESSION__MIX_A=0.3` style overrides.
    pub fn with_overrides<I, K, V>(self, vars: I) -> Result<PipelineConfig>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut v = serde_json::to_value(&self).expect("config serializes");
        let mut touched = false;
        let mut pairs: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, val)| k.as_ref().strip_prefix(ENV_PREFIX).map(|s| (s.to_string(), val.as_ref().to_string())))
            .collect();
        pairs.sort();
        for (k, val) in pairs {
            let path: Vec<String> = k.split("__").map(str::to_lowercase).collect();
            set_path(&mut v, &path, &val)?;
            touched = true;
        }
        if !touched {
            return Ok(self);
        }
        serde_json::from_value(v).map_err(|e| Error::Input(format!("config override: {e}")))
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// SHA-256 of the compact JSON form without file locations; inputs are hashed by content.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v.as_object_mut().expect("object").remove("paths");
        sha256_hex(serde_json::to_string(&v).expect("config serializes").as_bytes())
    }

    fn out(&self, name: &str) -> PathBuf {
        self.paths.out_dir.join(name)
    }
}

impl Paths {
    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        for p in [&mut self.buildings, &mut self.streets, &mut self.cameras, &mut self.detections, &mut self.raw_labels, &mut self.out_dir] {
            fix(p);
        }
        for p in [&mut self.validation_labels, &mut self.allowlist].into_iter().flatten() {
            fix(p);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_file(path: &Path) -> Result<String> {
    std::fs::read(path).map(|b| sha256_hex(&b)).map_err(|e| Error::io(path, e))
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::Input(format!("config has no path for {what}")));
    }
    if !path.exists() {
        return Err(Error::Input(format!("{what} file {} does not exist", path.display())));
    }
    Ok(())
}

/// Record of one stage run: content hashes of inputs and outputs, config hash and timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub details: BTreeMap<String, Value>,
    pub timings_ms: BTreeMap<String, f64>,
}

struct StageRun<'a> {
    cfg: &'a PipelineConfig,
    m: RunManifest,
    start: Instant,
}

impl<'a> StageRun<'a> {
    fn begin(cfg: &'a PipelineConfig, stage: &str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.paths.out_dir).map_err(|e| Error::io(&cfg.paths.out_dir, e))?;
        Ok(StageRun {
            cfg,
            m: RunManifest {
                stage: stage.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_hash: cfg.hash(),
                seed: cfg.seed,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                details: BTreeMap::new(),
                timings_ms: BTreeMap::new(),
            },
            start: Instant::now(),
        })
    }

    fn input(&mut self, key: &str, path: &Path) -> Result<()> {
        require(path, key)?;
        self.m.inputs.insert(key.to_string(), hash_file(path)?);
        Ok(())
    }

    fn output(&mut self, name: &str) -> Result<()> {
        let p = self.cfg.out(name);
        self.m.outputs.insert(name.to_string(), hash_file(&p)?);
        Ok(())
    }

    fn detail(&mut self, key: &str, v: Value) {
        self.m.details.insert(key.to_string(), v);
    }

    fn finish(mut self) -> Result<RunManifest> {
        self.m.timings_ms.insert("total".into(), self.start.elapsed().as_secs_f64() * 1e3);
        let p = self.cfg.out(&format!("run_{}.json", self.m.stage));
        let text = serde_json::to_string_pretty(&self.m).expect("manifest serializes") + "\n";
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        log::info!("stage {} done in {:.0} ms", self.m.stage, self.m.timings_ms["total"]);
        Ok(self.m)
    }
}

fn projection(cfg: &PipelineConfig) -> Result<LocalProjection> {
    let origin = match cfg.origin {
        Some(o) => GeoPoint::new(o.lon, o.lat)?,
        None => geodata::dataset_centroid_from_path(&cfg.paths.buildings)?,
    };
    Ok(LocalProjection::new(origin))
}

fn load_scene(cfg: &PipelineConfig) -> Result<(LocalProjection, Vec<Footprint>)> {
    require(&cfg.paths.buildings, "buildings")?;
    let proj = projection(cfg)?;
    let (fps, report) = geodata::load_buildings(&cfg.paths.buildings, &proj, &cfg.functions)?;
    if report.skipped > 0 {
        log::warn!("skipped {} of {} building features", report.skipped, report.read);
    }
    Ok((proj, fps))
}

fn load_network(cfg: &PipelineConfig, proj: &LocalProjection) -> Result<StreetNetwork> {
    require(&cfg.paths.streets, "streets")?;
    let (net, report) = streets::load_streets(&cfg.paths.streets, proj)?;
    if report.skipped > 0 {
        log::warn!("skipped {} of {} street features", report.skipped, report.read);
    }
    Ok(net)
}

pub const FEATURES_CSV: &str = "features.csv";
pub const FEATURE_MANIFEST: &str = "manifest.json";
pub const ASSIGNMENTS_CSV: &str = "assignments.csv";
pub const PSEUDO_LABELS_CSV: &str = "pseudo_labels.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const HEIGHTS_CSV: &str = "heights.csv";
pub const CITYJSON: &str = "city.json";
pub const OBJ: &str = "city.obj";

pub fn model_file(cfg: &PipelineConfig) -> String {
    format!("model.{}", if cfg.regression.model_format == "json" { "json" } else { "bin" })
}

/// Building and street features for every footprint.
pub fn stage_features(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "features")?;
    run.input("buildings", &cfg.paths.buildings)?;
    run.input("streets", &cfg.paths.streets)?;
    let (proj, fps) = load_scene(cfg)?;
    let net = load_network(cfg, &proj)?;
    let matrix = assemble_matrix(&fps, &net, &cfg.morphometry)?;
    matrix.write_csv(cfg.out(FEATURES_CSV))?;
    matrix.write_manifest(cfg.out(FEATURE_MANIFEST))?;
    run.output(FEATURES_CSV)?;
    run.output(FEATURE_MANIFEST)?;
    run.detail("n_buildings", json!(matrix.n_rows()));
    run.detail("n_features", json!(matrix.n_cols()));
    run.detail("manifest_hash", json!(matrix.manifest_hash));
    run.finish()
}

/// Assign each camera to the building its viewing ray hits first.
pub fn stage_align(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "align")?;
    run.input("buildings", &cfg.paths.buildings)?;
    run.input("cameras", &cfg.paths.cameras)?;
    let allow = match &cfg.paths.allowlist {
        Some(p) => {
            run.input("allowlist", p)?;
            Some(svi::load_allowlist(p)?)
        }
        None => None,
    };
    let (proj, fps) = load_scene(cfg)?;
    let (cams, bad) = svi::load_cameras(&cfg.paths.cameras, &proj)?;
    for (line, e) in &bad {
        log::warn!("camera line {line}: {e}");
    }
    let index = SpatialIndex::build(&fps);
    let mut report = svi::align_cameras(&cams, &fps, &index, cfg.svi.max_range_m, allow.as_ref());
    report.assignments.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    svi::write_assignments_csv(cfg.out(ASSIGNMENTS_CSV), &report.assignments)?;
    run.output(ASSIGNMENTS_CSV)?;
    run.detail("assigned", json!(report.assignments.len()));
    run.detail("unassigned", json!(report.unassigned.len()));
    run.detail("rejected", json!(report.errors.len()));
    run.detail("malformed_lines", json!(bad.len()));
    run.finish()
}

/// Floor counts from facade detections, converted to pseudo-label heights.
pub fn stage_floors(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "floors")?;
    run.input("buildings", &cfg.paths.buildings)?;
    run.input("detections", &cfg.paths.detections)?;
    run.input("assignments", &cfg.out(ASSIGNMENTS_CSV))?;
    let (_, fps) = load_scene(cfg)?;
    let functions: HashMap<String, BuildingFunction> = fps.iter().map(|f| (f.id.clone(), f.function)).collect();
    let detections: HashMap<String, floors::DetectionSet> = floors::load_detections(&cfg.paths.detections)?.into_iter().map(|d| (d.image_id.clone(), d)).collect();
    let assignments = svi::read_assignments_csv(cfg.out(ASSIGNMENTS_CSV))?;
    let report = floors::make_pseudo_labels(&assignments, &detections, &functions, &cfg.floors.storey_heights, cfg.floors.min_confidence);
    for (img, why) in &report.skipped {
        log::warn!("image {img}: {why}");
    }
    floors::write_pseudo_labels_csv(cfg.out(PSEUDO_LABELS_CSV), &report.labels)?;
    run.output(PSEUDO_LABELS_CSV)?;
    run.detail("labels", json!(report.labels.len()));
    run.detail("skipped_images", json!(report.skipped.len()));
    run.finish()
}

fn read_matrix(cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    let manifest = FeatureManifest::new(&cfg.morphometry);
    FeatureMatrix::read_csv(cfg.out(FEATURES_CSV), &manifest)
}

fn validation_labels(cfg: &PipelineConfig, run: &mut StageRun) -> Result<Option<Vec<(String, f64)>>> {
    match &cfg.paths.validation_labels {
        Some(p) => {
            run.input("validation_labels", p)?;
            Ok(Some(floors::read_heights_csv(p)?))
        }
        None => Ok(None),
    }
}

/// Run the model comparison grid, then fit the final model on RAW plus pseudo-labels.
pub fn stage_train(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "train")?;
    run.input("features", &cfg.out(FEATURES_CSV))?;
    run.input("raw_labels", &cfg.paths.raw_labels)?;
    run.input("pseudo_labels", &cfg.out(PSEUDO_LABELS_CSV))?;
    let matrix = read_matrix(cfg)?;
    let raw = floors::read_heights_csv(&cfg.paths.raw_labels)?;
    let pseudo = floors::read_heights_csv(cfg.out(PSEUDO_LABELS_CSV))?;
    let validation = validation_labels(cfg, &mut run)?;

    let t = Instant::now();
    let report = run_experiment(&cfg.regression.experiment, &matrix, &raw, &pseudo, validation.as_deref())?;
    report.write_csv(cfg.out(REPORT_CSV))?;
    report.write_json(cfg.out(REPORT_JSON))?;
    run.m.timings_ms.insert("experiment".into(), t.elapsed().as_secs_f64() * 1e3);
    run.output(REPORT_CSV)?;
    run.output(REPORT_JSON)?;

    // Validation buildings never enter the final training set.
    let held: std::collections::HashSet<&str> = validation.iter().flatten().map(|(id, _)| id.as_str()).collect();
    let keep = |v: &[(String, f64)]| v.iter().filter(|(id, _)| !held.contains(id.as_str())).cloned().collect::<Vec<_>>();
    let raw_d = LabeledDataset::from_labels(&matrix, &keep(&raw), LabelSource::Raw)?;
    let pseudo_d = LabeledDataset::from_labels(&matrix, &keep(&pseudo), LabelSource::Svi)?;
    let train_set = assemble_training_set(&raw_d, &pseudo_d, TrainingMix::new(cfg.regression.mix_a, cfg.seed)?, cfg.regression.target_size)?;
    let t = Instant::now();
    let model = train(&cfg.regression.model.with_seed(cfg.seed), &train_set)?;
    run.m.timings_ms.insert("final_model".into(), t.elapsed().as_secs_f64() * 1e3);
    let name = model_file(cfg);
    model.save(cfg.out(&name))?;
    run.output(&name)?;
    run.detail("n_train", json!(train_set.len()));
    run.detail("median_mae", json!(report.median_mae().into_iter().map(|((k, s), v)| (format!("{k}/{}", s.as_str()), v)).collect::<BTreeMap<_, _>>()));
    run.finish()
}

/// Score the saved model against reference heights.
pub fn stage_evaluate(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "evaluate")?;
    let name = model_file(cfg);
    run.input("features", &cfg.out(FEATURES_CSV))?;
    run.input("model", &cfg.out(&name))?;
    let labels = match validation_labels(cfg, &mut run)? {
        Some(v) => v,
        None => {
            run.input("raw_labels", &cfg.paths.raw_labels)?;
            floors::read_heights_csv(&cfg.paths.raw_labels)?
        }
    };
    let matrix = read_matrix(cfg)?;
    let model = TrainedModel::load(cfg.out(&name))?;
    let d = LabeledDataset::from_labels(&matrix, &labels, LabelSource::Raw)?;
    let pred = model.predict(&d.x, &d.manifest_hash)?;
    let m = evaluate(&pred, &d.y)?;
    let text = serde_json::to_string_pretty(&json!({"n": d.len(), "metrics": m})).expect("json") + "\n";
    let p = cfg.out(METRICS_JSON);
    std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    run.output(METRICS_JSON)?;
    run.detail("mae", json!(m.mae));
    run.finish()
}

fn write_heights(path: &Path, rows: &[(String, f64, &str)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Export(format!("{}: {e}", path.display())))?;
    w.write_record(["building_id", "height_m", "source"]).map_err(|e| Error::Export(e.to_string()))?;
    for (id, h, s) in rows {
        w.write_record([id.as_str(), &format!("{h:?}"), s]).map_err(|e| Error::Export(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Predict every building's height and extrude the footprints.
pub fn stage_build_lod1(cfg: &PipelineConfig) -> Result<RunManifest> {
    let mut run = StageRun::begin(cfg, "build_lod1")?;
    let name = model_file(cfg);
    run.input("buildings", &cfg.paths.buildings)?;
    run.input("features", &cfg.out(FEATURES_CSV))?;
    run.input("model", &cfg.out(&name))?;
    let reference: HashMap<String, f64> = if cfg.lod1.prefer_reference_heights {
        run.input("raw_labels", &cfg.paths.raw_labels)?;
        floors::read_heights_csv(&cfg.paths.raw_labels)?.into_iter().collect()
    } else {
        HashMap::new()
    };
    let (proj, fps) = load_scene(cfg)?;
    let matrix = read_matrix(cfg)?;
    let model = TrainedModel::load(cfg.out(&name))?;
    let pred = model.predict(&matrix.values, &matrix.manifest_hash)?;
    let mut rows = Vec::with_capacity(matrix.n_rows());
    for (id, p) in matrix.building_ids.iter().zip(pred) {
        match reference.get(id) {
            Some(&h) => rows.push((id.clone(), h.max(cfg.lod1.min_height_m), "reference")),
            None => rows.push((id.clone(), p.max(cfg.lod1.min_height_m), "predicted")),
        }
    }
    write_heights(&cfg.out(HEIGHTS_CSV), &rows)?;
    run.output(HEIGHTS_CSV)?;
    let heights: HashMap<String, f64> = rows.iter().map(|(id, h, _)| (id.clone(), *h)).collect();
    let mut model3d = CityModel::build(&fps, &heights, proj.origin, cfg.lod1.min_height_m)?;
    model3d.parameters.insert("seed".into(), json!(cfg.seed));
    model3d.parameters.insert("model".into(), json!(model.kind.name()));
    model3d.parameters.insert("manifest_hash".into(), json!(model.manifest_hash));
    for f in &cfg.lod1.formats {
        match f.as_str() {
            "cityjson" => {
                lod1::export_cityjson(&model3d, cfg.out(CITYJSON))?;
                run.output(CITYJSON)?;
            }
            "obj" => {
                lod1::export_obj(&model3d, cfg.out(OBJ))?;
                run.output(OBJ)?;
            }
            other => return Err(Error::Input(format!("unknown LoD1 format `{other}`"))),
        }
    }
    run.detail("buildings", json!(model3d.solids.len()));
    run.detail("generation_parameters", lod1::generation_metadata(&model3d));
    run.finish()
}

/// Every stage in order; evaluation runs only with reference heights configured.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Vec<RunManifest>> {
    let mut out = vec![stage_features(cfg)?, stage_align(cfg)?, stage_floors(cfg)?, stage_train(cfg)?];
    if cfg.paths.validation_labels.is_some() {
        out.push(stage_evaluate(cfg)?);
    }
    out.push(stage_build_lod1(cfg)?);
    Ok(out)
}

/// Config that runs the pipeline over the files written by [`crate::synth::SyntheticCity::write_inputs`].
pub fn synthetic_config(city: &crate::synth::SyntheticCity, input_dir: &Path, out_dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        paths: Paths {
            buildings: input_dir.join("buildings.geojson"),
            streets: input_dir.join("streets.geojson"),
            cameras: input_dir.join("cameras.jsonl"),
            detections: input_dir.join("detections.jsonl"),
            raw_labels: input_dir.join("raw_labels.csv"),
            validation_labels: Some(input_dir.join("validation_labels.csv")),
            allowlist: None,
            out_dir: out_dir.to_path_buf(),
        },
        origin: Some(city.spec.origin),
        seed: city.spec.seed,
        ..Default::default()
    };
    cfg.regression.experiment.seeds = vec![city.spec.seed];
    cfg
}

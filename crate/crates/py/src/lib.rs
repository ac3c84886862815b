//! Python module `bheight`: config, stage runners and the pure operations behind them.

use bheight_core::floors::{self, DetectionSet};
use bheight_core::geodata::{self, BuildingFunction, FunctionMap, GeoPoint, LocalProjection};
use bheight_core::lod1::{self, CityModel};
use bheight_core::morphometry::{assemble_matrix, FeatureMatrix, MorphometryConfig};
use bheight_core::pipeline::{self, PipelineConfig as CoreConfig, RunManifest};
use bheight_core::regression::{self, TrainedModel};
use bheight_core::{streets, synth, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError};
use pyo3::prelude::*;
use std::collections::HashMap;

create_exception!(bheight, BHeightError, PyException);
create_exception!(bheight, InputError, BHeightError);
create_exception!(bheight, ContractError, BHeightError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match (&e, e.exit_code()) {
        (Error::Io { .. }, _) => PyOSError::new_err(msg),
        (_, 2) => InputError::new_err(msg),
        (_, 3) => ContractError::new_err(msg),
        _ => BHeightError::new_err(msg),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    InputError::new_err(e.to_string())
}

fn manifest_json(m: &RunManifest) -> String {
    serde_json::to_string(m).expect("manifest serializes")
}

fn parse_function(name: &str) -> PyResult<BuildingFunction> {
    match name {
        "residential" => Ok(BuildingFunction::Residential),
        "commercial_public" | "commercial" => Ok(BuildingFunction::CommercialPublic),
        "unknown" => Ok(BuildingFunction::Unknown),
        other => Err(InputError::new_err(format!("unknown building function `{other}`"))),
    }
}

/// Resolved pipeline settings. Stage runners read paths and parameters from it.
#[pyclass(name = "PipelineConfig", from_py_object)]
#[derive(Clone)]
struct PyPipelineConfig {
    inner: CoreConfig,
}

#[pymethods]
impl PyPipelineConfig {
    #[new]
    #[pyo3(signature = (json = None))]
    fn new(json: Option<&str>) -> PyResult<Self> {
        let inner = match json {
            Some(t) => CoreConfig::from_json(t).map_err(py_err)?,
            None => CoreConfig::default(),
        };
        Ok(Self { inner })
    }

    /// Load a config file; relative paths resolve against its directory.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreConfig::load(path).map_err(py_err)? })
    }

    /// Apply `{"BHEIGHT_SEED": "3", "BHEIGHT_REGRESSION__MIX_A": "0.25"}` style overrides.
    fn with_overrides(&self, overrides: HashMap<String, String>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.clone().with_overrides(overrides).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_pretty_json()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn out_dir(&self) -> String {
        self.inner.paths.out_dir.display().to_string()
    }

    #[setter]
    fn set_out_dir(&mut self, dir: &str) {
        self.inner.paths.out_dir = dir.into();
    }

    fn __repr__(&self) -> String {
        format!("PipelineConfig(seed={}, out_dir={:?}, hash={})", self.inner.seed, self.inner.paths.out_dir, &self.inner.hash()[..12])
    }
}

/// Run one stage (`features`, `align`, `floors`, `train`, `evaluate`, `build_lod1`);
/// returns its run manifest as JSON.
#[pyfunction]
fn run_stage(py: Python<'_>, config: &PyPipelineConfig, stage: &str) -> PyResult<String> {
    let cfg = config.inner.clone();
    let f = match stage {
        "features" => pipeline::stage_features,
        "align" => pipeline::stage_align,
        "floors" => pipeline::stage_floors,
        "train" => pipeline::stage_train,
        "evaluate" => pipeline::stage_evaluate,
        "build_lod1" | "build-lod1" => pipeline::stage_build_lod1,
        other => return Err(InputError::new_err(format!("unknown stage `{other}`"))),
    };
    let m = py.detach(|| f(&cfg)).map_err(py_err)?;
    Ok(manifest_json(&m))
}

/// Every stage in order; returns the run manifests as JSON strings.
#[pyfunction]
fn run_pipeline(py: Python<'_>, config: &PyPipelineConfig) -> PyResult<Vec<String>> {
    let cfg = config.inner.clone();
    let runs = py.detach(|| pipeline::run_pipeline(&cfg)).map_err(py_err)?;
    Ok(runs.iter().map(manifest_json).collect())
}

/// Write a synthetic city to `out_dir` and return a config that runs on it.
#[pyfunction]
#[pyo3(signature = (out_dir, spec_json = None))]
fn synthetic_city(out_dir: &str, spec_json: Option<&str>) -> PyResult<PyPipelineConfig> {
    let spec: synth::SyntheticCitySpec = match spec_json {
        Some(t) => serde_json::from_str(t).map_err(json_err)?,
        None => Default::default(),
    };
    let city = synth::generate_synthetic_city(&spec).map_err(py_err)?;
    let dir = std::path::Path::new(out_dir);
    city.write_inputs(dir).map_err(py_err)?;
    Ok(PyPipelineConfig { inner: pipeline::synthetic_config(&city, dir, &dir.join("output")) })
}

/// Per-building feature table.
#[pyclass(name = "FeatureMatrix", skip_from_py_object)]
struct PyFeatureMatrix {
    inner: FeatureMatrix,
}

#[pymethods]
impl PyFeatureMatrix {
    #[getter]
    fn building_ids(&self) -> Vec<String> {
        self.inner.building_ids.clone()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.manifest.names().map(str::to_string).collect()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values.clone()
    }

    #[getter]
    fn manifest_hash(&self) -> String {
        self.inner.manifest_hash.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }
}

/// Features for building and street GeoJSON documents, projected around `origin`
/// (lon, lat) or the building centroid.
#[pyfunction]
#[pyo3(signature = (buildings_geojson, streets_geojson, origin = None, config_json = None))]
fn compute_features(
    py: Python<'_>,
    buildings_geojson: &str,
    streets_geojson: &str,
    origin: Option<(f64, f64)>,
    config_json: Option<&str>,
) -> PyResult<PyFeatureMatrix> {
    let cfg: MorphometryConfig = match config_json {
        Some(t) => serde_json::from_str(t).map_err(json_err)?,
        None => MorphometryConfig::default(),
    };
    let origin = match origin {
        Some((lon, lat)) => GeoPoint::new(lon, lat).map_err(py_err)?,
        None => geodata::dataset_centroid(buildings_geojson).map_err(py_err)?,
    };
    let proj = LocalProjection::new(origin);
    let inner = py
        .detach(|| {
            let (fps, _) = geodata::parse_buildings(buildings_geojson, &proj, &FunctionMap::default())?;
            let (net, _) = streets::parse_streets(streets_geojson, &proj)?;
            assemble_matrix(&fps, &net, &cfg)
        })
        .map_err(py_err)?;
    Ok(PyFeatureMatrix { inner })
}

/// Floor count for one DetectionSet JSON record.
#[pyfunction]
#[pyo3(signature = (detection_set_json, min_confidence = floors::DEFAULT_MIN_CONFIDENCE))]
fn estimate_floors(detection_set_json: &str, min_confidence: f64) -> PyResult<u32> {
    let d: DetectionSet = serde_json::from_str(detection_set_json).map_err(json_err)?;
    d.validate().map_err(py_err)?;
    let rows = floors::cluster_rows(&d, min_confidence).map_err(py_err)?;
    Ok(floors::estimate_floors(&rows, &d).floors)
}

/// Height in metres of `floors` storeys for a building function.
#[pyfunction]
#[pyo3(signature = (floors, function = "residential"))]
fn floors_to_height(floors: u32, function: &str) -> PyResult<f64> {
    floors::floors_to_height(floors, parse_function(function)?).map_err(py_err)
}

/// MAE, RMSE and R² as a dict.
#[pyfunction]
fn evaluate(pred: Vec<f64>, truth: Vec<f64>) -> PyResult<HashMap<&'static str, f64>> {
    let m = regression::evaluate(&pred, &truth).map_err(py_err)?;
    Ok(HashMap::from([("mae", m.mae), ("rmse", m.rmse), ("r2", m.r2)]))
}

/// A fitted regressor saved by the train stage.
#[pyclass(name = "Model", skip_from_py_object)]
struct PyModel {
    inner: TrainedModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: TrainedModel::load(path).map_err(py_err)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn manifest_hash(&self) -> String {
        self.inner.manifest_hash.clone()
    }

    /// Heights for feature rows; the matrix must come from the same feature roster.
    fn predict(&self, features: &PyFeatureMatrix) -> PyResult<Vec<f64>> {
        self.inner.predict(&features.inner.values, &features.inner.manifest_hash).map_err(py_err)
    }
}

/// LoD1 CityJSON text for building footprints extruded to `heights` (id -> metres).
#[pyfunction]
#[pyo3(signature = (buildings_geojson, heights, origin = None, min_height_m = lod1::DEFAULT_MIN_HEIGHT_M))]
fn lod1_cityjson(buildings_geojson: &str, heights: HashMap<String, f64>, origin: Option<(f64, f64)>, min_height_m: f64) -> PyResult<String> {
    let origin = match origin {
        Some((lon, lat)) => GeoPoint::new(lon, lat).map_err(py_err)?,
        None => geodata::dataset_centroid(buildings_geojson).map_err(py_err)?,
    };
    let proj = LocalProjection::new(origin);
    let (fps, _) = geodata::parse_buildings(buildings_geojson, &proj, &FunctionMap::default()).map_err(py_err)?;
    let model = CityModel::build(&fps, &heights, origin, min_height_m).map_err(py_err)?;
    let doc = lod1::to_cityjson(&model).map_err(py_err)?;
    Ok(serde_json::to_string(&doc).expect("json"))
}

#[pymodule]
fn bheight(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BHeightError", m.py().get_type::<BHeightError>())?;
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("ContractError", m.py().get_type::<ContractError>())?;
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyFeatureMatrix>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(run_stage, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_city, m)?)?;
    m.add_function(wrap_pyfunction!(compute_features, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_floors, m)?)?;
    m.add_function(wrap_pyfunction!(floors_to_height, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(lod1_cityjson, m)?)?;
    Ok(())
}

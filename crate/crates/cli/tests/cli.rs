use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn bheight(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bheight"));
    c.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("BHEIGHT_")) {
        c.env_remove(k);
    }
    c.envs(envs.iter().copied());
    c.output().expect("binary runs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}\nstdout: {}\nstderr: {}", o.status.code(), String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_report_matches_golden_file() {
    let out = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("exp.json");
    for stage in ["features", "align", "floors", "train"] {
        ok(&bheight(&[stage, "--config", s(&cfg), "--out", s(out.path())], &[]));
    }
    let got = std::fs::read_to_string(out.path().join("report.csv")).unwrap();
    let golden = fixtures().join("golden_report.csv");
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(golden).unwrap());
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(out.path().join("run_train.json")).unwrap()).unwrap();
    assert_eq!(run["stage"], "train");
    assert_eq!(run["seed"], 3);
    assert!(run["inputs"]["raw_labels"].as_str().unwrap().len() == 64);
}

#[test]
fn features_from_flags_only() {
    let out = tempfile::tempdir().unwrap();
    let scene = fixtures().join("scene");
    let o = bheight(
        &["features", "--buildings", s(&scene.join("buildings.geojson")), "--streets", s(&scene.join("streets.geojson")), "--out", s(out.path())],
        &[],
    );
    ok(&o);
    let csv = std::fs::read_to_string(out.path().join("features.csv")).unwrap();
    assert_eq!(csv.lines().count(), 37);
    assert_eq!(csv.lines().next().unwrap().split(',').count(), 132);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.path().join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.is_object());
}

#[test]
fn pipeline_writes_city_model() {
    let out = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("exp.json");
    // A single cheap model keeps the end-to-end run short.
    let kinds = r#"[{"linear_gd": {}}]"#;
    ok(&bheight(&["pipeline", "--config", s(&cfg), "--out", s(out.path())], &[("BHEIGHT_REGRESSION__EXPERIMENT__KINDS", kinds), ("BHEIGHT_REGRESSION__MODEL", r#"{"linear_gd": {}}"#)]));
    let city: serde_json::Value = serde_json::from_slice(&std::fs::read(out.path().join("city.json")).unwrap()).unwrap();
    assert_eq!(city["type"], "CityJSON");
    assert_eq!(city["CityObjects"].as_object().unwrap().len(), 36);
    assert!(out.path().join("city.obj").exists());
    assert!(out.path().join("metrics.json").exists());

    // Re-export only OBJ with a raised floor height.
    let only = tempfile::tempdir().unwrap();
    for f in ["features.csv", "manifest.json", "model.json"] {
        std::fs::copy(out.path().join(f), only.path().join(f)).unwrap();
    }
    ok(&bheight(&["build-lod1", "--config", s(&cfg), "--out", s(only.path()), "--format", "obj", "--min-height-m", "4"], &[("BHEIGHT_REGRESSION__MODEL", r#"{"linear_gd": {}}"#)]));
    assert!(only.path().join("city.obj").exists());
    assert!(!only.path().join("city.json").exists());
}

#[test]
fn print_config_shows_defaults_and_overrides() {
    let o = bheight(&["--print-config", "--seed", "9"], &[("BHEIGHT_SVI__MAX_RANGE_M", "55")]);
    ok(&o);
    let cfg: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg["seed"], 9);
    assert_eq!(cfg["svi"]["max_range_m"], 55.0);
    assert_eq!(cfg["lod1"]["min_height_m"], 2.5);
    assert_eq!(cfg["floors"]["storey_heights"]["residential_m"], 2.5);
    assert_eq!(cfg["floors"]["storey_heights"]["commercial_public_m"], 3.5);
}

#[test]
fn exit_codes_distinguish_input_and_contract_errors() {
    let out = tempfile::tempdir().unwrap();
    let o = bheight(&["features", "--buildings", "/nonexistent/b.geojson", "--streets", "/nonexistent/s.geojson", "--out", s(out.path())], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(bheight(&["--seed", "1"], &[]).status.code(), Some(2));
    assert_eq!(bheight(&["--print-config"], &[("BHEIGHT_NO_SUCH_FIELD", "1")]).status.code(), Some(2));

    // A model trained on one feature roster cannot score features built with another.
    let cfg = fixtures().join("exp.json");
    let lin = [("BHEIGHT_REGRESSION__EXPERIMENT__KINDS", r#"[{"linear_gd": {}}]"#), ("BHEIGHT_REGRESSION__MODEL", r#"{"linear_gd": {}}"#)];
    for stage in ["features", "align", "floors", "train"] {
        ok(&bheight(&[stage, "--config", s(&cfg), "--out", s(out.path())], &lin));
    }
    let mut narrow = lin.to_vec();
    narrow.push(("BHEIGHT_MORPHOMETRY__BUFFERS", "[50]"));
    ok(&bheight(&["features", "--config", s(&cfg), "--out", s(out.path())], &narrow));
    let o = bheight(&["build-lod1", "--config", s(&cfg), "--out", s(out.path())], &narrow);
    assert_eq!(o.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_writes_runnable_scene() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("city");
    ok(&bheight(&["synth", "--grid-blocks", "3", "--buildings-per-block", "10", "--seed", "5", "--out", s(&scene)], &[]));
    let cfg = scene.join("config.json");
    assert!(cfg.exists());
    let o = bheight(&["--print-config", "--config", s(&cfg)], &[]);
    ok(&o);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 5);
    assert_eq!(v["paths"]["buildings"], s(&scene.join("buildings.geojson")));
}

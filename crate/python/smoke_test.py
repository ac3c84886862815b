"""Exercise the bheight extension end to end on a small synthetic city.

Build first:  pip install --no-build-isolation -e crates/py
Run:          python python/smoke_test.py
"""

import json
import math
import pathlib
import sys
import tempfile

import bheight


def facade(floors, image_id="img"):
    h = 1600.0
    step = h / (floors + 1)
    dets = []
    for row in range(floors):
        y = step * (row + 1)
        for k in range(3):
            x = 200.0 + 400.0 * k
            dets.append({"class": "window", "bbox": [x - 40, y - 0.2 * step, x + 40, y + 0.2 * step], "confidence": 0.9})
    return json.dumps({"image_id": image_id, "image_width_px": 1200, "image_height_px": 1600, "detections": dets})


def main():
    assert bheight.floors_to_height(4, "residential") == 10.0
    assert bheight.floors_to_height(3, "commercial_public") == 10.5
    for n in range(1, 9):
        assert bheight.estimate_floors(facade(n)) == n, n

    m = bheight.evaluate([1.0, 2.0, 3.0, 4.0], [1.5, 2.0, 2.0, 5.0])
    assert math.isclose(m["mae"], 0.625) and math.isclose(m["rmse"], 0.75)
    assert math.isclose(m["r2"], 29 / 41)

    try:
        bheight.evaluate([1.0], [1.0, 2.0])
    except bheight.BHeightError as e:
        print("length mismatch rejected:", e)
    else:
        raise AssertionError("mismatched lengths accepted")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        spec = {"grid_blocks": 3, "buildings_per_block": 10, "n_raw": 20, "n_svi": 20, "n_validation": 30, "seed": 1}
        cfg = bheight.synthetic_city(str(tmp / "scene"), json.dumps(spec))
        fast = {"BHEIGHT_REGRESSION__EXPERIMENT__KINDS": '[{"linear_gd": {}}, {"random_forest": {"n_trees": 30}}]',
                "BHEIGHT_REGRESSION__MODEL": '{"random_forest": {"n_trees": 30}}'}
        cfg = cfg.with_overrides(fast)
        print(cfg)
        runs = [json.loads(r) for r in bheight.run_pipeline(cfg)]
        print("stages:", ", ".join(r["stage"] for r in runs))
        assert runs[-1]["details"]["buildings"] == 90

        scene = tmp / "scene"
        buildings = (scene / "buildings.geojson").read_text()
        streets = (scene / "streets.geojson").read_text()
        origin = (8.6724, 49.3988)
        fm = bheight.compute_features(buildings, streets, origin)
        print(f"features: {len(fm)} buildings x {len(fm.names)} columns")
        assert len(fm) == 90 and len(fm.names) == 131

        model = bheight.Model.load(str(pathlib.Path(cfg.out_dir) / "model.json"))
        assert model.manifest_hash == fm.manifest_hash
        pred = model.predict(fm)
        assert len(pred) == 90 and min(pred) >= 2.5
        print(f"{model.kind}: predicted heights {min(pred):.1f}..{max(pred):.1f} m")

        city = json.loads(bheight.lod1_cityjson(buildings, dict(zip(fm.building_ids, pred)), origin))
        assert city["type"] == "CityJSON" and len(city["CityObjects"]) == 90

        narrow = bheight.compute_features(buildings, streets, origin, json.dumps({"buffers": [50]}))
        try:
            model.predict(narrow)
        except bheight.ContractError as e:
            print("roster mismatch rejected:", e)
        else:
            raise AssertionError("prediction on a different feature roster accepted")

    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())

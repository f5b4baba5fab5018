from __future__ import annotations

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from leafrec import pipeline, raster, synth
from leafrec.service import create_app


@pytest.fixture(scope="module")
def service_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("servicedata")
    train_csv, _ = synth.generate_dataset(
        root / "train", train_per_class=4, test_per_class=0, seed=31, size=128
    )
    bundle = pipeline.train_pipeline(pipeline.load_manifest(train_csv))

    data_dir = root / "inbox"
    data_dir.mkdir()
    rng = np.random.default_rng(5)
    leaves = {}
    for i, spec in enumerate(synth.SPECIES[:3]):
        rgb, terminals = synth.render_leaf(spec, rng, size=128)
        name = f"leaf_{i}.png"
        raster.write_png(data_dir / name, rgb)
        leaves[name] = (spec.name, terminals)
    (data_dir / "notes.txt").write_text("not an image")
    # pre-annotate the first image
    first = sorted(leaves)[0]
    (data_dir / f"{first}.terminals.json").write_text(
        json.dumps(leaves[first][1].to_dict())
    )
    app = create_app(bundle, data_dir)
    return {
        "client": TestClient(app),
        "data_dir": data_dir,
        "leaves": leaves,
        "bundle": bundle,
        "annotated": first,
    }


class TestListImages:
    def test_lists_images_sorted_with_flags(self, service_env):
        response = service_env["client"].get("/api/images")
        assert response.status_code == 200
        items = response.json()
        names = [i["image_id"] for i in items]
        assert names == sorted(service_env["leaves"])
        assert "notes.txt" not in names
        flags = {i["image_id"]: i["has_terminals"] for i in items}
        assert flags[service_env["annotated"]] is True
        assert sum(flags.values()) >= 1

    def test_empty_directory(self, tmp_path, service_env):
        app = create_app(service_env["bundle"], tmp_path)
        assert TestClient(app).get("/api/images").json() == []

    def test_unreadable_directory_fails_at_startup(self, service_env, tmp_path):
        with pytest.raises(ValueError, match="data directory"):
            create_app(service_env["bundle"], tmp_path / "missing")


class TestImageBytes:
    def test_serves_image_bytes(self, service_env):
        name = service_env["annotated"]
        response = service_env["client"].get(f"/api/images/{name}")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert response.content == (service_env["data_dir"] / name).read_bytes()

    def test_unknown_image_404_shape(self, service_env):
        response = service_env["client"].get("/api/images/ghost.png")
        assert response.status_code == 404
        body = response.json()
        assert body["code"] == 404 and "ghost.png" in body["message"]


class TestPutTerminals:
    def test_round_trip(self, service_env):
        name = sorted(service_env["leaves"])[1]
        payload = {"a": {"x": 10, "y": 20}, "b": {"x": 90, "y": 100}}
        response = service_env["client"].put(f"/api/images/{name}/terminals", json=payload)
        assert response.status_code == 200
        record = response.json()
        assert record["a"] == payload["a"] and record["b"] == payload["b"]
        assert record["image_id"] == name
        assert "annotated_at" in record

        stored = service_env["client"].get(f"/api/images/{name}/terminals").json()
        assert stored["a"] == payload["a"] and stored["b"] == payload["b"]
        sidecar = service_env["data_dir"] / f"{name}.terminals.json"
        assert json.loads(sidecar.read_text())["a"] == payload["a"]
        # atomic write leaves no temp droppings
        assert not list(service_env["data_dir"].glob("*.tmp"))

    def test_degenerate_pair_rejected(self, service_env):
        name = service_env["annotated"]
        payload = {"a": {"x": 5, "y": 5}, "b": {"x": 5, "y": 5}}
        response = service_env["client"].put(f"/api/images/{name}/terminals", json=payload)
        assert response.status_code == 422
        assert "degenerate" in response.json()["message"]

    def test_out_of_bounds_rejected(self, service_env):
        name = service_env["annotated"]
        payload = {"a": {"x": 900, "y": 5}, "b": {"x": 5, "y": 9}}
        response = service_env["client"].put(f"/api/images/{name}/terminals", json=payload)
        assert response.status_code == 422
        assert "outside" in response.json()["message"]

    def test_unknown_image_rejected(self, service_env):
        payload = {"a": {"x": 1, "y": 1}, "b": {"x": 2, "y": 2}}
        response = service_env["client"].put("/api/images/ghost.png/terminals", json=payload)
        assert response.status_code == 404

    def test_malformed_body_rejected(self, service_env):
        name = service_env["annotated"]
        response = service_env["client"].put(
            f"/api/images/{name}/terminals", json={"a": {"x": "left", "y": 0}}
        )
        assert response.status_code == 422
        assert response.json()["code"] == 422

    def test_missing_terminals_404(self, service_env):
        name = sorted(service_env["leaves"])[2]
        response = service_env["client"].get(f"/api/images/{name}/terminals")
        assert response.status_code == 404


class TestClassifyEndpoint:
    def test_unannotated_image_conflicts(self, service_env):
        name = sorted(service_env["leaves"])[2]
        response = service_env["client"].post(f"/api/images/{name}/classify")
        assert response.status_code == 409
        assert "annotate first" in response.json()["message"]

    def test_annotated_image_ranks_own_species(self, service_env):
        name = service_env["annotated"]
        response = service_env["client"].post(f"/api/images/{name}/classify?k=3")
        assert response.status_code == 200
        body = response.json()
        ranking = body["ranking"]
        assert len(ranking) == 3
        assert ranking[0]["class_name"] == service_env["leaves"][name][0]
        scores = [r["score"] for r in ranking]
        assert scores == sorted(scores, reverse=True)

    def test_matches_direct_pipeline_call(self, service_env):
        name = service_env["annotated"]
        via_http = service_env["client"].post(f"/api/images/{name}/classify?k=3").json()
        direct = pipeline.classify_image(
            service_env["bundle"],
            service_env["data_dir"] / name,
            service_env["leaves"][name][1],
            k=3,
        )
        assert [r["class_name"] for r in via_http["ranking"]] == [r.name for r in direct]
        assert [r["score"] for r in via_http["ranking"]] == [r.score for r in direct]

    def test_k_clamped_to_class_count(self, service_env):
        name = service_env["annotated"]
        response = service_env["client"].post(f"/api/images/{name}/classify?k=99")
        assert len(response.json()["ranking"]) == len(service_env["bundle"].class_names)


class TestRoot:
    def test_fallback_page_served(self, service_env):
        response = service_env["client"].get("/")
        assert response.status_code == 200
        assert "leafrec" in response.text

import io
import json
import threading
import time

import pytest
from fastapi.testclient import TestClient

import ccss.database as dbmod
from ccss.cli import main
from ccss.database import DatabaseParams, ModelDatabase
from ccss.service.app import create_app
from ccss.synthetic import class_name, generate_hull, render_mask


@pytest.fixture(scope="module")
def db(tmp_path_factory):
    sources = []
    for i in range(4):
        spec = generate_hull(700 + i)
        sources.append((f"m{i}", f"Model {i}", class_name(spec), render_mask(spec), ""))
    return ModelDatabase.build(sources, DatabaseParams())


@pytest.fixture(scope="module")
def db_dir(db, tmp_path_factory):
    d = tmp_path_factory.mktemp("svcdb")
    dbmod.save(db, str(d))
    return d


@pytest.fixture()
def client(db, tmp_path):
    app = create_app(db=db, decision_log_path=str(tmp_path / "decisions.log"))
    with TestClient(app) as c:
        yield c


def mask_png_bytes(seed=700) -> bytes:
    from PIL import Image
    import numpy as np

    arr = (render_mask(generate_hull(seed)).astype(np.uint8)) * 255
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


class TestHealth:
    def test_503_while_loading_then_200(self, db_dir, tmp_path, monkeypatch):
        gate = threading.Event()
        real_load = dbmod.load

        def slow_load(path):
            gate.wait(timeout=10)
            return real_load(path)

        monkeypatch.setattr(dbmod, "load", slow_load)
        app = create_app(db_dir=str(db_dir), decision_log_path=str(tmp_path / "d.log"))
        with TestClient(app) as c:
            assert c.get("/api/health").status_code == 503
            gate.set()
            for _ in range(100):
                resp = c.get("/api/health")
                if resp.status_code == 200:
                    break
                time.sleep(0.05)
            assert resp.status_code == 200
            assert resp.json()["models"] == 4

    def test_load_failure_reported(self, tmp_path):
        app = create_app(db_dir=str(tmp_path / "nothing"),
                         decision_log_path=str(tmp_path / "d.log"))
        with TestClient(app) as c:
            for _ in range(100):
                resp = c.get("/api/health")
                if resp.status_code == 503 and "loading" not in resp.json()["status"]:
                    break
                time.sleep(0.05)
            assert resp.status_code == 503


class TestQueryEndpoint:
    def test_self_query_rank_one(self, client):
        resp = client.post("/api/query", files={"mask": ("m.png", mask_png_bytes(700))})
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["entries"][0]["id"] == "m0"
        assert doc["entries"][0]["cost"] < 1e-6
        assert doc["entries"][0]["rank"] == 1

    def test_params_respected(self, client):
        resp = client.post(
            "/api/query?alpha=0.3&sigma_gain=10&top_k=2",
            files={"mask": ("m.png", mask_png_bytes(701))},
        )
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["params"]["alpha"] == 0.3
        assert len(doc["entries"]) == 2

    def test_malformed_upload_400(self, client):
        resp = client.post("/api/query", files={"mask": ("m.png", b"not an image")})
        assert resp.status_code == 400

    def test_empty_mask_400(self, client):
        from PIL import Image

        buf = io.BytesIO()
        Image.new("L", (32, 32), 0).save(buf, format="PNG")
        resp = client.post("/api/query", files={"mask": ("m.png", buf.getvalue())})
        assert resp.status_code == 400

    def test_byte_identical_with_cli(self, client, db_dir, tmp_path, capsys):
        data = mask_png_bytes(702)
        target = tmp_path / "target.png"
        target.write_bytes(data)
        rc = main(["query", str(target), "--db-dir", str(db_dir), "--json", "--top-k", "3"])
        assert rc == 0
        cli_doc = capsys.readouterr().out.strip().encode()
        resp = client.post("/api/query?top_k=3", files={"mask": ("t.png", data)})
        assert resp.content == cli_doc


class TestModelEndpoints:
    def test_model_info(self, client):
        resp = client.get("/api/models/m1")
        assert resp.status_code == 200
        info = resp.json()
        assert info["display_name"] == "Model 1"
        assert len(info["silhouette"]) == 512
        assert len(info["silhouette"][0]) == 2

    def test_unknown_model_404(self, client):
        assert client.get("/api/models/nope").status_code == 404

    def test_render_endpoint_png(self, client):
        resp = client.get("/api/models/m2/render")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"


class TestDecisions:
    def test_append_and_idempotency(self, db, tmp_path):
        log_path = tmp_path / "decisions.log"
        app = create_app(db=db, decision_log_path=str(log_path))
        with TestClient(app) as c:
            body = {
                "query_sha256": "ab" * 32,
                "model_id": "m0",
                "note": "confirmed",
                "idempotency_key": "k-1",
            }
            r1 = c.post("/api/decisions", json=body)
            assert r1.status_code == 200 and r1.json()["logged"]
            r2 = c.post("/api/decisions", json=body)
            assert r2.json()["duplicate"]
            lines = log_path.read_text().strip().splitlines()
            assert len(lines) == 1
            entry = json.loads(lines[0])
            assert entry["model_id"] == "m0"
            assert entry["note"] == "confirmed"

    def test_empty_note_accepted(self, db, tmp_path):
        app = create_app(db=db, decision_log_path=str(tmp_path / "d.log"))
        with TestClient(app) as c:
            r = c.post("/api/decisions", json={"query_sha256": "x", "model_id": "m1"})
            assert r.status_code == 200

    def test_unknown_model_404(self, db, tmp_path):
        app = create_app(db=db, decision_log_path=str(tmp_path / "d.log"))
        with TestClient(app) as c:
            r = c.post("/api/decisions", json={"query_sha256": "x", "model_id": "ghost"})
            assert r.status_code == 404

    def test_restart_never_truncates(self, db, tmp_path):
        log_path = tmp_path / "decisions.log"
        for key in ("a", "b"):
            app = create_app(db=db, decision_log_path=str(log_path))
            with TestClient(app) as c:
                c.post("/api/decisions", json={
                    "query_sha256": "x", "model_id": "m0", "idempotency_key": key,
                })
        lines = log_path.read_text().strip().splitlines()
        assert len(lines) == 2
        # keys survive restart: resubmitting an old key is still a duplicate
        app = create_app(db=db, decision_log_path=str(log_path))
        with TestClient(app) as c:
            r = c.post("/api/decisions", json={
                "query_sha256": "x", "model_id": "m0", "idempotency_key": "a",
            })
            assert r.json()["duplicate"]

import concurrent.futures
import json
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

from aldisplay.server import create_app
from conftest import write_pool_files


def write_labeled_pool(tmp_path, n=24, name="srv"):
    rng = np.random.default_rng(0)
    rows = []
    for i in range(n):
        truth = 1 if i % 4 == 0 else 0
        base = 5.0 if truth else 0.0
        rows.append((i, base + rng.normal(), base + rng.normal(), truth))
    return write_pool_files(tmp_path, rows, d=2, name=name)


SESSION_CONFIG = {
    "strategy": "rl-adaptive",
    "budget_fraction": 0.5,
    "display": {"initial": 3, "min_size": 2, "max_size": 8, "step": 1},
    "clusters": 4,
    "classifier": {"max_epochs": 40},
    "seed": 3,
}


@pytest.fixture
def client(tmp_path):
    app = create_app()
    with TestClient(app) as c:
        c.manifest_path = write_labeled_pool(tmp_path)
        yield c


def register_pool(client):
    manifest = json.load(open(client.manifest_path))
    manifest["csv"] = os.path.join(
        os.path.dirname(client.manifest_path), manifest["csv"]
    )
    resp = client.post("/pools", json=manifest)
    assert resp.status_code == 201
    return resp.json()["pool_id"]


def create_session(client, pool_id, config=SESSION_CONFIG):
    resp = client.post("/sessions", json={"pool_id": pool_id, "config": config})
    assert resp.status_code == 201
    return resp.json()


class TestHealthAndPools:
    def test_health(self, client):
        assert client.get("/health").status_code == 200

    def test_pool_roundtrip(self, client):
        pool_id = register_pool(client)
        pools = client.get("/pools").json()
        assert any(p["pool_id"] == pool_id and p["n"] == 24 for p in pools)

    def test_duplicate_id_rejected_with_row(self, client, tmp_path):
        path = write_pool_files(
            tmp_path, [(0, 1.0, 2.0, 1), (0, 3.0, 4.0, 0)], name="dup"
        )
        manifest = json.load(open(path))
        manifest["csv"] = os.path.join(os.path.dirname(path), manifest["csv"])
        resp = client.post("/pools", json=manifest)
        assert resp.status_code == 400
        assert "row 3" in resp.json()["detail"]

    def test_reupload_gets_distinct_id(self, client):
        assert register_pool(client) != register_pool(client)


class TestSessions:
    def test_create_returns_first_display(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        assert len(body["display"]) == 3
        assert body["iteration"] == 0
        assert body["budget"]["used"] == 0
        assert all("features" in item for item in body["display"])

    def test_unknown_pool_404(self, client):
        resp = client.post("/sessions", json={"pool_id": "nope", "config": {}})
        assert resp.status_code == 404

    def test_budget_smaller_than_display_400(self, client):
        pool_id = register_pool(client)
        config = dict(SESSION_CONFIG, budget_fraction=0.1)  # 2 < 3
        resp = client.post(
            "/sessions", json={"pool_id": pool_id, "config": config}
        )
        assert resp.status_code == 400

    def test_distinct_session_ids(self, client):
        pool_id = register_pool(client)
        a = create_session(client, pool_id)["session_id"]
        b = create_session(client, pool_id)["session_id"]
        assert a != b

    def test_bad_config_400(self, client):
        pool_id = register_pool(client)
        resp = client.post(
            "/sessions",
            json={"pool_id": pool_id, "config": {"strategy": "bogus"}},
        )
        assert resp.status_code == 400


class TestLabels:
    def test_full_labeling_loop(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        display = body["display"]
        iterations = 0
        while True:
            labels = [{"id": item["id"], "label": 1} for item in display]
            resp = client.post(f"/sessions/{sid}/labels", json={"labels": labels})
            assert resp.status_code == 200
            data = resp.json()
            iterations += 1
            assert data["metrics"]["iteration"] == iterations
            if data["done"]:
                assert data["next_display"] == []
                break
            display = data["next_display"]
        status = client.get(f"/sessions/{sid}").json()
        assert status["done"] is True
        assert status["budget"]["used"] == status["budget"]["max_labels"] == 6
        assert len(status["eer_history"]) == iterations

    def test_mismatch_409_lists_ids(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        wrong = [{"id": body["display"][0]["id"], "label": 0}]
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": wrong})
        assert resp.status_code == 409
        assert len(resp.json()["detail"]["missing_ids"]) == 2

    def test_resubmission_after_consumption_409(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        labels = [{"id": i["id"], "label": 0} for i in body["display"]]
        assert (
            client.post(f"/sessions/{sid}/labels", json={"labels": labels}).status_code
            == 200
        )
        resp = client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert resp.status_code == 409

    def test_submission_after_done_410(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        display = body["display"]
        done = False
        while not done:
            labels = [{"id": i["id"], "label": 0} for i in display]
            data = client.post(
                f"/sessions/{sid}/labels", json={"labels": labels}
            ).json()
            done, display = data["done"], data["next_display"]
        resp = client.post(
            f"/sessions/{sid}/labels", json={"labels": [{"id": 0, "label": 0}]}
        )
        assert resp.status_code == 410

    def test_concurrent_submissions_apply_once(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        labels = [{"id": i["id"], "label": 0} for i in body["display"]]

        def submit():
            return client.post(
                f"/sessions/{sid}/labels", json={"labels": labels}
            ).status_code

        with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
            codes = sorted(pool.map(lambda _: submit(), range(2)))
        assert codes == [200, 409]
        status = client.get(f"/sessions/{sid}").json()
        assert status["budget"]["used"] == 3


class TestStatus:
    def test_fresh_session(self, client):
        pool_id = register_pool(client)
        sid = create_session(client, pool_id)["session_id"]
        status = client.get(f"/sessions/{sid}").json()
        assert status["iteration"] == 0
        assert status["eer_history"] == []
        assert status["samp_pct"] == 0.0
        assert len(status["current_display"]) == 3

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/missing").status_code == 404

    def test_samp_consistent_with_history(self, client):
        from aldisplay.pool import sampling_rate

        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        labels = [{"id": i["id"], "label": 0} for i in body["display"]]
        client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        status = client.get(f"/sessions/{sid}").json()
        sizes = [r["display_size"] for r in status["eer_history"]]
        assert status["samp_pct"] == sampling_rate(sizes, 12)

    def test_runlog_download(self, client):
        pool_id = register_pool(client)
        body = create_session(client, pool_id)
        sid = body["session_id"]
        labels = [{"id": i["id"], "label": 1} for i in body["display"]]
        client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        text = client.get(f"/sessions/{sid}/runlog").text
        lines = [json.loads(ln) for ln in text.strip().splitlines()]
        assert lines[0]["type"] == "meta"
        assert lines[1]["type"] == "record"
        assert lines[1]["labels"] == {
            str(i["id"]): 1 for i in body["display"]
        }


class TestPersistence:
    def test_checkpoints_written(self, tmp_path):
        state = tmp_path / "state"
        app = create_app(state_dir=str(state))
        with TestClient(app) as client:
            client.manifest_path = write_labeled_pool(tmp_path)
            pool_id = register_pool(client)
            body = create_session(client, pool_id)
            sid = body["session_id"]
            labels = [{"id": i["id"], "label": 0} for i in body["display"]]
            client.post(f"/sessions/{sid}/labels", json={"labels": labels})
        assert (state / sid / "runlog.jsonl").exists()
        labeled = json.loads((state / sid / "labeled.json").read_text())
        assert len(labeled["entries"]) == 3

    def test_env_var_configures_state_dir(self, tmp_path, monkeypatch):
        state = tmp_path / "envstate"
        monkeypatch.setenv("ALDISPLAY_STATE_DIR", str(state))
        app = create_app()
        assert app.state.store.state_dir == str(state)


class TestImages:
    def test_image_served_and_missing_cases(self, tmp_path):
        imgdir = tmp_path / "imgs"
        imgdir.mkdir()
        (imgdir / "0_before.png").write_bytes(b"beforebytes")
        (imgdir / "0_after.png").write_bytes(b"afterbytes")
        rows = [(0, 0.0, 0.0, 1), (1, 1.0, 1.0, 0)]
        path = write_pool_files(tmp_path, rows, name="img", images_dir="imgs")
        app = create_app()
        with TestClient(app) as client:
            manifest = json.load(open(path))
            manifest["csv"] = str(tmp_path / manifest["csv"])
            manifest["images_dir"] = str(imgdir)
            pool_id = client.post("/pools", json=manifest).json()["pool_id"]
            ok = client.get(f"/pools/{pool_id}/items/0/before.png")
            assert ok.status_code == 200 and ok.content == b"beforebytes"
            assert (
                client.get(f"/pools/{pool_id}/items/1/before.png").status_code == 404
            )
            assert (
                client.get(f"/pools/{pool_id}/items/0/sideways.png").status_code == 404
            )

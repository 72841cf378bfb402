"""HTTP surface: endpoint parity with the in-process operations."""

import pytest
from fastapi.testclient import TestClient

from evacsim import __version__
from evacsim.config import load_scenario
from evacsim.metrics import RunMetrics
from evacsim.service import ops
from evacsim.service.app import app

client = TestClient(app)

SCENARIO = {
    "bandwidth_gbps": 1,
    "clients_per_dc": 2,
    "mean_interarrival_s": 0.5,
    "attack_at_s": 3,
    "window_s": 1.5,
    "risk_set": ["DC1", "DC2"],
    "policy": "sla",
    "seed": 7,
}

MATRIX = {"bandwidths_gbps": [1], "clients": [2], "policies": ["sla", "lifo"], "replications": 2}


class TestHealth:
    def test_healthz(self):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}


class TestRun:
    def test_matches_in_process_run(self):
        response = client.post("/run", json={"scenario": SCENARIO})
        assert response.status_code == 200
        body = response.json()["metrics"]
        expected = ops.run_op(load_scenario(SCENARIO))
        assert body == expected.to_dict()
        assert RunMetrics.from_dict(body) == expected

    def test_policy_override(self):
        response = client.post("/run", json={"scenario": SCENARIO, "policy": "lifo"})
        assert response.status_code == 200
        assert response.json()["metrics"]["policy"] == "lifo"

    def test_seed_override_changes_run(self):
        a = client.post("/run", json={"scenario": SCENARIO, "seed": 1}).json()["metrics"]
        b = client.post("/run", json={"scenario": SCENARIO, "seed": 2}).json()["metrics"]
        assert a["seed"] == 1 and b["seed"] == 2
        assert a != b

    def test_missing_policy_is_400(self):
        scenario = {k: v for k, v in SCENARIO.items() if k != "policy"}
        response = client.post("/run", json={"scenario": scenario})
        assert response.status_code == 400
        assert "policy" in response.json()["detail"]

    def test_bad_window_is_400(self):
        scenario = dict(SCENARIO, window_s=99)
        response = client.post("/run", json={"scenario": scenario})
        assert response.status_code == 400
        assert "window_s" in response.json()["detail"]

    def test_malformed_body_is_422(self):
        response = client.post("/run", json={"scenario": {"bandwidth_gbps": 1}})
        assert response.status_code == 422


class TestMatrix:
    def test_runs_all_cells(self):
        response = client.post("/matrix", json={"scenario": SCENARIO, "matrix": MATRIX})
        assert response.status_code == 200
        body = response.json()
        assert body["errors"] == []
        assert len(body["runs"]) == 4
        ids = [r["run_id"] for r in body["runs"]]
        assert ids == sorted(ids)
        policies = {r["policy"] for r in body["runs"]}
        assert policies == {"sla", "lifo"}

    def test_replications_override(self):
        response = client.post(
            "/matrix",
            json={"scenario": SCENARIO, "matrix": MATRIX, "replications": 1},
        )
        assert len(response.json()["runs"]) == 2

    def test_matches_in_process_matrix(self):
        response = client.post("/matrix", json={"scenario": SCENARIO, "matrix": MATRIX})
        records = ops.matrix_op(load_scenario(SCENARIO), dict(MATRIX))
        expected = [r.metrics.to_dict() for r in records if r.metrics is not None]
        assert response.json()["runs"] == expected

    def test_bad_matrix_is_400(self):
        response = client.post(
            "/matrix",
            json={"scenario": SCENARIO, "matrix": dict(MATRIX, clients=[])},
        )
        assert response.status_code == 400


class TestAnalyze:
    def rows(self):
        records = ops.matrix_op(load_scenario(SCENARIO), dict(MATRIX))
        from evacsim.harness import rows_from_records

        return rows_from_records(records)

    def test_matches_in_process_summary(self):
        rows = self.rows()
        response = client.post("/analyze", json={"rows": rows})
        assert response.status_code == 200
        assert response.json()["summary"] == ops.analyze_rows_op(rows)

    def test_rows_missing_keys_is_400(self):
        response = client.post("/analyze", json={"rows": [{"policy": "sla"}]})
        assert response.status_code == 400


class TestFactorial:
    FACTORS = [
        {"id": "A", "name": "window", "low": 10, "high": 20},
        {"id": "B", "name": "bandwidth", "low": 1, "high": 10},
    ]

    def test_known_effects(self):
        # y = 10 + 3A + 5B + AB over the Yates rows.
        responses = [3.0, 7.0, 11.0, 19.0]
        body = client.post(
            "/factorial", json={"factors": self.FACTORS, "responses": responses}
        ).json()
        assert body["effects"]["mean"] == pytest.approx(10.0)
        assert body["effects"]["A"] == pytest.approx(3.0)
        assert body["effects"]["B"] == pytest.approx(5.0)
        assert body["effects"]["AB"] == pytest.approx(1.0)
        assert body["impacts"]["B"] > body["impacts"]["A"] > body["impacts"]["AB"]
        assert sum(body["impacts"].values()) == pytest.approx(100.0)
        assert "impact %" in body["report"]

    def test_wrong_response_count_is_400(self):
        response = client.post(
            "/factorial", json={"factors": self.FACTORS, "responses": [1.0, 2.0]}
        )
        assert response.status_code == 400
        assert "4 responses" in response.json()["detail"]

    def test_flat_responses_is_400(self):
        response = client.post(
            "/factorial", json={"factors": self.FACTORS, "responses": [5.0] * 4}
        )
        assert response.status_code == 400

    def test_bad_factor_id_is_400(self):
        factors = [{"id": "ab", "name": "x", "low": 0, "high": 1}]
        response = client.post(
            "/factorial", json={"factors": factors, "responses": [1.0, 2.0]}
        )
        assert response.status_code == 400

"""HTTP layer: response codes, error kinds, byte-stable report bodies."""

import json

from fastapi.testclient import TestClient
from pytest import fixture, mark, raises

from finslerkit import __version__
from finslerkit.service import app


@fixture(scope="module")
def client():
    return TestClient(app)


EVAL_JOB = {
    "schema_version": 1,
    "command": "eval",
    "metric": {"kind": "funk", "n": 2},
    "quantities": ["F", "S"],
    "samples": {"count": 3, "seed": 5},
}


class TestHealth:
    def test_health_reports_versions(self, client):
        r = client.get("/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": __version__,
                            "schema_version": 1}


class TestRunEndpoint:
    def test_valid_job_returns_report(self, client):
        r = client.post("/v1/run", json=EVAL_JOB)
        assert r.status_code == 200
        assert r.headers["content-type"].startswith("application/json")
        doc = r.json()
        assert doc["status"] == "pass"
        assert doc["meta"]["metric"] == "funk(++)"
        assert len(doc["tensors"]) == 3 * 2

    def test_identical_jobs_give_identical_bytes(self, client):
        one = client.post("/v1/run", json=EVAL_JOB)
        two = client.post("/v1/run", json=EVAL_JOB)
        assert one.content == two.content
        assert one.content.endswith(b"\n")

    def test_residual_failure_is_still_a_report(self, client):
        # an absurd tolerance fails checks but is not a transport error
        job = {"schema_version": 1, "command": "verify",
               "metric": {"kind": "euclidean", "n": 2},
               "samples": {"count": 5, "seed": 0}, "tol": 1e-18}
        r = client.post("/v1/run", json=job)
        assert r.status_code == 200
        assert r.json()["status"] == "fail"

    @mark.parametrize("label,body", [
        ("array body", [1, 2, 3]),
        ("string body", "eval"),
        ("wrong schema version", {**EVAL_JOB, "schema_version": 3}),
        ("extra key", {**EVAL_JOB, "mode": "fast"}),
        ("unknown quantity", {**EVAL_JOB, "quantities": ["Q"]}),
        ("missing metric",
         {"schema_version": 1, "command": "verify"}),
    ])
    def test_schema_problems_are_422_schema(self, client, label, body):
        r = client.post("/v1/run", json=body)
        assert r.status_code == 422
        doc = r.json()
        assert doc["kind"] == "schema"
        assert doc["detail"]

    def test_domain_problems_are_422_domain(self, client):
        # an indefinite a_ij is only discovered at an evaluation point
        metric = {
            "kind": "polynomial", "n": 2,
            "a": [[[{"powers": [0, 0], "coeff": -1.0}], []],
                  [[], [{"powers": [0, 0], "coeff": 1.0}]]],
            "b": [[], []],
        }
        job = {"schema_version": 1, "command": "eval", "metric": metric,
               "quantities": ["F"], "samples": {"count": 2, "seed": 0}}
        r = client.post("/v1/run", json=job)
        assert r.status_code == 422
        doc = r.json()
        assert doc["kind"] == "domain"
        assert "point" in doc["detail"]

    def test_report_body_is_canonical_json(self, client):
        r = client.post("/v1/run", json=EVAL_JOB)
        doc = json.loads(r.content)
        redumped = (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode()
        assert redumped == r.content

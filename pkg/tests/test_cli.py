"""CLI behavior: in-process transport, overrides, outputs, exit codes."""

import filecmp
import json
import sys
import types

from pytest import fixture, mark

from finslerkit.cli import main


@fixture
def job_file(tmp_path):
    def write(doc, name="job.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


EVAL_JOB = {
    "schema_version": 1,
    "command": "eval",
    "metric": {"kind": "funk", "n": 2},
    "quantities": ["F"],
    "samples": {"count": 3, "seed": 5},
}
VERIFY_JOB = {
    "schema_version": 1,
    "command": "verify",
    "metric": {"kind": "euclidean", "n": 2},
    "samples": {"count": 5, "seed": 0},
}


class TestRunExitCodes:
    def test_passing_job_exits_zero(self, job_file, tmp_path):
        out = tmp_path / "report.json"
        assert main(["--job", job_file(EVAL_JOB), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["status"] == "pass"
        assert report["meta"]["metric"] == "funk(++)"

    def test_residual_failure_exits_one(self, job_file, tmp_path):
        out = tmp_path / "report.json"
        code = main(["--job", job_file(VERIFY_JOB), "--out", str(out),
                     "--tol", "1e-18"])
        assert code == 1
        assert json.loads(out.read_text())["status"] == "fail"

    def test_missing_job_file_exits_two(self, tmp_path, capsys):
        assert main(["--job", str(tmp_path / "absent.json")]) == 2
        assert "cannot read job" in capsys.readouterr().err

    def test_unparseable_job_exits_two(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["--job", str(path)]) == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_non_object_job_exits_two(self, job_file, capsys):
        assert main(["--job", job_file([1, 2, 3])]) == 2
        assert "JSON object" in capsys.readouterr().err

    def test_schema_rejection_exits_two(self, job_file, capsys):
        bad = {**EVAL_JOB, "metric": {"kind": "euclidean", "n": 7}}
        assert main(["--job", job_file(bad)]) == 2
        err = capsys.readouterr().err
        assert "service returned 422" in err and "schema" in err


class TestOutputs:
    def test_repeated_runs_are_byte_identical(self, job_file, tmp_path):
        job = job_file(EVAL_JOB)
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(["--job", job, "--out", a]) == 0
        assert main(["--job", job, "--out", b]) == 0
        assert filecmp.cmp(a, b, shallow=False)

    def test_default_output_is_stdout(self, job_file, capsysbinary):
        assert main(["--job", job_file(EVAL_JOB)]) == 0
        blob = capsysbinary.readouterr().out
        assert blob.endswith(b"\n")
        assert json.loads(blob)["status"] == "pass"

    def test_job_out_field_is_honored(self, job_file, tmp_path):
        target = tmp_path / "from_job.json"
        doc = {**EVAL_JOB, "out": str(target)}
        assert main(["--job", job_file(doc)]) == 0
        assert json.loads(target.read_text())["meta"]["command"] == "eval"

    def test_out_flag_beats_job_out_field(self, job_file, tmp_path):
        from_job = tmp_path / "from_job.json"
        from_flag = tmp_path / "from_flag.json"
        doc = {**EVAL_JOB, "out": str(from_job)}
        assert main(["--job", job_file(doc), "--out", str(from_flag)]) == 0
        assert from_flag.exists() and not from_job.exists()


class TestOverrides:
    def test_seed_tol_order_reach_the_report(self, job_file, tmp_path):
        doc = {"schema_version": 1, "command": "eval",
               "metric": {"kind": "euclidean", "n": 2}, "quantities": ["F"]}
        out = tmp_path / "r.json"
        code = main(["--job", job_file(doc), "--out", str(out),
                     "--seed", "9", "--tol", "0.5", "--order", "4"])
        assert code == 0
        meta = json.loads(out.read_text())["meta"]
        assert meta["seed"] == 9
        assert meta["tol"] == 0.5
        assert meta["order"] == 4
        assert meta["sample_count"] == 25  # spec default kept

    def test_seed_override_changes_sample_points(self, job_file, tmp_path):
        job = job_file(EVAL_JOB)
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(["--job", job, "--out", a, "--seed", "1"]) == 0
        assert main(["--job", job, "--out", b, "--seed", "2"]) == 0
        assert not filecmp.cmp(a, b, shallow=False)


class TestServe:
    def test_serve_without_uvicorn_exits_two(self, monkeypatch, capsys):
        monkeypatch.setitem(sys.modules, "uvicorn", None)
        assert main(["serve"]) == 2
        assert "uvicorn" in capsys.readouterr().err

    def test_serve_invokes_uvicorn(self, monkeypatch):
        calls = {}

        def fake_run(app, **kw):
            calls["app"] = app
            calls.update(kw)

        monkeypatch.setitem(sys.modules, "uvicorn",
                            types.SimpleNamespace(run=fake_run))
        assert main(["serve", "--port", "9000"]) == 0
        from finslerkit.service import app

        assert calls["app"] is app
        assert calls["host"] == "127.0.0.1"
        assert calls["port"] == 9000

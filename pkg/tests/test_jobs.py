"""Job validation, the five runners, and canonical report serialization."""

import json
from pathlib import Path

import numpy as np
from pytest import approx, mark, raises

from finslerkit import __version__
from finslerkit.errors import SchemaError
from finslerkit.jobs import (
    SCHEMA_VERSION,
    JobSpec,
    RunReport,
    build_metric,
    canonical_json,
    run_classify,
    run_dim_scan,
    run_eval,
    run_job,
    run_report,
    run_verify,
    validate_job,
)

GOLDEN = Path(__file__).parent / "golden"


def job(command, metric, **extra):
    doc = {"schema_version": 1, "command": command, "metric": metric}
    doc.update(extra)
    return validate_job(doc)


def assert_json_close(got, want, rel=1e-9, path="$"):
    """Recursive compare of parsed JSON; floats up to rel, rest exact."""
    if isinstance(want, dict):
        assert isinstance(got, dict), path
        assert sorted(got) == sorted(want), path
        for key in want:
            assert_json_close(got[key], want[key], rel, f"{path}.{key}")
    elif isinstance(want, list):
        assert isinstance(got, list), path
        assert len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            assert_json_close(g, w, rel, f"{path}[{i}]")
    elif isinstance(want, float) and not isinstance(want, bool):
        assert got == approx(want, rel=rel, abs=1e-12), path
    else:
        assert got == want, path


class TestValidateJob:
    def test_minimal_job_fills_defaults(self):
        spec = job("verify", {"kind": "euclidean", "n": 2})
        assert spec.schema_version == SCHEMA_VERSION
        assert spec.command == "verify"
        assert spec.metric.kind == "euclidean"
        assert spec.samples.count == 25
        assert spec.samples.seed == 0
        assert spec.samples.radius == approx(0.7)
        assert spec.tol is None and spec.order is None and spec.out is None
        assert spec.fields == [] and spec.quantities == []

    def test_round_trips_through_model_dump(self):
        spec = job("eval", {"kind": "funk", "n": 3, "a": [0.5, 0.0, 0.0]},
                   quantities=["F", "S"], tol=1e-7, order=6, out="r.json")
        again = validate_job(spec.model_dump(mode="json"))
        assert again == spec

    @mark.parametrize("doc", [
        [],
        "verify",
        42,
        None,
    ])
    def test_non_object_documents_rejected(self, doc):
        with raises(SchemaError):
            validate_job(doc)

    @mark.parametrize("label,doc", [
        ("missing command",
         {"schema_version": 1, "metric": {"kind": "euclidean", "n": 2}}),
        ("missing metric", {"schema_version": 1, "command": "verify"}),
        ("unknown command",
         {"schema_version": 1, "command": "solve",
          "metric": {"kind": "euclidean", "n": 2}}),
        ("wrong schema version",
         {"schema_version": 2, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2}}),
        ("extra top-level key",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2}, "verbose": True}),
        ("unknown metric kind",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "riemann", "n": 2}}),
        ("dimension too large",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 5}}),
        ("dimension too small",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 1}}),
        ("extra metric key",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2, "radius": 1.0}}),
        ("bad funk sign",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "funk", "n": 2, "sign1": 2}}),
        ("minkowski without drift",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "minkowski", "n": 2}}),
        ("nonpositive tol",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2}, "tol": 0.0}),
        ("order too high",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2}, "order": 11}),
        ("order too low",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2}, "order": 1}),
        ("sample count too large",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2},
          "samples": {"count": 501}}),
        ("radius beyond unit ball",
         {"schema_version": 1, "command": "verify",
          "metric": {"kind": "euclidean", "n": 2},
          "samples": {"radius": 0.95}}),
        ("unknown field family",
         {"schema_version": 1, "command": "classify",
          "metric": {"kind": "euclidean", "n": 2},
          "fields": [{"kind": "family", "name": "conformal"}]}),
    ])
    def test_bad_documents_raise_schema_error(self, label, doc):
        with raises(SchemaError):
            validate_job(doc)


class TestBuildMetric:
    @mark.parametrize("metric,name", [
        ({"kind": "euclidean", "n": 2}, "euclidean"),
        ({"kind": "klein", "n": 3}, "klein"),
        ({"kind": "funk", "n": 2}, "funk(++)"),
        ({"kind": "funk", "n": 2, "sign1": -1, "sign2": 1}, "funk(-+)"),
        ({"kind": "minkowski", "n": 2, "b": [0.5, 0.0]}, "minkowski-randers"),
        ({"kind": "perturbed", "n": 2, "seed": 1}, "perturbed-randers(seed=1)"),
    ])
    def test_builtin_kinds(self, metric, name):
        spec = job("verify", metric)
        model = build_metric(spec.metric)
        assert model.name == name
        assert model.n == metric["n"]

    def test_polynomial_kind(self):
        b = [[{"powers": [0, 0], "coeff": 0.2}], []]
        spec = job("verify", {"kind": "polynomial", "n": 2, "b": b})
        model = build_metric(spec.metric)
        assert model.name == "polynomial-randers"
        assert model.value((0.0, 0.0), (1.0, 0.0)) == approx(1.2)

    def test_invalid_payload_becomes_schema_error(self):
        # library-level InvalidSpec surfaces as a schema problem
        spec = job("verify", {"kind": "minkowski", "n": 2, "b": [1.2, 0.0]})
        with raises(SchemaError):
            build_metric(spec.metric)


class TestRunEval:
    def test_funk_s_is_isotropic_multiple_of_f(self):
        spec = job("eval", {"kind": "funk", "n": 2}, quantities=["F", "S"],
                   samples={"count": 5, "seed": 7})
        rep = run_eval(spec)
        f = {t.point_index: t.components for t in rep.tensors if t.quantity == "F"}
        s = {t.point_index: t.components for t in rep.tensors if t.quantity == "S"}
        assert sorted(f) == sorted(s) == list(range(5))
        for i in f:
            # S = (n+1) c F with n = 2, c = 1/2
            assert s[i] == approx(1.5 * f[i], rel=1e-9)

    def test_euclidean_spray_and_sigma_vanish(self):
        spec = job("eval", {"kind": "euclidean", "n": 3},
                   quantities=["G", "Sigma"], samples={"count": 4, "seed": 1})
        rep = run_eval(spec)
        for t in rep.tensors:
            assert np.abs(np.asarray(t.components)).max() < 1e-12

    def test_default_quantity_list(self):
        spec = job("eval", {"kind": "euclidean", "n": 2},
                   samples={"count": 2, "seed": 0})
        rep = run_eval(spec)
        got = [t.quantity for t in rep.tensors if t.point_index == 0]
        assert got == ["F", "g", "G", "S", "Xi", "E", "H", "Sigma", "Ric"]

    def test_index_legends_and_meta(self):
        spec = job("eval", {"kind": "funk", "n": 2}, quantities=["g", "W"],
                   samples={"count": 2, "seed": 4, "radius": 0.6}, tol=1e-7)
        rep = run_eval(spec)
        legends = {t.quantity: t.index_legend for t in rep.tensors}
        assert legends == {"g": "ij", "W": "i_jkl"}
        assert rep.status == "pass"
        assert rep.meta.engine == "finslerkit"
        assert rep.meta.version == __version__
        assert rep.meta.command == "eval"
        assert rep.meta.metric == "funk(++)"
        assert rep.meta.n == 2
        assert rep.meta.seed == 4
        assert rep.meta.sample_count == 2
        assert rep.meta.radius == approx(0.6)
        assert rep.meta.tol == approx(1e-7)

    def test_tensor_block_carries_sample_point(self):
        spec = job("eval", {"kind": "euclidean", "n": 2}, quantities=["F"],
                   samples={"count": 3, "seed": 9})
        rep = run_eval(spec)
        for t in rep.tensors:
            assert len(t.x) == len(t.y) == 2
            assert t.components == approx(float(np.hypot(*t.y)), rel=1e-12)

    def test_unknown_quantity_rejected(self):
        spec = job("eval", {"kind": "euclidean", "n": 2}, quantities=["flag"])
        with raises(SchemaError, match="flag"):
            run_eval(spec)


class TestRunVerify:
    def test_euclidean_passes_with_frozen_check_names(self):
        spec = job("verify", {"kind": "euclidean", "n": 2},
                   samples={"count": 6, "seed": 3})
        rep = run_verify(spec)
        assert rep.status == "pass"
        assert [c.name for c in rep.checks] == [
            "ad_vs_fd", "euler_homogeneity", "homogeneity_ladder",
            "dual_path_spray", "dual_path_s", "bh_dual_route",
            "relation_R00", "relation_R01", "relation_R02", "relation_R1",
            "relation_R2", "relation_R3", "relation_R4", "relation_R5",
            "volume_independence", "f_parallel", "s_isotropy",
            "ricci_constant", "invariance_lie_weyl",
            "invariance_lie_weyl_tilde", "invariance_lie_weyl_star",
            "invariance_lie_z", "invariance_lie_alpha_s",
            "flat_douglas", "flat_weyl",
        ]
        for c in rep.checks:
            assert not c.skipped
            assert c.passed and c.residual < c.threshold

    def test_mixed_sign_funk_skips_isotropy_dependent_checks(self):
        spec = job("verify",
                   {"kind": "funk", "n": 2, "sign1": 1, "sign2": -1,
                    "a": [0.3, 0.1]},
                   samples={"count": 6, "seed": 3})
        rep = run_verify(spec)
        assert rep.status == "pass"
        skipped = [c.name for c in rep.checks if c.skipped]
        assert skipped == ["s_isotropy", "ricci_constant",
                           "invariance_lie_weyl_tilde",
                           "invariance_lie_weyl_star", "invariance_lie_z"]
        for c in rep.checks:
            if c.skipped:
                assert c.passed is None and c.residual is None and c.note

    def test_tol_override_replaces_every_threshold(self):
        spec = job("verify", {"kind": "euclidean", "n": 2},
                   samples={"count": 5, "seed": 0}, tol=1e-18)
        rep = run_verify(spec)
        assert rep.status == "fail"
        live = [c for c in rep.checks if not c.skipped]
        assert all(c.threshold == approx(1e-18) for c in live)
        assert any(not c.passed for c in live)


class TestRunClassify:
    def test_needs_at_least_one_field(self):
        spec = job("classify", {"kind": "euclidean", "n": 2})
        with raises(SchemaError, match="field"):
            run_classify(spec)

    def test_rotation_on_euclidean_is_everything(self):
        spec = job("classify", {"kind": "euclidean", "n": 2},
                   fields=[{"kind": "poly", "name": "rot",
                            "A": [[0.0, -1.0], [1.0, 0.0]]}],
                   samples={"count": 4, "seed": 2})
        rep = run_classify(spec)
        (row,) = rep.classifications
        assert row.field == "rot"
        assert row.flags == {"killing_alpha": True, "killing_f": True,
                             "affine": True, "projective": True,
                             "special": True, "h_invariant": True,
                             "c_projective": True}
        assert row.factor_p == approx(0.0, abs=1e-10)
        assert row.factor_residual == approx(0.0, abs=1e-8)

    def test_flat_family_on_funk_is_c_projective(self):
        spec = job("classify", {"kind": "funk", "n": 2},
                   fields=[{"kind": "family", "name": "flat_projective"}],
                   samples={"count": 4, "seed": 6})
        rep = run_classify(spec)
        assert len(rep.classifications) == 8
        for row in rep.classifications:
            assert row.flags["projective"] is True
            assert row.flags["c_projective"] is True
            assert row.factor_residual < 1e-8

    def test_random_field_on_perturbed_is_nothing(self):
        spec = job("classify", {"kind": "perturbed", "n": 2, "seed": 1},
                   fields=[{"kind": "family", "name": "random_quadratic",
                            "seed": 3}],
                   samples={"count": 4, "seed": 0})
        rep = run_classify(spec)
        (row,) = rep.classifications
        assert all(v is False for v in row.flags.values())
        assert row.residuals["projective"] > 1e-3
        # the equivalence triple is only evaluated for projective fields
        assert row.residuals["c_projective_factor"] is None
        assert row.factor_p is None and row.factor_residual is None


class TestRunDimScan:
    @mark.parametrize("metric,nullity", [
        ({"kind": "minkowski", "n": 2, "b": [0.5, 0.0]}, 8),
        ({"kind": "funk", "n": 2}, 8),
        ({"kind": "perturbed", "n": 2, "seed": 1}, 0),
    ])
    def test_flat_basis_nullity(self, metric, nullity):
        spec = job("dim-scan", metric, samples={"count": 10, "seed": 0})
        rep = run_dim_scan(spec)
        ds = rep.dim_scan
        assert ds.nullity == nullity
        assert ds.family_size == 8
        assert len(ds.family) == 8
        assert len(ds.singular_values) == 8
        assert ds.rounds >= 2  # stability needs agreement across rounds
        assert ds.rows == ds.points_used * (2 + 4)
        assert ds.threshold > 0.0

    def test_extra_random_fields_do_not_inflate_nullity(self):
        extra = [{"kind": "family", "name": "random_quadratic",
                  "seed": 11, "count": 2}]
        spec = job("dim-scan", {"kind": "minkowski", "n": 2, "b": [0.5, 0.0]},
                   fields=extra, samples={"count": 10, "seed": 0})
        ds = run_dim_scan(spec).dim_scan
        assert ds.family_size == 10
        assert ds.nullity == 8


class TestRunReport:
    def test_combined_report_has_all_sections(self):
        spec = job("report", {"kind": "minkowski", "n": 2, "b": [0.5, 0.0]},
                   samples={"count": 6, "seed": 2})
        rep = run_report(spec)
        assert rep.status == "pass"
        assert len(rep.checks) > 10
        assert len(rep.classifications) == 8  # flat family by default
        assert rep.dim_scan is not None and rep.dim_scan.nullity == 8


class TestCanonicalJson:
    def test_identical_jobs_are_byte_identical(self):
        doc = {"schema_version": 1, "command": "eval",
               "metric": {"kind": "funk", "n": 2},
               "quantities": ["F", "g", "S"],
               "samples": {"count": 4, "seed": 12}}
        one = canonical_json(run_job(validate_job(doc)))
        two = canonical_json(run_job(validate_job(doc)))
        assert one == two

    def test_seed_changes_the_bytes(self):
        def run(seed):
            spec = job("eval", {"kind": "funk", "n": 2}, quantities=["F"],
                       samples={"count": 3, "seed": seed})
            return canonical_json(run_job(spec))

        assert run(1) != run(2)

    def test_serialization_shape(self):
        spec = job("verify", {"kind": "euclidean", "n": 2},
                   samples={"count": 5, "seed": 0})
        blob = canonical_json(run_job(spec))
        assert blob.endswith(b"\n")
        doc = json.loads(blob)
        assert sorted(doc) == ["checks", "classifications", "dim_scan",
                               "meta", "schema_version", "status", "tensors"]
        assert doc["schema_version"] == 1
        assert doc["meta"]["version"] == __version__

    def test_run_job_dispatches_by_command(self):
        spec = job("eval", {"kind": "euclidean", "n": 2}, quantities=["F"],
                   samples={"count": 2, "seed": 0})
        assert canonical_json(run_job(spec)) == canonical_json(run_eval(spec))


class TestSchemaDocs:
    """The published JSON schemas must track the pydantic models."""

    @mark.parametrize("stem,model", [
        ("jobspec", JobSpec),
        ("runreport", RunReport),
    ])
    def test_docs_match_models(self, stem, model):
        path = Path(__file__).parents[1] / "docs" / f"{stem}.schema.json"
        assert json.loads(path.read_text()) == model.model_json_schema()


class TestGoldenReports:
    """Reports for checked-in jobs must match the checked-in documents."""

    @mark.parametrize("name", [
        "eval_funk2", "verify_mink2", "classify_euclid2", "dimscan_mink2",
    ])
    def test_report_matches_golden(self, name):
        doc = json.loads((GOLDEN / "jobs" / f"{name}.json").read_text())
        rep = run_job(validate_job(doc))
        got = json.loads(canonical_json(rep))
        want = json.loads((GOLDEN / f"{name}.json").read_text())
        assert_json_close(got, want)

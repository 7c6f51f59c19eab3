"""Job specifications, runners, and machine-readable reports.

A JobSpec carries one of five commands (eval, verify, classify,
dim-scan, report), a metric descriptor, optional vector-field
descriptors, a seeded sample configuration, and tolerance/order
overrides.  Each runner returns a RunReport: named checks (residual,
threshold, pass/fail), tensor blocks, classification rows, and dim-scan
output.  Reports serialize canonically (fixed key order, repr floats,
no timestamps) so identical jobs produce byte-identical documents.
"""

from __future__ import annotations

import json
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from .errors import (
    DomainError,
    FinslerKitError,
    InvalidSpec,
    RankDeficientSampling,
    SchemaError,
)
from .fields import PolyVectorField
from .geometry import ORDER_NEEDED, as_context, default_volume, get_frame
from .jets import JetContext
from .library import (
    FunkSpec,
    SpaceFormSpec,
    euclidean,
    flat_projective_basis,
    funk,
    killing_basis,
    klein,
    minkowski_randers,
    perturbed_randers,
    polynomial_randers,
    random_quadratic_field,
)
from .metrics import MetricModel, coordinate_volume
from .projective import (
    CLASSIFY_TOL,
    classify,
    invariance_suite,
    invariant_tensors,
    lie_spray_values,
    lie_tensor_values,
)
from .randers import bh_volume, s_curvature, s_curvature_randers, spray_randers
from .sampling import sample_contexts, sample_points
from .squantities import custom_test_volume, relations_check
from .tensors import values

SCHEMA_VERSION = 1

Command = Literal["eval", "verify", "classify", "dim-scan", "report"]


# -- job spec models -------------------------------------------------------


class PolyTermSpec(BaseModel):
    """One monomial coefficient: powers per coordinate, total degree <= 4."""

    model_config = ConfigDict(extra="forbid")

    powers: list[int]
    coeff: float


class EuclideanSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["euclidean"] = "euclidean"
    n: int = Field(ge=2, le=4)


class KleinSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["klein"] = "klein"
    n: int = Field(ge=2, le=4)
    k: Literal[0, -1] = -1


class FunkMetricSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["funk"] = "funk"
    n: int = Field(ge=2, le=4)
    sign1: Literal[1, -1] = 1
    sign2: Literal[1, -1] = 1
    a: list[float] = []


class MinkowskiSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["minkowski"] = "minkowski"
    n: int = Field(ge=2, le=4)
    b: list[float]


class PerturbedSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["perturbed"] = "perturbed"
    n: int = Field(ge=2, le=4)
    seed: int = Field(default=0, ge=0)
    amplitude: float = Field(default=0.12, gt=0.0, le=0.3)


class PolynomialSpec(BaseModel):
    """User Randers metric: a_ij and b_i as polynomial coefficient tables."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["polynomial"] = "polynomial"
    n: int = Field(ge=2, le=4)
    a: Optional[list[list[list[PolyTermSpec]]]] = None
    b: list[list[PolyTermSpec]]


MetricSpec = Union[
    EuclideanSpec, KleinSpec, FunkMetricSpec, MinkowskiSpec, PerturbedSpec, PolynomialSpec
]


class PolyFieldSpec(BaseModel):
    """Explicit polynomial vector field V^i = b^i + A^i_j x^j + C^i_{jk} x^j x^k."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["poly"] = "poly"
    name: str = ""
    b: Optional[list[float]] = None
    A: Optional[list[list[float]]] = None
    C: Optional[list[list[list[float]]]] = None


class FamilyFieldSpec(BaseModel):
    """A named built-in family, expanded to its member fields."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["family"] = "family"
    name: Literal["flat_projective", "killing", "random_quadratic"]
    k: Literal[0, -1] = 0
    seed: int = Field(default=0, ge=0)
    count: int = Field(default=1, ge=1, le=64)
    scale: float = Field(default=1.0, gt=0.0)


FieldSpec = Union[PolyFieldSpec, FamilyFieldSpec]


class SampleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    count: int = Field(default=25, ge=1, le=500)
    seed: int = Field(default=0, ge=0, lt=2**64)
    radius: float = Field(default=0.7, gt=0.0, le=0.9)


class JobSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    command: Command
    metric: MetricSpec = Field(discriminator="kind")
    fields: list[FieldSpec] = []
    quantities: list[str] = []
    samples: SampleSpec = SampleSpec()
    tol: Optional[float] = Field(default=None, gt=0.0)
    order: Optional[int] = Field(default=None, ge=2, le=10)
    out: Optional[str] = None


def validate_job(data: Any) -> JobSpec:
    """Parse raw JSON data into a JobSpec; schema problems raise SchemaError."""
    if not isinstance(data, dict):
        raise SchemaError("job document must be a JSON object")
    try:
        return JobSpec.model_validate(data)
    except ValidationError as e:
        raise SchemaError(str(e)) from e


# -- report models ----------------------------------------------------------


class CheckResult(BaseModel):
    name: str
    residual: Optional[float]
    threshold: Optional[float]
    passed: Optional[bool]
    skipped: bool = False
    note: str = ""


class TensorBlock(BaseModel):
    quantity: str
    point_index: int
    x: list[float]
    y: list[float]
    index_legend: str
    components: Any


class ClassificationRow(BaseModel):
    field: str
    flags: dict[str, Optional[bool]]
    residuals: dict[str, Optional[float]]
    factor_p: Optional[float] = None
    factor_residual: Optional[float] = None


class DimScanBlock(BaseModel):
    family: list[str]
    family_size: int
    points_used: int
    rows: int
    singular_values: list[float]
    threshold: float
    nullity: int
    rounds: int


class ReportMeta(BaseModel):
    engine: str = "finslerkit"
    version: str = __version__
    command: str
    metric: str
    n: int
    seed: int
    sample_count: int
    radius: float
    tol: Optional[float] = None
    order: Optional[int] = None


class RunReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    status: Literal["pass", "fail"]
    meta: ReportMeta
    checks: list[CheckResult] = []
    tensors: list[TensorBlock] = []
    classifications: list[ClassificationRow] = []
    dim_scan: Optional[DimScanBlock] = None


def canonical_json(report: RunReport) -> bytes:
    """Stable byte serialization: repr floats, insertion-ordered keys."""
    doc = report.model_dump(mode="json")
    return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode()


# -- building blocks --------------------------------------------------------


def _terms(table: list[PolyTermSpec]) -> tuple:
    return tuple((tuple(t.powers), t.coeff) for t in table)


def build_metric(spec: MetricSpec) -> MetricModel:
    try:
        if spec.kind == "euclidean":
            return euclidean(spec.n)
        if spec.kind == "klein":
            return klein(SpaceFormSpec(n=spec.n, k=spec.k))
        if spec.kind == "funk":
            return funk(
                FunkSpec(n=spec.n, sign1=spec.sign1, sign2=spec.sign2, a=tuple(spec.a))
            )
        if spec.kind == "minkowski":
            return minkowski_randers(spec.n, spec.b)
        if spec.kind == "perturbed":
            return perturbed_randers(spec.n, seed=spec.seed, amplitude=spec.amplitude)
        a_tables = None
        if spec.a is not None:
            a_tables = [[_terms(cell) for cell in row] for row in spec.a]
        b_tables = [_terms(t) for t in spec.b]
        return polynomial_randers(spec.n, a_tables, b_tables)
    except InvalidSpec as e:
        raise SchemaError(str(e)) from e


def _check_shape(arr: Optional[list], shape: tuple[int, ...], what: str) -> Optional[np.ndarray]:
    if arr is None:
        return None
    a = np.asarray(arr, dtype=float)
    if a.shape != shape:
        raise SchemaError(f"{what} must have shape {shape}, got {a.shape}")
    return a


def build_fields(specs: list[FieldSpec], n: int) -> list[PolyVectorField]:
    out: list[PolyVectorField] = []
    for fs in specs:
        if fs.kind == "poly":
            out.append(
                PolyVectorField.make(
                    n,
                    b=_check_shape(fs.b, (n,), "field b"),
                    A=_check_shape(fs.A, (n, n), "field A"),
                    C=_check_shape(fs.C, (n, n, n), "field C"),
                    name=fs.name or f"poly({len(out)})",
                )
            )
        elif fs.name == "flat_projective":
            out.extend(flat_projective_basis(n))
        elif fs.name == "killing":
            out.extend(killing_basis(SpaceFormSpec(n=n, k=fs.k)))
        else:
            out.extend(
                random_quadratic_field(n, seed=fs.seed + i, scale=fs.scale)
                for i in range(fs.count)
            )
    return out


def _meta(spec: JobSpec, metric: MetricModel) -> ReportMeta:
    return ReportMeta(
        command=spec.command,
        metric=metric.name,
        n=metric.n,
        seed=spec.samples.seed,
        sample_count=spec.samples.count,
        radius=spec.samples.radius,
        tol=spec.tol,
        order=spec.order,
    )


class _Checks:
    """Accumulates check rows; an explicit tol override replaces every
    default threshold."""

    def __init__(self, tol_override: Optional[float]):
        self.rows: list[CheckResult] = []
        self.tol = tol_override

    def add(self, name: str, residual: float, threshold: float, note: str = "") -> None:
        thr = self.tol if self.tol is not None else threshold
        self.rows.append(
            CheckResult(
                name=name,
                residual=float(residual),
                threshold=thr,
                passed=bool(float(residual) < thr),
                note=note,
            )
        )

    def skip(self, name: str, note: str) -> None:
        self.rows.append(
            CheckResult(
                name=name, residual=None, threshold=None, passed=None, skipped=True, note=note
            )
        )

    def status(self) -> str:
        return "pass" if all(r.passed for r in self.rows if not r.skipped) else "fail"


def _order_floor(spec: JobSpec, base: int) -> int:
    return max(base, spec.order or 0)


# -- eval --------------------------------------------------------------------

_EVAL_SPECS: dict[str, tuple[str, int]] = {
    "F": ("", 2),
    "g": ("ij", ORDER_NEEDED["fundamental_tensor"]),
    "G": ("i", ORDER_NEEDED["spray"]),
    "S": ("", ORDER_NEEDED["s_curvature"]),
    "Xi": ("i", ORDER_NEEDED["s_quantities"]),
    "E": ("ij", ORDER_NEEDED["s_quantities"]),
    "H": ("ij", ORDER_NEEDED["s_quantities"]),
    "Sigma": ("ij", ORDER_NEEDED["s_quantities"]),
    "Ric": ("", ORDER_NEEDED["ricci_scalar"]),
    "D": ("i_jkl", ORDER_NEEDED["douglas"]),
    "W": ("i_jkl", ORDER_NEEDED["weyl"]),
    "W_tilde": ("i_jkl", ORDER_NEEDED["weyl_tilde"]),
    "W_star": ("i_jkl", ORDER_NEEDED["weyl_star"]),
    "Z": ("ij", ORDER_NEEDED["z_tensor"]),
    "alpha_s": ("i_j", 2),
}

_DEFAULT_EVAL = ["F", "g", "G", "S", "Xi", "E", "H", "Sigma", "Ric"]

_INVARIANT_NAMES = {"D", "W", "W_tilde", "W_star", "Z", "alpha_s"}


def _eval_point(metric: MetricModel, ctx: JetContext, names: list[str], vol) -> dict[str, Any]:
    fr = get_frame(metric, ctx)
    out: dict[str, Any] = {}
    inv = None
    if _INVARIANT_NAMES & set(names):
        inv = invariant_tensors(metric, ctx, vol)
    sb = fr.s_bundle(vol) if {"S", "Xi", "E", "H", "Sigma"} & set(names) else None
    for name in names:
        if name == "F":
            out[name] = fr.F.value
        elif name == "g":
            out[name] = values(fr.g).tolist()
        elif name == "G":
            out[name] = values(fr.G).tolist()
        elif name == "S":
            out[name] = sb.S.value
        elif name == "Xi":
            out[name] = values(sb.Xi).tolist()
        elif name == "E":
            out[name] = values(sb.E).tolist()
        elif name == "H":
            out[name] = values(sb.H).tolist()
        elif name == "Sigma":
            out[name] = values(sb.Sigma).tolist()
        elif name == "Ric":
            out[name] = fr.ricci_scalar_jet.value
        elif name == "D":
            out[name] = inv.douglas.components.tolist()
        elif name == "W":
            out[name] = inv.weyl.components.tolist()
        elif name == "W_tilde":
            out[name] = inv.weyl_tilde.components.tolist()
        elif name == "W_star":
            out[name] = inv.weyl_star.components.tolist()
        elif name == "Z":
            out[name] = inv.z.components.tolist()
        else:
            if inv.alpha_s is None:
                raise SchemaError("alpha_s needs a Randers payload")
            out[name] = inv.alpha_s.components.tolist()
    return out


def run_eval(spec: JobSpec) -> RunReport:
    metric = build_metric(spec.metric)
    names = spec.quantities or list(_DEFAULT_EVAL)
    unknown = [q for q in names if q not in _EVAL_SPECS]
    if unknown:
        raise SchemaError(
            f"unknown quantities {unknown}; valid: {sorted(_EVAL_SPECS)}"
        )
    order = _order_floor(spec, max(_EVAL_SPECS[q][1] for q in names))
    if _INVARIANT_NAMES & set(names):
        order = max(order, 8)
    pts = sample_points(
        metric.n, spec.samples.count, seed=spec.samples.seed, radius=spec.samples.radius
    )
    vol = default_volume(metric)
    tensors = []
    for i, (x, y) in enumerate(pts):
        ctx = JetContext.at(x, y, order=order)
        try:
            got = _eval_point(metric, ctx, names, vol)
        except DomainError as e:
            raise type(e)(f"{e} (point {i}: x={x.tolist()}, y={y.tolist()})") from e
        for name in names:
            tensors.append(
                TensorBlock(
                    quantity=name,
                    point_index=i,
                    x=[float(v) for v in x],
                    y=[float(v) for v in y],
                    index_legend=_EVAL_SPECS[name][0],
                    components=got[name],
                )
            )
    return RunReport(
        status="pass", meta=_meta(spec, metric), tensors=tensors
    )


# -- verify -------------------------------------------------------------------


def _fd_check(metric: MetricModel, pts) -> float:
    """AD first/second partials of F against central differences."""
    worst = 0.0
    n = metric.n
    for x, y in pts:
        ctx = JetContext.at(x, y, order=3)
        f = metric.F_jet(ctx)

        def val(dx, dy):
            return metric.value(np.asarray(x) + dx, np.asarray(y) + dy)

        h1, h2 = 1e-5, 1e-4
        for v in range(2 * n):
            step = np.zeros(2 * n)
            step[v] = h1
            fd = (val(step[:n], step[n:]) - val(-step[:n], -step[n:])) / (2 * h1)
            exact = f.dvalue(v)
            worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
        for v in range(2 * n):
            for w in range(v, 2 * n):
                exact = f.d(v).dvalue(w)
                sv = np.zeros(2 * n)
                sw = np.zeros(2 * n)
                sv[v] = h2
                sw[w] = h2
                if v == w:
                    fd = (
                        val(sv[:n] * 2, sv[n:] * 2)
                        - 2.0 * val(sv[:n] * 0, sv[n:] * 0)
                        + val(-sv[:n] * 2, -sv[n:] * 2)
                    ) / (4 * h2 * h2)
                else:
                    fd = (
                        val(sv[:n] + sw[:n], sv[n:] + sw[n:])
                        - val(sv[:n] - sw[:n], sv[n:] - sw[n:])
                        - val(sw[:n] - sv[:n], sw[n:] - sv[n:])
                        + val(-sv[:n] - sw[:n], -sv[n:] - sw[n:])
                    ) / (4 * h2 * h2)
                worst = max(worst, abs(fd - exact) / max(1.0, abs(exact)))
    return worst


def _ladder_check(metric: MetricModel, pts, vol) -> float:
    """Positive homogeneity in y: degrees F:1, g:0, G:2, G1:1, G2:0, S:1."""
    worst = 0.0
    for x, y in pts:
        base = get_frame(metric, JetContext.at(x, y, order=4))
        bv = {
            "F": (1, base.F.value),
            "g": (0, values(base.g)),
            "G": (2, values(base.G)),
            "G1": (1, values(base.G1)),
            "G2": (0, values(base.G2)),
            "S": (1, base.s_bundle(vol).S.value),
        }
        for lam in (0.5, 2.0, 3.0):
            fr = get_frame(metric, JetContext.at(x, np.asarray(y) * lam, order=4))
            sv = {
                "F": fr.F.value,
                "g": values(fr.g),
                "G": values(fr.G),
                "G1": values(fr.G1),
                "G2": values(fr.G2),
                "S": fr.s_bundle(vol).S.value,
            }
            for key, (deg, v0) in bv.items():
                diff = np.max(np.abs(np.asarray(sv[key]) - lam**deg * np.asarray(v0)))
                scale = max(1.0, float(np.max(np.abs(np.asarray(v0)))))
                worst = max(worst, float(diff) / scale)
    return worst


def _euler_check(metric: MetricModel, pts) -> float:
    worst = 0.0
    for x, y in pts:
        f = metric.F_jet(JetContext.at(x, y, order=2))
        n = metric.n
        resid = sum(float(y[k]) * f.dvalue(n + k) for k in range(n)) - f.value
        worst = max(worst, abs(resid) / max(1.0, abs(f.value)))
    return worst


def _flat_kind(metric: MetricModel) -> bool:
    return metric.name.split("(")[0] in {"euclidean", "klein", "funk", "minkowski-randers"}


def run_verify(spec: JobSpec) -> RunReport:
    metric = build_metric(spec.metric)
    n = metric.n
    ss = spec.samples
    pts = sample_points(n, ss.count, seed=ss.seed, radius=ss.radius)
    short = pts[: min(5, len(pts))]
    mid = pts[: min(10, len(pts))]
    vol = default_volume(metric)
    ck = _Checks(spec.tol)

    ck.add("ad_vs_fd", _fd_check(metric, short), 1e-5)
    ck.add("euler_homogeneity", _euler_check(metric, pts), 1e-10)
    ck.add("homogeneity_ladder", _ladder_check(metric, short, vol), 1e-8)

    if metric.randers is not None:
        worst_g = max(
            float(np.abs(np.asarray(spray_randers(metric, p)) - _spray_vals(metric, p)).max())
            for p in pts
        )
        ck.add("dual_path_spray", worst_g, 1e-8)
        worst_s = max(
            abs(s_curvature(metric, p, vol) - s_curvature_randers(metric, p)) for p in pts
        )
        ck.add("dual_path_s", worst_s, 1e-7)
        worst_bh = 0.0
        for p in pts[:2]:
            closed = bh_volume(metric, p[0], method="closed_form_randers")
            quad = bh_volume(metric, p[0], method="indicatrix_integration", nodes=200_000)
            worst_bh = max(worst_bh, abs(closed - quad) / closed)
        ck.add("bh_dual_route", worst_bh, 1e-4)
    else:
        ck.skip("dual_path_spray", "metric has no Randers payload")
        ck.skip("dual_path_s", "metric has no Randers payload")
        ck.skip("bh_dual_route", "metric has no Randers payload")

    rel_worst: dict[str, float] = {}
    for p in mid:
        for key, val in relations_check(metric, p, vol).items():
            rel_worst[key] = max(rel_worst.get(key, 0.0), val)
    for key in sorted(rel_worst):
        ck.add(f"relation_{key}", rel_worst[key], 1e-7)

    vols = [vol, coordinate_volume(n), custom_test_volume(n)]
    worst_vi = 0.0
    for p in mid[:5]:
        sigmas = []
        xis = []
        for v in vols:
            fr = get_frame(metric, as_context(metric, p, ORDER_NEEDED["s_quantities"]))
            sb = fr.s_bundle(v)
            sigmas.append(values(sb.Sigma))
            xis.append(values(sb.Xi))
        scale = max(1.0, float(np.abs(sigmas[0]).max()), float(np.abs(xis[0]).max()))
        for i in range(1, len(vols)):
            worst_vi = max(
                worst_vi,
                float(np.abs(sigmas[i] - sigmas[0]).max()) / scale,
                float(np.abs(xis[i] - xis[0]).max()) / scale,
            )
    ck.add("volume_independence", worst_vi, 1e-7)

    worst_fp = 0.0
    for p in pts:
        fr = get_frame(metric, as_context(metric, p, 3))
        worst_fp = max(
            worst_fp,
            max(abs(fr.horizontal(fr.F, k).value) for k in range(n)) / max(1.0, fr.F.value),
        )
    ck.add("f_parallel", worst_fp, 1e-8)

    if metric.isotropy_c is not None:
        c = metric.isotropy_c
        worst_iso = 0.0
        for p in pts:
            fv = metric.value(*p)
            sv = s_curvature_randers(metric, p) if metric.randers is not None else 0.0
            worst_iso = max(worst_iso, abs(sv - (n + 1.0) * c * fv) / max(1.0, fv))
        ck.add("s_isotropy", worst_iso, 1e-8)
    else:
        ck.skip("s_isotropy", "S-curvature of this metric is not isotropic with known c")

    base_kind = metric.name.split("(")[0]
    # mixed-sign Funk with drift is neither isotropic nor of constant flag
    # curvature; the constant-curvature reference only applies otherwise
    if base_kind == "funk" and metric.isotropy_c is None:
        ck.skip("ricci_constant", "mixed-sign Funk with drift has no constant-curvature reference")
    elif base_kind in {"euclidean", "klein", "funk", "minkowski-randers"}:
        lam = {"euclidean": 0.0, "minkowski-randers": 0.0, "klein": -1.0, "funk": -0.25}[
            base_kind
        ]
        worst_ric = 0.0
        for p in mid:
            fr = get_frame(metric, as_context(metric, p, ORDER_NEEDED["ricci_scalar"]))
            f2 = fr.F.value ** 2
            worst_ric = max(worst_ric, abs(fr.ricci_scalar_jet.value - lam * (n - 1) * f2) / f2)
        ck.add("ricci_constant", worst_ric, 1e-6)
    else:
        ck.skip("ricci_constant", "no closed-form curvature reference for this metric")

    if _flat_kind(metric):
        basis = flat_projective_basis(n)
        probe = [basis[n], basis[-1]]
        inv_worst: dict[str, float] = {}
        for V in probe:
            for key, val in invariance_suite(V, metric, pts[:3]).items():
                inv_worst[key] = max(inv_worst.get(key, 0.0), val)
        ck.add("invariance_lie_weyl", inv_worst["lie_weyl"], 1e-6)
        # W-tilde and Z are invariant along C-projective fields only; on a
        # mixed-sign Funk with drift the probes are merely projective
        if base_kind == "funk" and metric.isotropy_c is None:
            ck.skip("invariance_lie_weyl_tilde", "probe fields are not C-projective here")
            ck.skip("invariance_lie_weyl_star", "probe fields are not special here")
            ck.skip("invariance_lie_z", "probe fields are not C-projective here")
        else:
            ck.add("invariance_lie_weyl_tilde", inv_worst["lie_weyl_tilde"], 1e-6)
            ck.add("invariance_lie_weyl_star", inv_worst["lie_weyl_star"], 1e-6)
            ck.add("invariance_lie_z", inv_worst["lie_z"], 1e-6)
        if "lie_alpha_s" in inv_worst:
            ck.add("invariance_lie_alpha_s", inv_worst["lie_alpha_s"], 1e-6)
        ck.add("flat_douglas", inv_worst["douglas_norm"], 1e-7)
        ck.add("flat_weyl", inv_worst["weyl_norm"], 1e-7)
    else:
        ck.skip("invariance_suite", "no distinguished projective fields for this metric")

    return RunReport(status=ck.status(), meta=_meta(spec, metric), checks=ck.rows)


def _spray_vals(metric: MetricModel, p) -> np.ndarray:
    fr = get_frame(metric, as_context(metric, p, ORDER_NEEDED["spray"]))
    return values(fr.G)


# -- classify -----------------------------------------------------------------


def run_classify(spec: JobSpec) -> RunReport:
    metric = build_metric(spec.metric)
    fields = build_fields(spec.fields, metric.n)
    if not fields:
        raise SchemaError("classify needs at least one field")
    ss = spec.samples
    samples = sample_contexts(
        metric.n, max(ss.count, 10), seed=ss.seed, radius=ss.radius,
        order=_order_floor(spec, ORDER_NEEDED["classify"]),
    )
    tol = spec.tol if spec.tol is not None else CLASSIFY_TOL
    vol = default_volume(metric)
    rows = []
    for V in fields:
        rep = classify(V, metric, samples=samples, tol=tol, vol=vol)
        rows.append(
            ClassificationRow(
                field=rep.field_name,
                flags=rep.flags,
                residuals=rep.residuals,
                factor_p=None if rep.factor is None else rep.factor.p,
                factor_residual=None if rep.factor is None else rep.factor.residual,
            )
        )
    return RunReport(status="pass", meta=_meta(spec, metric), classifications=rows)


# -- dim-scan -----------------------------------------------------------------


def _scan_rows(metric: MetricModel, family, ctxs, vol) -> np.ndarray:
    """Constraint rows: projected L G residual and L Sigma, one block per
    point, one column per family member."""
    n = metric.n
    blocks = []
    for ctx in ctxs:
        fr = get_frame(metric, ctx)
        sb = fr.s_bundle(vol)
        y = fr.yvals
        proj = np.eye(n) - np.outer(y, y) / float(y @ y)
        block = np.empty((n + n * n, len(family)))
        for a, V in enumerate(family):
            block[:n, a] = proj @ lie_spray_values(fr, V)
            block[n:, a] = lie_tensor_values(fr, V, sb.Sigma, "ll").ravel()
        blocks.append(block)
    return np.vstack(blocks)


def run_dim_scan(spec: JobSpec) -> RunReport:
    metric = build_metric(spec.metric)
    n = metric.n
    family = flat_projective_basis(n) + build_fields(spec.fields, n)
    ss = spec.samples
    order = _order_floor(spec, ORDER_NEEDED["s_quantities"] + 1)
    tol_factor = spec.tol if spec.tol is not None else 1e-6
    vol = default_volume(metric)

    max_count = ss.count * 8
    all_pts = sample_points(n, max_count, seed=ss.seed, radius=ss.radius)

    def nullity_of(M: np.ndarray) -> tuple[int, np.ndarray, float]:
        s = np.linalg.svd(M, compute_uv=False)
        tau = tol_factor * max(float(s[0]) if len(s) else 0.0, 1.0)
        rank = int(np.sum(s >= tau))
        return len(family) - rank, s, tau

    counts = [ss.count, ss.count * 2, ss.count * 4, ss.count * 8]
    M = _scan_rows(metric, family, [JetContext.at(x, y, order=order) for x, y in all_pts[: counts[0]]], vol)
    nullity, s, tau = nullity_of(M)
    rounds = 1
    for prev_count, count in zip(counts, counts[1:]):
        extra = _scan_rows(
            metric,
            family,
            [JetContext.at(x, y, order=order) for x, y in all_pts[prev_count:count]],
            vol,
        )
        M = np.vstack([M, extra])
        new_nullity, s, tau = nullity_of(M)
        rounds += 1
        if new_nullity == nullity:
            break
        nullity = new_nullity
    else:
        raise RankDeficientSampling(
            f"nullity kept changing up to {counts[-1]} points (last {nullity})"
        )

    points_used = M.shape[0] // (n + n * n)
    block = DimScanBlock(
        family=[V.name for V in family],
        family_size=len(family),
        points_used=points_used,
        rows=int(M.shape[0]),
        singular_values=[float(v) for v in s],
        threshold=tau,
        nullity=int(nullity),
        rounds=rounds,
    )
    return RunReport(status="pass", meta=_meta(spec, metric), dim_scan=block)


# -- combined report ------------------------------------------------------------


def run_report(spec: JobSpec) -> RunReport:
    verify_rep = run_verify(spec)
    classify_spec = spec.model_copy(
        update={"fields": spec.fields or [FamilyFieldSpec(name="flat_projective")]}
    )
    classify_rep = run_classify(classify_spec)
    scan_rep = run_dim_scan(spec)
    return RunReport(
        status=verify_rep.status,
        meta=_meta(spec, build_metric(spec.metric)),
        checks=verify_rep.checks,
        classifications=classify_rep.classifications,
        dim_scan=scan_rep.dim_scan,
    )


_RUNNERS = {
    "eval": run_eval,
    "verify": run_verify,
    "classify": run_classify,
    "dim-scan": run_dim_scan,
    "report": run_report,
}


def run_job(spec: JobSpec) -> RunReport:
    return _RUNNERS[spec.command](spec)

"""Lie derivatives along complete lifts, projective factors,
vector-field classification, and the projectively invariant tensors.

The Lie derivative along the complete lift V-hat of V acts on scalars as
V-hat itself, and on pullback-bundle tensors with the usual index terms

    (L T)^{..i..}_{..j..} = V-hat(T) - T^{..r..} dV^i/dx^r + T_{..r..} dV^r/dx^j.

The Lie derivative of the spray is

    L G^i = V-hat(G^i) + 1/2 y^j y^k d^2 V^i/dx^j dx^k - G^k dV^i/dx^k,

and V is projective exactly when L G^i = P y^i for a scalar P, the
projective factor.  Classification tests Killing/affine/projective/
special/C-projective/H-invariant per field over a seeded point set; the
three C-projective criteria (factor symmetry P_{i|j} = P_{j|i},
L Sigma = 0, L Xi = 0) are each computed and must agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    EquivalenceViolation,
    InvalidSpec,
    IsotropyUnknown,
    NotProjective,
    UnsupportedVariance,
)
from .fields import CompleteLift, PolyVectorField, complete_lift
from .geometry import Frame, as_context, default_volume, get_frame
from .jets import Jet, JetContext
from .metrics import MetricModel, VolumeForm
from .randers import randers_jets, riemannian_metric
from .sampling import sample_contexts
from .tensors import TensorValue, jet_array, jsum, values

CLASSIFY_TOL = 1e-6
GUARD_TOL = 1e-5


def _as_contexts(n: int, samples, order: int) -> list[JetContext]:
    out = []
    for s in samples:
        if isinstance(s, JetContext):
            if s.order < order:
                s = JetContext.at(s.x, s.y, order=order)
            out.append(s)
        else:
            x, y = s
            out.append(JetContext.at(x, y, order=order))
    return out


def _rel(num: float, scale: float) -> float:
    return float(num) / max(1.0, float(scale))


def _maxabs(jets: np.ndarray) -> float:
    v = values(jets)
    return float(np.abs(v).max()) if np.size(v) else 0.0


# -- Lie derivatives ------------------------------------------------------------


def lie_spray_jets(frame: Frame, V: PolyVectorField) -> np.ndarray:
    """L G^i as jets (cached per field on the frame)."""
    key = ("lie_spray", V)
    got = frame._cache.get(key)
    if got is not None:
        return got
    n = frame.n
    lift = complete_lift(V)
    comp, jac, _ = lift.components(frame)
    hess = V.hessian()
    out = jet_array((n,))
    for i in range(n):
        term = lift.scalar(frame, frame.G[i])
        term = term + 0.5 * jsum(
            hess[i, j, k] * frame.ys[j] * frame.ys[k] for j in range(n) for k in range(n)
        )
        term = term - jsum(frame.G[k] * jac[i, k] for k in range(n))
        out[i] = term
    frame._cache[key] = out
    return out


def lie_spray(V: PolyVectorField, metric: MetricModel, at) -> np.ndarray:
    """L G^i values at the point."""
    fr = get_frame(metric, as_context(metric, at, 3))
    return values(lie_spray_jets(fr, V))


def _lift_values(frame: Frame, V: PolyVectorField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    comp, jac, fiber = complete_lift(V).components(frame)
    return values(comp), values(jac), values(fiber)


def lie_scalar_value(frame: Frame, V: PolyVectorField, f: Jet) -> float:
    """V-hat(f) at the point, from coefficient reads only."""
    n = frame.n
    vc, _, vf = _lift_values(frame, V)
    return float(
        sum(vc[k] * f.dvalue(k) + vf[k] * f.dvalue(n + k) for k in range(n))
    )


def lie_spray_values(frame: Frame, V: PolyVectorField) -> np.ndarray:
    """L G^i at the point, without jet products (for residual rows)."""
    n = frame.n
    vc, vj, vf = _lift_values(frame, V)
    hess = V.hessian()
    y = frame.yvals
    gv = values(frame.G)
    out = np.empty(n)
    for i in range(n):
        gi = frame.G[i]
        term = sum(vc[k] * gi.dvalue(k) + vf[k] * gi.dvalue(n + k) for k in range(n))
        term += 0.5 * float(y @ hess[i] @ y)
        term -= float(gv @ vj[i])
        out[i] = term
    return out


def lie_tensor_values(
    frame: Frame, V: PolyVectorField, T: np.ndarray, variance: str
) -> np.ndarray:
    """Lie derivative values of a jet tensor, without jet products."""
    rank = T.ndim
    if rank != len(variance) or rank > 4 or not set(variance) <= {"u", "l"}:
        raise UnsupportedVariance(f"variance {variance!r} with rank {rank} not supported")
    n = frame.n
    vc, vj, vf = _lift_values(frame, V)
    tv = values(T)
    out = np.empty(T.shape)
    for idx in np.ndindex(T.shape):
        t = T[idx]
        term = sum(vc[k] * t.dvalue(k) + vf[k] * t.dvalue(n + k) for k in range(n))
        for slot, var in enumerate(variance):
            for r in range(n):
                ridx = idx[:slot] + (r,) + idx[slot + 1 :]
                if var == "u":
                    term -= tv[ridx] * vj[idx[slot], r]
                else:
                    term += tv[ridx] * vj[r, idx[slot]]
        out[idx] = term
    return out


def lie_tensor_jets(
    frame: Frame, V: PolyVectorField, T: np.ndarray, variance: str
) -> np.ndarray:
    """Lie derivative along the complete lift of a tensor given as jets."""
    rank = T.ndim
    if rank != len(variance) or rank > 4 or not set(variance) <= {"u", "l"}:
        raise UnsupportedVariance(f"variance {variance!r} with rank {rank} not supported")
    n = frame.n
    lift = complete_lift(V)
    _, jac, _ = lift.components(frame)
    out = jet_array(T.shape)
    for idx in np.ndindex(T.shape):
        term = lift.scalar(frame, T[idx])
        for slot, var in enumerate(variance):
            for r in range(n):
                ridx = idx[:slot] + (r,) + idx[slot + 1 :]
                if var == "u":
                    term = term - T[ridx] * jac[idx[slot], r]
                else:
                    term = term + T[ridx] * jac[r, idx[slot]]
        out[idx] = term
    return out


def lie_tensor(
    V: PolyVectorField,
    tensor: Callable[[Frame], np.ndarray],
    variance: str,
    metric: MetricModel,
    at,
    min_order: int = 7,
) -> TensorValue:
    """Lie derivative of a frame-derived tensor field, as values."""
    fr = get_frame(metric, as_context(metric, at, min_order))
    out = lie_tensor_values(fr, V, tensor(fr), variance)
    return TensorValue(out, variance, name="lie_tensor")


def lie_scalar(
    V: PolyVectorField, f: Callable[[Frame], Jet], metric: MetricModel, at, min_order: int = 7
) -> float:
    """V-hat(f) for a frame-derived scalar."""
    fr = get_frame(metric, as_context(metric, at, min_order))
    return complete_lift(V).scalar(fr, f(fr)).value


# -- projective factor -----------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveFactorData:
    """Projective factor P and its fiber/horizontal derivatives at a point.

    ``eta`` is the projective factor of the underlying Riemannian alpha
    when it was requested (Randers metrics only)."""

    p: float
    residual: float
    p_y: Optional[np.ndarray] = None
    p_yy: Optional[np.ndarray] = None
    p_cov: Optional[np.ndarray] = None
    eta: Optional[float] = None


def project_on_y(lg: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Euclidean projection of LG onto y: P = <LG, y>/<y, y>, residual
    max_i |LG^i - P y^i| / max(1, |LG|)."""
    lg = np.asarray(lg, dtype=float)
    y = np.asarray(y, dtype=float)
    p = float(lg @ y) / float(y @ y)
    resid = float(np.abs(lg - p * y).max()) / max(1.0, float(np.abs(lg).max()))
    return p, resid


def extract_factor(
    lg: np.ndarray, at, *, require_factor: bool = False, tol: float = 1e-6
) -> ProjectiveFactorData:
    """Algebraic factor extraction from LG values at a point.  ``at`` is a
    JetContext or an (x, y) pair; only y enters.  Derivative data needs
    the jet pipeline: see projective_factor()."""
    y = np.asarray(at.y if isinstance(at, JetContext) else at[1], dtype=float)
    p, resid = project_on_y(lg, y)
    if require_factor and resid > tol:
        raise NotProjective(f"projective residual {resid:.3e} exceeds {tol:.0e}")
    return ProjectiveFactorData(p=p, residual=resid)


class FactorJets:
    """Jet-level projective factor pipeline at one frame, for one field.

    LG, P and the projective residual are computed eagerly; the factor
    derivatives are lazy since they consume extra jet orders."""

    def __init__(self, frame: Frame, V: PolyVectorField):
        n = frame.n
        self.frame = frame
        self.LG = lie_spray_jets(frame, V)
        y2 = jsum(frame.ys[m] * frame.ys[m] for m in range(n))
        self.P = jsum(self.LG[m] * frame.ys[m] for m in range(n)) / y2
        lgv = values(self.LG)
        self.residual = float(
            np.abs(lgv - self.P.value * frame.yvals).max()
        ) / max(1.0, float(np.abs(lgv).max()))

    @property
    def P_y(self) -> np.ndarray:
        got = getattr(self, "_p_y", None)
        if got is None:
            n = self.frame.n
            got = jet_array((n,))
            for i in range(n):
                got[i] = self.P.d(n + i)
            self._p_y = got
        return got

    @property
    def P_yy(self) -> np.ndarray:
        got = getattr(self, "_p_yy", None)
        if got is None:
            n = self.frame.n
            got = jet_array((n, n))
            for i in range(n):
                for j in range(i, n):
                    got[i, j] = got[j, i] = self.P_y[i].d(n + j)
            self._p_yy = got
        return got

    @property
    def P_cov(self) -> np.ndarray:
        got = getattr(self, "_p_cov", None)
        if got is None:
            got = self.frame.cov_deriv(self.P_y, "l")
            self._p_cov = got
        return got


def factor_jets(frame: Frame, V: PolyVectorField) -> FactorJets:
    key = ("factor", V)
    got = frame._cache.get(key)
    if got is None:
        got = FactorJets(frame, V)
        frame._cache[key] = got
    return got


def projective_factor(
    V: PolyVectorField,
    metric: MetricModel,
    at,
    *,
    require_factor: bool = True,
    tol: float = CLASSIFY_TOL,
    with_eta: bool = False,
) -> ProjectiveFactorData:
    """Full projective-factor data via jets: P, P_i, P_ij, P_{i|j}."""
    fr = get_frame(metric, as_context(metric, at, 7))
    fj = factor_jets(fr, V)
    if require_factor and fj.residual > tol:
        raise NotProjective(f"projective residual {fj.residual:.3e} exceeds {tol:.0e}")
    eta = None
    if with_eta:
        if metric.randers is None:
            raise InvalidSpec("eta needs a Randers payload (projective factor of alpha)")
        alpha_m = riemannian_metric(metric.randers.a)
        fr_a = get_frame(alpha_m, as_context(alpha_m, fr.ctx, 7))
        eta = factor_jets(fr_a, V).P.value
    return ProjectiveFactorData(
        p=fj.P.value,
        residual=fj.residual,
        p_y=values(fj.P_y),
        p_yy=values(fj.P_yy),
        p_cov=values(fj.P_cov),
        eta=eta,
    )


# -- classification ---------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    field_name: str
    points: int
    tol: float
    flags: dict
    residuals: dict
    factor: Optional[ProjectiveFactorData] = None


_CRITERIA = (
    "killing_alpha",
    "killing_f",
    "affine",
    "projective",
    "special",
    "c_projective_factor",
    "c_projective_sigma",
    "c_projective_xi",
    "h_invariant",
)


def classify(
    V: PolyVectorField,
    metric: MetricModel,
    samples=None,
    *,
    tol: float = CLASSIFY_TOL,
    guard: float = GUARD_TOL,
    vol: Optional[VolumeForm] = None,
    seed: int = 0,
) -> ClassificationReport:
    """Classify one vector field against one metric over sample points.

    Every criterion is a conjunction over the points: residuals are
    aggregated by max and compared against ``tol`` (relative, scale-aware).
    The three C-projective routes must agree when the field is projective;
    decisive disagreement raises EquivalenceViolation.
    """
    if samples is None:
        samples = sample_contexts(metric.n, 25, seed=seed, order=7)
    ctxs = _as_contexts(metric.n, samples, order=7)
    if len(ctxs) < 10:
        raise InvalidSpec(f"classification needs >= 10 points, got {len(ctxs)}")
    v = vol if vol is not None else default_volume(metric)
    agg: dict[str, float] = {k: 0.0 for k in _CRITERIA}
    have_payload = metric.randers is not None
    factor_data: Optional[ProjectiveFactorData] = None

    for ctx in ctxs:
        fr = get_frame(metric, ctx)
        n = fr.n
        if have_payload:
            rj = _frame_randers_jets(fr)
            la = lie_tensor_values(fr, V, rj.A, "ll")
            agg["killing_alpha"] = max(
                agg["killing_alpha"], _rel(np.abs(la).max(), _maxabs(rj.A))
            )
        agg["killing_f"] = max(
            agg["killing_f"], _rel(abs(lie_scalar_value(fr, V, fr.F)), abs(fr.F.value))
        )
        fj = factor_jets(fr, V)
        g2_scale = _maxabs(fr.G2)
        aff = 0.0
        for i in range(n):
            for j in range(n):
                dij = fj.LG[i].d(n + j)
                for k in range(j, n):
                    aff = max(aff, abs(dij.dvalue(n + k)))
        agg["affine"] = max(agg["affine"], _rel(aff, g2_scale))
        agg["projective"] = max(agg["projective"], fj.residual)
        sb = fr.s_bundle(v)
        le = lie_tensor_values(fr, V, sb.E, "ll")
        agg["special"] = max(agg["special"], _rel(np.abs(le).max(), _maxabs(sb.E)))
        lh = lie_tensor_values(fr, V, sb.H, "ll")
        agg["h_invariant"] = max(agg["h_invariant"], _rel(np.abs(lh).max(), _maxabs(sb.H)))
        pcov = values(fj.P_cov)
        agg["c_projective_factor"] = max(
            agg["c_projective_factor"], _rel(np.abs(pcov - pcov.T).max(), np.abs(pcov).max())
        )
        ls = lie_tensor_values(fr, V, sb.Sigma, "ll")
        agg["c_projective_sigma"] = max(
            agg["c_projective_sigma"], _rel(np.abs(ls).max(), _maxabs(sb.Sigma))
        )
        lx = lie_tensor_values(fr, V, sb.Xi, "l")
        agg["c_projective_xi"] = max(agg["c_projective_xi"], _rel(np.abs(lx).max(), _maxabs(sb.Xi)))
        if factor_data is None:
            factor_data = ProjectiveFactorData(
                p=fj.P.value,
                residual=fj.residual,
                p_y=values(fj.P_y),
                p_yy=values(fj.P_yy),
                p_cov=pcov,
            )

    flags: dict[str, Optional[bool]] = {}
    flags["killing_alpha"] = (agg["killing_alpha"] < tol) if have_payload else None
    flags["killing_f"] = agg["killing_f"] < tol
    flags["affine"] = agg["affine"] < tol
    projective_flag = agg["projective"] < tol
    flags["projective"] = projective_flag
    flags["special"] = agg["special"] < tol
    flags["h_invariant"] = agg["h_invariant"] < tol

    if projective_flag:
        triple = {
            "c_projective_factor": agg["c_projective_factor"] < tol,
            "c_projective_sigma": agg["c_projective_sigma"] < tol,
            "c_projective_xi": agg["c_projective_xi"] < tol,
        }
        verdicts = set(triple.values())
        if len(verdicts) > 1:
            failing = [k for k, ok in triple.items() if not ok]
            worst = max(agg[k] for k in failing)
            if worst > guard:
                raise EquivalenceViolation(
                    f"C-projective routes disagree decisively for {V.name or 'field'}: "
                    + ", ".join(f"{k}={agg[k]:.3e}" for k in triple)
                )
        flags["c_projective"] = all(triple.values())
    else:
        flags["c_projective"] = False
        for k in ("c_projective_factor", "c_projective_sigma", "c_projective_xi"):
            agg[k] = float("nan")

    residuals = {k: (None if np.isnan(v_) else float(v_)) for k, v_ in agg.items()}
    if not have_payload:
        residuals["killing_alpha"] = None
    return ClassificationReport(
        field_name=V.name,
        points=len(ctxs),
        tol=tol,
        flags=flags,
        residuals=residuals,
        factor=factor_data if projective_flag else None,
    )


def _frame_randers_jets(frame: Frame):
    key = "randers_jets"
    got = frame._cache.get(key)
    if got is None:
        got = randers_jets(frame.metric, frame.ctx)
        frame._cache[key] = got
    return got


def projective_residual(V: PolyVectorField, metric: MetricModel, ctxs) -> float:
    """Max projective residual of V against the metric over contexts."""
    worst = 0.0
    for ctx in _as_contexts(metric.n, ctxs, order=4):
        fr = get_frame(metric, ctx)
        worst = max(worst, factor_jets(fr, V).residual)
    return worst


# -- invariant tensors --------------------------------------------------------------


@dataclass(frozen=True)
class InvariantTensors:
    douglas: TensorValue
    weyl: TensorValue
    weyl_tilde: TensorValue
    weyl_star: TensorValue
    z: TensorValue
    alpha_s: Optional[TensorValue]


def _douglas_jets(frame: Frame) -> np.ndarray:
    def build():
        n = frame.n
        pi = jsum(frame.G1[m, m] for m in range(n))
        out = jet_array((n, n, n, n))
        for i in range(n):
            base = frame.G[i] - (1.0 / (n + 1.0)) * pi * frame.ys[i]
            for j in range(n):
                dj = base.d(n + j)
                for k in range(j, n):
                    djk = dj.d(n + k)
                    for l in range(k, n):
                        val = djk.d(n + l)
                        for a, b, c in {
                            (j, k, l), (j, l, k), (k, j, l), (k, l, j), (l, j, k), (l, k, j)
                        }:
                            out[i, a, b, c] = val
        return out

    key = "douglas"
    if key not in frame._cache:
        frame._cache[key] = build()
    return frame._cache[key]


def _khat_jets(frame: Frame) -> np.ndarray:
    def build():
        n = frame.n
        out = jet_array((n, n))
        for j in range(n):
            for k in range(n):
                out[j, k] = (
                    n * frame.Kjl[j, k]
                    + frame.Kjl[k, j]
                    + jsum(frame.ys[r] * frame.Kjl[k, r].d(n + j) for r in range(n))
                )
        return out

    key = "khat"
    if key not in frame._cache:
        frame._cache[key] = build()
    return frame._cache[key]


def _weyl_jets(frame: Frame) -> np.ndarray:
    def build():
        n = frame.n
        khat = _khat_jets(frame)
        skew = jet_array((n, n))
        for k in range(n):
            for l in range(n):
                skew[k, l] = khat[k, l] - khat[l, k]
        c = 1.0 / (n * n - 1.0)
        out = jet_array((n, n, n, n))
        for k in range(n):
            for l in range(n):
                dskew = [skew[k, l].d(n + j) for j in range(n)]
                for i in range(n):
                    for j in range(n):
                        corr = frame.ys[i] * dskew[j]
                        if i == j:
                            corr = corr + skew[k, l]
                        if i == k:
                            corr = corr + khat[j, l]
                        if i == l:
                            corr = corr - khat[j, k]
                        out[i, j, k, l] = frame.K4[i, j, k, l] - c * corr
        return out

    key = "weyl"
    if key not in frame._cache:
        frame._cache[key] = build()
    return frame._cache[key]


def _weyl_tilde_jets(frame: Frame) -> np.ndarray:
    def build():
        n = frame.n
        khat = _khat_jets(frame)
        c = 1.0 / (1.0 - n * n)

        def brace(j: int, k: int) -> Jet:
            extra = jsum(
                frame.ys[r] * (frame.Kjl[j, r].d(n + k) - frame.Kjl[j, k].d(n + r))
                for r in range(n)
            )
            return khat[j, k] + (n / (n + 1.0)) * extra

        braces = [[brace(j, k) for k in range(n)] for j in range(n)]
        out = jet_array((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        term = frame.K4[i, j, k, l]
                        if i == l:
                            term = term - c * braces[j][k]
                        if i == k:
                            term = term + c * braces[j][l]
                        out[i, j, k, l] = term
        return out

    key = "weyl_tilde"
    if key not in frame._cache:
        frame._cache[key] = build()
    return frame._cache[key]


def _weyl_star_jets(frame: Frame) -> np.ndarray:
    def build():
        n = frame.n
        c = 1.0 / (n * n - 1.0)
        out = jet_array((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        term = frame.K4[i, j, k, l]
                        if i == k:
                            term = term - c * (n * frame.Kjl[j, l] + frame.Kjl[l, j])
                        if i == l:
                            term = term + c * (n * frame.Kjl[j, k] + frame.Kjl[k, j])
                        if i == j:
                            term = term - c * (n - 1.0) * (frame.Kjl[k, l] - frame.Kjl[l, k])
                        out[i, j, k, l] = term
        return out

    key = "weyl_star"
    if key not in frame._cache:
        frame._cache[key] = build()
    return frame._cache[key]


def _z_jets(frame: Frame, vol: VolumeForm) -> np.ndarray:
    sb = frame.s_bundle(vol)
    n = frame.n
    out = jet_array((n, n))
    for j in range(n):
        for l in range(n):
            out[j, l] = frame.Rskew[j, l] - 0.5 * (n + 1.0) * sb.Sigma[j, l]
    return out


def _alpha_s_jets(frame: Frame) -> np.ndarray:
    rj = _frame_randers_jets(frame)
    n = frame.n
    out = jet_array((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = rj.alpha * rj.s_mixed[i, j]
    return out


def invariant_tensors(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> InvariantTensors:
    """(D, W, W-tilde, W-star, Z, alpha*s) at a point."""
    fr = get_frame(metric, as_context(metric, at, 8))
    v = vol if vol is not None else default_volume(metric)
    alpha_s = None
    if metric.randers is not None:
        alpha_s = TensorValue(values(_alpha_s_jets(fr)), "ul", name="alpha_s")
    return InvariantTensors(
        douglas=TensorValue(values(_douglas_jets(fr)), "ulll", name="douglas"),
        weyl=TensorValue(values(_weyl_jets(fr)), "ulll", name="weyl"),
        weyl_tilde=TensorValue(values(_weyl_tilde_jets(fr)), "ulll", name="weyl_tilde"),
        weyl_star=TensorValue(values(_weyl_star_jets(fr)), "ulll", name="weyl_star"),
        z=TensorValue(values(_z_jets(fr, v)), "ll", name="z_tensor"),
        alpha_s=alpha_s,
    )


def invariance_suite(
    V: PolyVectorField,
    metric: MetricModel,
    samples,
    *,
    tol: float = CLASSIFY_TOL,
    vol: Optional[VolumeForm] = None,
) -> dict[str, float]:
    """Residuals of the Lie derivatives of the invariant tensors along V,
    plus the pointwise norms of D and W.  V must be projective."""
    pts = [(c.x, c.y) if isinstance(c, JetContext) else c for c in samples]
    proj_res = projective_residual(V, metric, pts)
    if proj_res > tol:
        raise NotProjective(f"projective residual {proj_res:.3e} exceeds {tol:.0e}")
    v = vol if vol is not None else default_volume(metric)
    out = {
        "lie_weyl": 0.0,
        "lie_weyl_tilde": 0.0,
        "lie_weyl_star": 0.0,
        "lie_z": 0.0,
        "douglas_norm": 0.0,
        "weyl_norm": 0.0,
    }
    if metric.randers is not None:
        out["lie_alpha_s"] = 0.0
    for x, y in pts:
        fr9 = get_frame(metric, JetContext.at(x, y, order=9))
        k4_scale = _maxabs(fr9.K4)
        lw = lie_tensor_values(fr9, V, _weyl_jets(fr9), "ulll")
        out["lie_weyl"] = max(out["lie_weyl"], _rel(np.abs(lw).max(), k4_scale))
        out["weyl_norm"] = max(out["weyl_norm"], _maxabs(_weyl_jets(fr9)))
        fr8 = get_frame(metric, JetContext.at(x, y, order=8))
        lwt = lie_tensor_values(fr8, V, _weyl_tilde_jets(fr8), "ulll")
        out["lie_weyl_tilde"] = max(out["lie_weyl_tilde"], _rel(np.abs(lwt).max(), _maxabs(fr8.K4)))
        lws = lie_tensor_values(fr8, V, _weyl_star_jets(fr8), "ulll")
        out["lie_weyl_star"] = max(out["lie_weyl_star"], _rel(np.abs(lws).max(), _maxabs(fr8.K4)))
        fr7 = get_frame(metric, JetContext.at(x, y, order=7))
        lz = lie_tensor_values(fr7, V, _z_jets(fr7, v), "ll")
        out["lie_z"] = max(out["lie_z"], _rel(np.abs(lz).max(), _maxabs(fr7.Rskew)))
        out["douglas_norm"] = max(out["douglas_norm"], _maxabs(_douglas_jets(fr7)))
        if metric.randers is not None:
            fr3 = get_frame(metric, JetContext.at(x, y, order=3))
            las = lie_tensor_values(fr3, V, _alpha_s_jets(fr3), "ul")
            out["lie_alpha_s"] = max(
                out["lie_alpha_s"], _rel(np.abs(las).max(), _maxabs(_alpha_s_jets(fr3)))
            )
    return out


# -- special projective conditions (isotropic S-curvature) ---------------------------


def special_conditions(
    V: PolyVectorField,
    metric: MetricModel,
    samples,
    *,
    c: Optional[float] = None,
) -> tuple[float, float]:
    """Residuals of the two conditions characterizing special projective
    fields on a Randers space of isotropic S-curvature S = (n+1) c F with
    constant c:

    (i)  L G_alpha^i = ((V.c) beta + c L beta + L s_0 + P) y^i for some
         1-form P (x-dependent, linear in y); residual covers both the
         proportionality and the linearity of the extracted factor.
    (ii) 2 (V.c) alpha^2 + c t_00 = 0 with t_ij = L a_ij.

    For constant c (all built-ins), V.c = 0.
    """
    if metric.randers is None:
        raise InvalidSpec("special conditions need a Randers payload")
    if c is None:
        c = metric.isotropy_c
    if c is None:
        from .randers import isotropy_defect

        fits = []
        for s in samples:
            x = s.x if isinstance(s, JetContext) else s[0]
            fits.append(isotropy_defect(metric, x))
        cs = [f[0] for f in fits]
        defect = max(f[1] for f in fits)
        if defect > 1e-6 or (max(cs) - min(cs)) > 1e-6:
            raise IsotropyUnknown(
                f"cannot infer constant c: defect {defect:.3e}, spread {max(cs)-min(cs):.3e}"
            )
        c = float(np.mean(cs))
    ctxs = _as_contexts(metric.n, samples, order=5)
    alpha_m = riemannian_metric(metric.randers.a)
    res_i = 0.0
    res_ii = 0.0
    for ctx in ctxs:
        fr_a = get_frame(alpha_m, ctx)
        n = fr_a.n
        rj = randers_jets(metric, ctx)
        lift = complete_lift(V)
        lg_alpha = lie_spray_jets(fr_a, V)
        l_beta = lift.scalar(fr_a, rj.beta)
        s0 = jsum(rj.s_low[j] * fr_a.ys[j] for j in range(n))
        l_s0 = lift.scalar(fr_a, s0)
        T = jet_array((n,))
        for i in range(n):
            T[i] = lg_alpha[i] - (c * l_beta + l_s0) * fr_a.ys[i]
        y2 = jsum(fr_a.ys[m] * fr_a.ys[m] for m in range(n))
        Q = jsum(T[m] * fr_a.ys[m] for m in range(n)) / y2
        tv = values(T)
        prop = float(np.abs(tv - Q.value * fr_a.yvals).max()) / max(1.0, float(np.abs(tv).max()))
        lin = 0.0
        for i in range(n):
            qi = Q.d(n + i)
            for j in range(i, n):
                lin = max(lin, abs(qi.d(n + j).value))
        lin = _rel(lin, abs(Q.value))
        res_i = max(res_i, prop, lin)
        t_ij = lie_tensor_values(fr_a, V, rj.A, "ll")
        t00 = float(fr_a.yvals @ t_ij @ fr_a.yvals)
        res_ii = max(res_ii, _rel(abs(c * t00), abs(rj.alpha2.value)))
    return res_i, res_ii

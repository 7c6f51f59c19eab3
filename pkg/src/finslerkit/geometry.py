"""Spray, Berwald connection, curvature and covariant derivatives.

Everything is computed from the metric's scalar field F through jet
arithmetic at a single context point.  A Frame object owns all
intermediate jets at that point and is cached, so repeated quantities
(e.g. the metric side of many Lie-derivative evaluations) are computed
once.

Conventions.  Spray coefficients
    G^i = 1/4 g^{ih} { y^k d^2(F^2)/dx^k dy^h - d(F^2)/dx^h },
Berwald connection G^i_j = dG^i/dy^j, G^i_{jk} = dG^i_j/dy^k,
horizontal derivative d/dx^k - G^i_k d/dy^i, Riemann curvature
    R^i_k = 2 dG^i/dx^k - y^j d^2 G^i/dx^j dy^k
            + 2 G^j d^2 G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k,
curvature tensor K^i_{jkl} = (R^i_{k.l.j} - R^i_{l.k.j})/3, Ricci
tensor K_{jl} = K^i_{jil}, Ricci scalar the trace of R^i_k.

Each y- or x-derivative extraction lowers the truncation order by one;
ORDER_NEEDED records the context order each quantity requires to leave
at least a value part (add one per Lie derivative or extra derivative
the caller wants on top).
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import FinslerKitError, UnsupportedVariance
from .jets import Jet, JetContext, lift_point
from .metrics import MetricModel, VolumeForm, coordinate_volume
from .tensors import (
    TensorValue,
    check_positive_definite,
    jet_array,
    jet_matrix_inverse,
    jsum,
    values,
)

# Minimum context order for each quantity to retain a value part.
ORDER_NEEDED = {
    "fundamental_tensor": 2,
    "spray": 2,
    "berwald": 4,
    "riemann": 4,
    "berwald_riemann": 6,
    "ricci_scalar": 4,
    "ricci": 6,
    "s_curvature": 3,
    "s_quantities": 6,
    "relations": 7,
    "classify": 7,
    "douglas": 6,
    "weyl": 8,
    "weyl_tilde": 7,
    "weyl_star": 7,
    "z_tensor": 6,
}

RAY_CHECK_TOL = 1e-6


class Frame:
    """All jets of one metric at one context point, computed lazily."""

    def __init__(self, metric: MetricModel, ctx: JetContext):
        if metric.n != ctx.n:
            raise FinslerKitError(f"metric has n = {metric.n}, context has n = {ctx.n}")
        self.metric = metric
        self.ctx = ctx
        self.n = ctx.n
        self.order = ctx.order
        self.xs, self.ys = lift_point(ctx)
        self.yvals = np.asarray(ctx.y, dtype=float)
        self._cache: dict[str, object] = {}
        self._svol: dict[VolumeForm, "SBundle"] = {}

    def _get(self, key: str, build: Callable[[], object]):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # -- metric level ---------------------------------------------------

    @property
    def F(self) -> Jet:
        return self._get("F", lambda: self.metric.F(self.xs, self.ys))

    @property
    def F2(self) -> Jet:
        return self._get("F2", lambda: self.F * self.F)

    @property
    def g(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n))
            dy = [self.F2.d(n + i) for i in range(n)]
            for i in range(n):
                for j in range(i, n):
                    out[i, j] = out[j, i] = 0.5 * dy[i].d(n + j)
            check_positive_definite(values(out), what="fundamental tensor")
            return out

        return self._get("g", build)

    @property
    def ginv(self) -> np.ndarray:
        return self._get("ginv", lambda: jet_matrix_inverse(self.g, what="fundamental tensor"))

    # -- spray and connection --------------------------------------------

    @property
    def G(self) -> np.ndarray:
        def build():
            n = self.n
            rhs = jet_array((n,))
            dx = [self.F2.d(k) for k in range(n)]
            for h in range(n):
                rhs[h] = jsum(self.ys[k] * dx[k].d(n + h) for k in range(n)) - dx[h]
            out = jet_array((n,))
            for i in range(n):
                out[i] = 0.25 * jsum(self.ginv[i, h] * rhs[h] for h in range(n))
            return out

        return self._get("G", build)

    @property
    def G1(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n))
            for i in range(n):
                for j in range(n):
                    out[i, j] = self.G[i].d(n + j)
            return out

        return self._get("G1", build)

    @property
    def G2(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n, n))
            for i in range(n):
                for j in range(n):
                    dj = self.G1[i, j]
                    for k in range(j, n):
                        out[i, j, k] = out[i, k, j] = dj.d(n + k)
            return out

        return self._get("G2", build)

    # -- horizontal / covariant machinery ---------------------------------

    def horizontal(self, f: Jet, k: int) -> Jet:
        """delta f / delta x^k = df/dx^k - G^i_k df/dy^i."""
        n = self.n
        return f.d(k) - jsum(self.G1[i, k] * f.d(n + i) for i in range(n))

    def cov_deriv(self, T: np.ndarray, variance: str) -> np.ndarray:
        """Berwald horizontal covariant derivative; appends one lower index.

        ``T`` is an object array of jets whose rank equals len(variance),
        with variance characters 'u'/'l' per index.  Rank 0 (pass a bare
        Jet) through rank 4 inputs are supported.
        """
        if isinstance(T, Jet):
            if variance != "":
                raise UnsupportedVariance("scalar input takes empty variance")
            out = jet_array((self.n,))
            for k in range(self.n):
                out[k] = self.horizontal(T, k)
            return out
        rank = T.ndim
        if rank != len(variance) or rank > 4 or not set(variance) <= {"u", "l"}:
            raise UnsupportedVariance(f"variance {variance!r} with rank {rank} not supported")
        n = self.n
        out = jet_array(T.shape + (n,))
        for idx in np.ndindex(T.shape):
            for k in range(n):
                term = self.horizontal(T[idx], k)
                for slot, var in enumerate(variance):
                    for r in range(n):
                        ridx = idx[:slot] + (r,) + idx[slot + 1 :]
                        if var == "u":
                            term = term + T[ridx] * self.G2[idx[slot], r, k]
                        else:
                            term = term - T[ridx] * self.G2[r, k, idx[slot]]
                out[idx + (k,)] = term
        return out

    # -- curvature ---------------------------------------------------------

    @property
    def R(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n))
            dxG = [[self.G[i].d(j) for j in range(n)] for i in range(n)]
            for i in range(n):
                for k in range(n):
                    t1 = 2.0 * dxG[i][k]
                    t2 = jsum(self.ys[j] * dxG[i][j].d(n + k) for j in range(n))
                    t3 = 2.0 * jsum(self.G[j] * self.G2[i, j, k] for j in range(n))
                    t4 = jsum(self.G1[i, j] * self.G1[j, k] for j in range(n))
                    out[i, k] = t1 - t2 + t3 - t4
            # health check: the spray curvature annihilates the flag vector
            vals = values(out)
            ray = vals @ self.yvals
            scale = max(1.0, float(np.abs(vals).max()))
            if float(np.abs(ray).max()) > RAY_CHECK_TOL * scale:
                raise FinslerKitError(
                    f"curvature health check failed: |R^i_k y^k| = {np.abs(ray).max():.3e}"
                )
            return out

        return self._get("R", build)

    @property
    def K4(self) -> np.ndarray:
        def build():
            n = self.n
            dRy = [[[self.R[i, k].d(n + l) for l in range(n)] for k in range(n)] for i in range(n)]
            out = jet_array((n, n, n, n))
            for i in range(n):
                for k in range(n):
                    for l in range(n):
                        diff = dRy[i][k][l] - dRy[i][l][k]
                        for j in range(n):
                            out[i, j, k, l] = (1.0 / 3.0) * diff.d(n + j)
            return out

        return self._get("K4", build)

    @property
    def ricci_scalar_jet(self) -> Jet:
        return self._get("ric", lambda: jsum(self.R[i, i] for i in range(self.n)))

    @property
    def Kjl(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n))
            for j in range(n):
                for l in range(n):
                    out[j, l] = jsum(self.K4[i, j, i, l] for i in range(n))
            return out

        return self._get("Kjl", build)

    @property
    def Rskew(self) -> np.ndarray:
        def build():
            n = self.n
            out = jet_array((n, n))
            for j in range(n):
                for l in range(n):
                    out[j, l] = 0.5 * (self.Kjl[j, l] - self.Kjl[l, j])
            return out

        return self._get("Rskew", build)

    # -- S-curvature bundle -------------------------------------------------

    def s_bundle(self, vol: VolumeForm) -> "SBundle":
        got = self._svol.get(vol)
        if got is None:
            got = SBundle(self, vol)
            self._svol[vol] = got
        return got


class SBundle:
    """S-curvature and its derived quantities for one volume form."""

    def __init__(self, frame: Frame, vol: VolumeForm):
        self.frame = frame
        self.vol = vol
        self._cache: dict[str, object] = {}

    def _get(self, key: str, build: Callable[[], object]):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def S(self) -> Jet:
        def build():
            fr = self.frame
            n = fr.n
            log_sigma = self.vol.sigma(fr.xs).log()
            trace = jsum(fr.G1[m, m] for m in range(n))
            drift = jsum(fr.ys[m] * log_sigma.d(m) for m in range(n))
            return trace - drift

        return self._get("S", build)

    @property
    def S_dy(self) -> np.ndarray:
        def build():
            fr = self.frame
            out = jet_array((fr.n,))
            for i in range(fr.n):
                out[i] = self.S.d(fr.n + i)
            return out

        return self._get("S_dy", build)

    @property
    def cov_S_dy(self) -> np.ndarray:
        return self._get("cov_S_dy", lambda: self.frame.cov_deriv(self.S_dy, "l"))

    @property
    def Xi(self) -> np.ndarray:
        def build():
            fr = self.frame
            n = fr.n
            out = jet_array((n,))
            for i in range(n):
                out[i] = jsum(fr.ys[m] * self.cov_S_dy[i, m] for m in range(n)) - fr.horizontal(
                    self.S, i
                )
            return out

        return self._get("Xi", build)

    @property
    def E(self) -> np.ndarray:
        def build():
            fr = self.frame
            n = fr.n
            out = jet_array((n, n))
            for i in range(n):
                di = self.S_dy[i]
                for j in range(i, n):
                    out[i, j] = out[j, i] = 0.5 * di.d(n + j)
            return out

        return self._get("E", build)

    @property
    def Sigma(self) -> np.ndarray:
        def build():
            fr = self.frame
            n = fr.n
            out = jet_array((n, n))
            for i in range(n):
                for j in range(n):
                    out[i, j] = (self.cov_S_dy[i, j] - self.cov_S_dy[j, i]) / (n + 1.0)
            return out

        return self._get("Sigma", build)

    @property
    def H(self) -> np.ndarray:
        def build():
            fr = self.frame
            n = fr.n
            covE = fr.cov_deriv(self.E, "ll")
            out = jet_array((n, n))
            for i in range(n):
                for j in range(n):
                    out[i, j] = jsum(fr.ys[m] * covE[i, j, m] for m in range(n))
            return out

        return self._get("H", build)


# -- frame cache --------------------------------------------------------------

_FRAMES: "OrderedDict[tuple, Frame]" = OrderedDict()
_FRAME_CACHE_SIZE = 96


def get_frame(metric: MetricModel, ctx: JetContext) -> Frame:
    key = (metric, ctx.x, ctx.y, ctx.order)
    fr = _FRAMES.get(key)
    if fr is None:
        fr = Frame(metric, ctx)
        _FRAMES[key] = fr
        if len(_FRAMES) > _FRAME_CACHE_SIZE:
            _FRAMES.popitem(last=False)
    else:
        _FRAMES.move_to_end(key)
    return fr


At = Union[JetContext, tuple]


def as_context(metric: MetricModel, at: At, min_order: int) -> JetContext:
    """Accept a JetContext or an (x, y) pair; ensure the truncation order
    suffices for the requested quantity."""
    if isinstance(at, JetContext):
        if at.order < min_order:
            raise FinslerKitError(
                f"context order {at.order} too small, quantity needs {min_order}"
            )
        return at
    x, y = at
    return JetContext.at(x, y, order=max(min_order, 7))


# -- public operations ---------------------------------------------------------


def fundamental_tensor(metric: MetricModel, at: At) -> TensorValue:
    """g_ij = 1/2 d^2 F^2 / dy^i dy^j; raises NotPositiveDefinite if it fails
    the eigenvalue check at the point."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["fundamental_tensor"]))
    return TensorValue(values(fr.g), "ll", name="fundamental_tensor")


def spray(metric: MetricModel, at: At) -> np.ndarray:
    """Geodesic spray coefficients G^i at the point."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["spray"]))
    return values(fr.G)


def berwald(metric: MetricModel, at: At) -> tuple[TensorValue, TensorValue]:
    """(G^i_j, G^i_jk): Berwald connection coefficients."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["berwald"]))
    return (
        TensorValue(values(fr.G1), "ul", name="berwald_1"),
        TensorValue(values(fr.G2), "ull", name="berwald_2"),
    )


def horizontal(metric: MetricModel, at: At, f: Callable[[Frame], Jet], k: int) -> float:
    """Horizontal derivative delta f / delta x^k of a frame-derived scalar."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["berwald"]))
    return fr.horizontal(f(fr), k).value


def cov_deriv(
    metric: MetricModel,
    at: At,
    tensor: Callable[[Frame], np.ndarray | Jet],
    variance: str,
    min_order: int = 5,
) -> TensorValue:
    """Horizontal covariant derivative of a frame-derived tensor field."""
    fr = get_frame(metric, as_context(metric, at, min_order))
    D = fr.cov_deriv(tensor(fr), variance)
    return TensorValue(values(D), variance + "l", name="cov_deriv")


def riemann(metric: MetricModel, at: At) -> TensorValue:
    """Spray curvature R^i_k (already health-checked against R^i_k y^k = 0)."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["riemann"]))
    return TensorValue(values(fr.R), "ul", name="riemann")


def berwald_riemann(metric: MetricModel, at: At) -> TensorValue:
    """K^i_{jkl}, antisymmetric in its last two indices."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["berwald_riemann"]))
    return TensorValue(values(fr.K4), "ulll", name="berwald_riemann")


@dataclass(frozen=True)
class CurvatureBundle:
    riemann: TensorValue
    berwald_riemann: TensorValue
    ricci_scalar: float
    ricci_tensor: TensorValue
    ricci_skew: TensorValue


def ricci(metric: MetricModel, at: At) -> tuple[float, TensorValue, TensorValue]:
    """(Ricci scalar, Ricci tensor K_jl, its antisymmetric part)."""
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["ricci"]))
    return (
        fr.ricci_scalar_jet.value,
        TensorValue(values(fr.Kjl), "ll", name="ricci_tensor"),
        TensorValue(values(fr.Rskew), "ll", name="ricci_skew"),
    )


def curvature_bundle(metric: MetricModel, at: At) -> CurvatureBundle:
    fr = get_frame(metric, as_context(metric, at, ORDER_NEEDED["ricci"]))
    return CurvatureBundle(
        riemann=TensorValue(values(fr.R), "ul", name="riemann"),
        berwald_riemann=TensorValue(values(fr.K4), "ulll", name="berwald_riemann"),
        ricci_scalar=fr.ricci_scalar_jet.value,
        ricci_tensor=TensorValue(values(fr.Kjl), "ll", name="ricci_tensor"),
        ricci_skew=TensorValue(values(fr.Rskew), "ll", name="ricci_skew"),
    )


def default_volume(metric: MetricModel) -> VolumeForm:
    """Busemann-Hausdorff closed form for Randers payloads, else coordinate."""
    if metric.randers is not None:
        from .randers import bh_volume_form

        return bh_volume_form(metric.randers)
    return coordinate_volume(metric.n)

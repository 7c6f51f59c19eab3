"""Randers metrics: defining data, closed-form spray, volume, S-curvature.

A Randers metric is F = alpha + beta with alpha = sqrt(a_ij y^i y^j) a
Riemannian metric and beta = b_i y^i a one-form with ||beta||_alpha < 1.
This module provides the classical data built from the Levi-Civita
connection of alpha:

    r_ij = (b_{i;j} + b_{j;i}) / 2      (covariant symmetrization)
    s_ij = (b_{i;j} - b_{j;i}) / 2
    s^i_j = a^{ih} s_hj,  s_j = b_i s^i_j,  e_ij = r_ij + b_i s_j + b_j s_i

with which the spray splits off the Riemannian part,

    G^i = G_alpha^i + (e_00 / (2F) - s_0) y^i + alpha s^i_0,

the Busemann-Hausdorff density has the closed form
sigma = sqrt(det a) (1 - ||beta||^2)^{(n+1)/2}, and the S-curvature is

    S = (n+1) { e_00 / (2F) - s_0 - rho_0 },   rho = ln sqrt(1 - ||beta||^2).

All of these are independent routes to quantities the generic spray
pipeline also computes; the verification drivers diff the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    IntegrationDidNotConverge,
    InvalidSpec,
    RandersConditionViolated,
)
from .geometry import Frame, as_context, get_frame
from .jets import Jet, JetContext, ScalarField, jet_space, lift_point
from .metrics import (
    MetricModel,
    OneFormSpec,
    RandersPayload,
    RiemannianSpec,
    VolumeForm,
    coordinate_volume,
)
from .tensors import jet_array, jet_matrix_inverse, jsum, values

# re-exported here because they belong to the Randers vocabulary
__all__ = [
    "RiemannianSpec",
    "OneFormSpec",
    "RandersPayload",
    "VolumeForm",
    "RandersData",
    "coordinate_volume",
    "levi_civita",
    "riemann_curvature_alpha",
    "randers_data",
    "randers_metric",
    "riemannian_metric",
    "spray_randers",
    "bh_volume_form",
    "bh_volume",
    "s_curvature",
    "s_curvature_randers",
]


def base_jets(n: int, x: Sequence[float], order: int) -> list[Jet]:
    """Coordinate jets in the n-variable base-only space (for x-dependent
    closures evaluated outside a full tangent-bundle context)."""
    space = jet_space(n, order)
    return [Jet.variable(space, i, float(x[i])) for i in range(n)]


def levi_civita_jets(a: RiemannianSpec, xs: Sequence[Jet]) -> np.ndarray:
    """Christoffel symbols Gamma^i_{jk} of a_ij as jets at the given x-jets."""
    A = a.matrix(xs)
    Ainv = jet_matrix_inverse(A, what="riemannian matrix")
    return levi_civita_from(A, Ainv, a.n)


def levi_civita(
    a: RiemannianSpec, x: Sequence[float], y: Optional[Sequence[float]] = None
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Pointwise Christoffel symbols of alpha and, when y is given, the
    Riemannian spray G_alpha^i = (1/2) Gamma^i_{jk} y^j y^k."""
    xs = base_jets(a.n, x, order=1)
    Gamma = values(levi_civita_jets(a, xs))
    if y is None:
        return Gamma, None
    y = np.asarray(y, dtype=float)
    return Gamma, 0.5 * np.einsum("ijk,j,k->i", Gamma, y, y)


def riemann_curvature_alpha(a: RiemannianSpec, x: Sequence[float], order: int = 3) -> np.ndarray:
    """Classical curvature R^i_{jkl} of alpha via the Christoffel route:
    R^i_{jkl} = d_k Gamma^i_{jl} - d_l Gamma^i_{jk}
                + Gamma^i_{km} Gamma^m_{jl} - Gamma^i_{lm} Gamma^m_{jk}."""
    n = a.n
    xs = base_jets(n, x, order)
    Gamma = levi_civita_jets(a, xs)
    out = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    term = Gamma[i, j, l].d(k) - Gamma[i, j, k].d(l)
                    term = term + jsum(
                        Gamma[i, k, m] * Gamma[m, j, l] - Gamma[i, l, m] * Gamma[m, j, k]
                        for m in range(n)
                    )
                    out[i, j, k, l] = term.value
    return out


@dataclass(frozen=True)
class RandersData:
    """Pointwise classical data of a Randers metric at (x, y)."""

    a: np.ndarray          # a_ij
    a_inv: np.ndarray      # a^ij
    b: np.ndarray          # b_i
    b_norm2: float         # ||beta||_alpha^2
    alpha: float
    beta: float
    r: np.ndarray          # r_ij
    s: np.ndarray          # s_ij
    s_mixed: np.ndarray    # s^i_j
    s_low: np.ndarray      # s_j
    e: np.ndarray          # e_ij
    e00: float
    s0: float
    rho0: float
    christoffel: np.ndarray  # Gamma^i_{jk} values
    spray_alpha: np.ndarray  # G_alpha^i values


class _RandersJets:
    """Jet-level Randers data at a context, reused by several routes."""

    def __init__(self, payload: RandersPayload, ctx: JetContext):
        n = payload.n
        if ctx.n != n:
            raise InvalidSpec("context dimension disagrees with payload")
        self.n = n
        self.ctx = ctx
        xs, ys = lift_point(ctx)
        self.xs, self.ys = xs, ys
        self.A = payload.a.matrix(xs)
        self.Ainv = jet_matrix_inverse(self.A, what="riemannian matrix")
        self.bvec = payload.b.covector(xs)
        self.Gamma = levi_civita_from(self.A, self.Ainv, n)
        # nabla_j b_i
        nb = jet_array((n, n))
        for i in range(n):
            for j in range(n):
                nb[i, j] = self.bvec[i].d(j) - jsum(
                    self.bvec[r] * self.Gamma[r, i, j] for r in range(n)
                )
        self.nabla_b = nb
        self.r = jet_array((n, n))
        self.s = jet_array((n, n))
        for i in range(n):
            for j in range(n):
                self.r[i, j] = 0.5 * (nb[i, j] + nb[j, i])
                self.s[i, j] = 0.5 * (nb[i, j] - nb[j, i])
        self.s_mixed = jet_array((n, n))
        for i in range(n):
            for j in range(n):
                self.s_mixed[i, j] = jsum(self.Ainv[i, h] * self.s[h, j] for h in range(n))
        self.s_low = jet_array((n,))
        for j in range(n):
            self.s_low[j] = jsum(self.bvec[i] * self.s_mixed[i, j] for i in range(n))
        self.e = jet_array((n, n))
        for i in range(n):
            for j in range(n):
                self.e[i, j] = (
                    self.r[i, j] + self.bvec[i] * self.s_low[j] + self.bvec[j] * self.s_low[i]
                )
        self.b_norm2 = jsum(
            self.Ainv[i, j] * self.bvec[i] * self.bvec[j] for i in range(n) for j in range(n)
        )
        if self.b_norm2.value >= 1.0:
            raise RandersConditionViolated(
                f"||beta||_alpha^2 = {self.b_norm2.value:.6f} >= 1 at x = {ctx.x}"
            )
        self.alpha2 = jsum(
            self.A[i, j] * ys[i] * ys[j] for i in range(n) for j in range(n)
        )
        self.alpha = self.alpha2.sqrt()
        self.beta = jsum(self.bvec[i] * ys[i] for i in range(n))
        self.F = self.alpha + self.beta
        self.rho = (1.0 - self.b_norm2).log() * 0.5
        self.rho0 = jsum(ys[i] * self.rho.d(i) for i in range(n))
        self.e00 = jsum(self.e[i, j] * ys[i] * ys[j] for i in range(n) for j in range(n))
        self.s0 = jsum(self.s_low[j] * ys[j] for j in range(n))
        self.spray_alpha = jet_array((n,))
        for i in range(n):
            self.spray_alpha[i] = 0.5 * jsum(
                self.Gamma[i, j, k] * ys[j] * ys[k] for j in range(n) for k in range(n)
            )


def levi_civita_from(A: np.ndarray, Ainv: np.ndarray, n: int) -> np.ndarray:
    dA = [[[A[i, j].d(k) for k in range(n)] for j in range(n)] for i in range(n)]
    out = jet_array((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                term = jsum(
                    Ainv[i, h] * (dA[h][j][k] + dA[h][k][j] - dA[j][k][h]) for h in range(n)
                )
                out[i, j, k] = out[i, k, j] = 0.5 * term
    return out


def randers_jets(metric_or_payload, ctx: JetContext) -> _RandersJets:
    payload = _payload_of(metric_or_payload)
    return _RandersJets(payload, ctx)


def _payload_of(metric_or_payload) -> RandersPayload:
    if isinstance(metric_or_payload, RandersPayload):
        return metric_or_payload
    payload = getattr(metric_or_payload, "randers", None)
    if payload is None:
        raise InvalidSpec("metric carries no Randers payload")
    return payload


def randers_data(metric_or_payload, at) -> RandersData:
    """Pointwise r/s/e data; `at` is a JetContext or an (x, y) pair."""
    payload = _payload_of(metric_or_payload)
    if isinstance(at, JetContext):
        ctx = at
    else:
        ctx = JetContext.at(at[0], at[1], order=2)
    rj = _RandersJets(payload, ctx)
    return RandersData(
        a=values(rj.A),
        a_inv=values(rj.Ainv),
        b=values(rj.bvec),
        b_norm2=rj.b_norm2.value,
        alpha=rj.alpha.value,
        beta=rj.beta.value,
        r=values(rj.r),
        s=values(rj.s),
        s_mixed=values(rj.s_mixed),
        s_low=values(rj.s_low),
        e=values(rj.e),
        e00=rj.e00.value,
        s0=rj.s0.value,
        rho0=rj.rho0.value,
        christoffel=values(rj.Gamma),
        spray_alpha=values(rj.spray_alpha),
    )


def spray_randers(metric_or_payload, at) -> np.ndarray:
    """Spray coefficients via the closed Randers form
    G^i = G_alpha^i + (e00/(2F) - s0) y^i + alpha s^i_0."""
    payload = _payload_of(metric_or_payload)
    ctx = at if isinstance(at, JetContext) else JetContext.at(at[0], at[1], order=2)
    rj = _RandersJets(payload, ctx)
    n = payload.n
    y = np.asarray(ctx.y, dtype=float)
    Fv = rj.F.value
    if Fv <= 0.0:
        raise RandersConditionViolated(f"F = {Fv} <= 0 at the evaluation point")
    coef = rj.e00.value / (2.0 * Fv) - rj.s0.value
    s_mixed = values(rj.s_mixed)
    return values(rj.spray_alpha) + coef * y + rj.alpha.value * (s_mixed @ y)


def randers_metric(
    a: RiemannianSpec,
    b: OneFormSpec,
    *,
    name: str = "",
    isotropy_c: Optional[float] = None,
    batch_fn=None,
) -> MetricModel:
    """Assemble F = sqrt(a_ij y^i y^j) + b_i y^i into a MetricModel."""
    if a.n != b.n:
        raise InvalidSpec("alpha and beta dimensions disagree")
    n = a.n
    payload = RandersPayload(a=a, b=b)

    def fn(xs, ys):
        A = a.matrix(xs)
        bv = b.covector(xs)
        alpha2 = jsum(A[i, j] * ys[i] * ys[j] for i in range(n) for j in range(n))
        return alpha2.sqrt() + jsum(bv[i] * ys[i] for i in range(n))

    batch = batch_fn if batch_fn is not None else _payload_batch(payload)
    return MetricModel(
        n=n,
        F=ScalarField(n=n, fn=fn, name=name or "randers"),
        kind="randers",
        randers=payload,
        isotropy_c=isotropy_c,
        batch_fn=batch,
        name=name or "randers",
    )


def riemannian_metric(a: RiemannianSpec, *, name: str = "") -> MetricModel:
    """F = sqrt(a_ij y^i y^j) with a zero one-form payload (it is the
    beta = 0 Randers case, so every Randers route stays available)."""
    n = a.n

    def zero_form(xs):
        space = xs[0].space
        out = jet_array((n,))
        for i in range(n):
            out[i] = Jet.constant(space, 0.0)
        return out

    b = OneFormSpec(n=n, covector_fn=zero_form, name="zero")
    m = randers_metric(a, b, name=name or (a.name + "-riemannian"))
    return MetricModel(
        n=n,
        F=m.F,
        kind="riemannian",
        randers=m.randers,
        isotropy_c=m.isotropy_c,
        batch_fn=m.batch_fn,
        name=name or (a.name + "-riemannian"),
    )


def _payload_batch(payload: RandersPayload):
    """Vectorized F(x, Y) evaluator: the payload matrices at fixed x are
    plain numbers, so a batch reduces to numpy quadratic forms."""

    def batch(x: np.ndarray, Y: np.ndarray) -> np.ndarray:
        n = payload.n
        xs = base_jets(n, x, order=1)
        A = values(payload.a.matrix(xs))
        bv = values(payload.b.covector(xs))
        quad = np.einsum("ki,ij,kj->k", Y, A, Y)
        return np.sqrt(quad) + Y @ bv

    return batch


# -- volume ---------------------------------------------------------------


def bh_volume_form(payload: RandersPayload) -> VolumeForm:
    """Busemann-Hausdorff density as a jet closure:
    sigma = sqrt(det a) * (1 - ||beta||^2)^{(n+1)/2}."""
    n = payload.n

    def fn(xs):
        A = payload.a.matrix(xs)
        Ainv = jet_matrix_inverse(A, what="riemannian matrix")
        bv = payload.b.covector(xs)
        det = _jet_det(A)
        bn2 = jsum(Ainv[i, j] * bv[i] * bv[j] for i in range(n) for j in range(n))
        return det.sqrt() * (1.0 - bn2).power(0.5 * (n + 1))

    return VolumeForm(n=n, sigma_fn=fn, tag="busemann-hausdorff")


def _jet_det(A: np.ndarray) -> Jet:
    n = A.shape[0]
    if n == 1:
        return A[0, 0]
    if n == 2:
        return A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if n == 3:
        return (
            A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
        )
    # cofactor expansion along the first row
    total = None
    for j in range(n):
        minor = np.delete(np.delete(A, 0, axis=0), j, axis=1)
        term = A[0, j] * _jet_det(minor)
        if j % 2 == 1:
            term = -term
        total = term if total is None else total + term
    return total


def _unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _sphere_nodes(n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights on the unit sphere S^{n-1} (weights
    sum to 1, approximating the uniform average)."""
    if n == 2:
        theta = 2.0 * math.pi * np.arange(count) / count
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        w = np.full(count, 1.0 / count)
        return nodes, w
    if n == 3:
        # Fibonacci sphere lattice
        k = np.arange(count) + 0.5
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        z = 1.0 - 2.0 * k / count
        rad = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
        nodes = np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)
        w = np.full(count, 1.0 / count)
        return nodes, w
    # rejection-free: normalized Gaussian directions, equal weights
    rng = np.random.default_rng(1234)
    g = rng.normal(size=(count, n))
    nodes = g / np.linalg.norm(g, axis=1, keepdims=True)
    return nodes, np.full(count, 1.0 / count)


def bh_volume(
    metric: MetricModel,
    x: Sequence[float],
    method: str = "closed_form_randers",
    nodes: int = 200_000,
) -> float:
    """Busemann-Hausdorff density sigma_F(x) = vol(B^n) / vol{y : F(x,y) < 1}.

    ``closed_form_randers`` uses the payload closed form.
    ``indicatrix_integration`` measures the unit ball of F directly:
    vol{F < 1} = (1/n) integral over S^{n-1} of t(u)^n, where t(u) solves
    F(x, t u) = 1 by (vectorized) Newton iteration.
    """
    x = np.asarray(x, dtype=float)
    if method == "closed_form_randers":
        payload = _payload_of(metric)
        xs = base_jets(metric.n, x, order=1)
        return bh_volume_form(payload).sigma(xs).value
    if method != "indicatrix_integration":
        raise InvalidSpec(f"unknown bh_volume method {method!r}")
    n = metric.n
    u, w = _sphere_nodes(n, nodes)
    t = np.ones(len(u))
    for _ in range(50):
        Fv = metric.batch_value(x, t[:, None] * u)
        resid = Fv - 1.0
        if np.abs(resid).max() < 1e-12:
            break
        slope = metric.batch_value(x, u)  # dF(x, t u)/dt = F(x, u) by homogeneity
        t = t - resid / slope
    else:
        raise IntegrationDidNotConverge("indicatrix solve did not reach 1e-12")
    if (t <= 0.0).any():
        raise IntegrationDidNotConverge("indicatrix radius went nonpositive")
    # vol{F<1} = vol(S^{n-1}) / n * average(t^n); sigma = vol(B^n)/vol{F<1}
    mean_tn = float((t ** n) @ w)
    return 1.0 / mean_tn


# -- S-curvature -----------------------------------------------------------


def s_curvature(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> float:
    """Generic-route S-curvature S = G^m_m - y^m d_m ln sigma for the
    given volume form (defaults to Busemann-Hausdorff for Randers
    payloads, coordinate volume otherwise)."""
    from .geometry import default_volume

    ctx = as_context(metric, at, 3)
    fr = get_frame(metric, ctx)
    v = vol if vol is not None else default_volume(metric)
    return fr.s_bundle(v).S.value


def s_curvature_randers(metric_or_payload, at) -> float:
    """Closed-form Randers S-curvature S = (n+1){e00/(2F) - s0 - rho0}."""
    payload = _payload_of(metric_or_payload)
    ctx = at if isinstance(at, JetContext) else JetContext.at(at[0], at[1], order=2)
    rj = _RandersJets(payload, ctx)
    n = payload.n
    Fv = rj.F.value
    if Fv <= 0.0:
        raise RandersConditionViolated(f"F = {Fv} <= 0 at the evaluation point")
    return (n + 1.0) * (rj.e00.value / (2.0 * Fv) - rj.s0.value - rj.rho0.value)


def isotropy_defect(metric_or_payload, x: Sequence[float]) -> tuple[float, float]:
    """How far e_ij is from 2 c(x) (a_ij - b_i b_j) at the base point.

    e00 = 2 c (alpha^2 - beta^2) for all y is a matrix identity, so the
    defect is measured on matrices: c is fitted by trace ratio and the
    residual is ||e - 2 c (a - b b)||_inf / max(1, ||e||_inf).  Returns
    (fitted c, relative residual)."""
    payload = _payload_of(metric_or_payload)
    n = payload.n
    y0 = [0.0] * n
    y0[0] = 1.0
    ctx = JetContext.at(x, y0, order=2)
    rj = _RandersJets(payload, ctx)
    e = values(rj.e)
    a = values(rj.A)
    b = values(rj.bvec)
    M = a - np.outer(b, b)
    denom = np.trace(M)
    c = 0.5 * np.trace(e) / denom
    resid = float(np.abs(e - 2.0 * c * M).max()) / max(1.0, float(np.abs(e).max()))
    return float(c), resid

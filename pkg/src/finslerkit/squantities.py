"""S-curvature derived quantities and their interrelations.

With S the S-curvature for a chosen volume form, the four companion
quantities are

    Xi_i    = y^m S_{.i|m} - S_{|i}
    E_ij    = S_{.i.j} / 2
    H_ij    = y^m S_{.i.j|m} / 2
    Sigma_ij = (S_{.i|j} - S_{.j|i}) / (n+1)

(dot: fiber derivative, bar: horizontal covariant derivative for the
Berwald connection).  They satisfy identities independent of the volume
form; relations_check measures all of them:

    (R00)  Sigma_ij + Sigma_ji = 0
    (R01)  y^i Sigma_ij + Xi_j / (n+1) = 0
    (R02)  y^j Xi_{j.k} + Xi_k = 0
    (R1)   Xi_{i.j} + Xi_{j.i} - 4 H_ij = 0
    (R2)   Xi_{i.j} - Xi_{j.i} - 2(n+1) Sigma_ij = 0
    (R3)   y^i Sigma_{ij.k} + 2 H_jk / (n+1) = 0
    (R4)   Xi_{j.k} - 2 H_jk - (n+1) Sigma_jk = 0
    (R5)   Xi_k + (n+1) y^j Sigma_{jk} = 0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ORDER_NEEDED, as_context, default_volume, get_frame
from .jets import Jet, JetContext
from .metrics import MetricModel, VolumeForm
from .tensors import TensorValue, values


def _bundle(metric: MetricModel, at, vol: Optional[VolumeForm], min_order: int):
    ctx = as_context(metric, at, min_order)
    fr = get_frame(metric, ctx)
    v = vol if vol is not None else default_volume(metric)
    return fr, fr.s_bundle(v)


def xi(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> np.ndarray:
    """Xi_i = y^m S_{.i|m} - S_{|i}; volume-form independent."""
    _, sb = _bundle(metric, at, vol, ORDER_NEEDED["s_quantities"] - 1)
    return values(sb.Xi)


def e_tensor(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> TensorValue:
    """E_ij = S_{.i.j}/2, the mean Berwald curvature scaled to S."""
    _, sb = _bundle(metric, at, vol, ORDER_NEEDED["s_quantities"] - 1)
    return TensorValue(values(sb.E), "ll", name="e_tensor")


def h_tensor(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> TensorValue:
    """H_ij = y^m S_{.i.j|m}/2."""
    _, sb = _bundle(metric, at, vol, ORDER_NEEDED["s_quantities"])
    return TensorValue(values(sb.H), "ll", name="h_tensor")


def sigma_tensor(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> TensorValue:
    """Sigma_ij = (S_{.i|j} - S_{.j|i})/(n+1); antisymmetric."""
    _, sb = _bundle(metric, at, vol, ORDER_NEEDED["s_quantities"] - 1)
    return TensorValue(values(sb.Sigma), "ll", name="sigma_tensor")


@dataclass(frozen=True)
class SQuantities:
    xi: np.ndarray
    e: TensorValue
    h: TensorValue
    sigma: TensorValue
    s: float


def s_quantities(metric: MetricModel, at, vol: Optional[VolumeForm] = None) -> SQuantities:
    _, sb = _bundle(metric, at, vol, ORDER_NEEDED["s_quantities"])
    return SQuantities(
        xi=values(sb.Xi),
        e=TensorValue(values(sb.E), "ll", name="e_tensor"),
        h=TensorValue(values(sb.H), "ll", name="h_tensor"),
        sigma=TensorValue(values(sb.Sigma), "ll", name="sigma_tensor"),
        s=sb.S.value,
    )


def relations_check(
    metric: MetricModel, at, vol: Optional[VolumeForm] = None
) -> dict[str, float]:
    """Max residual of each relation (R00)-(R5) at the point, normalized
    by max(1, scale of the participating quantities)."""
    fr, sb = _bundle(metric, at, vol, ORDER_NEEDED["relations"])
    n = fr.n
    y = fr.yvals
    Xi = values(sb.Xi)
    Sig = values(sb.Sigma)
    Hm = values(sb.H)
    # fiber derivatives of Xi and Sigma as values
    Xi_dy = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            Xi_dy[i, j] = sb.Xi[i].d(n + j).value
    Sig_dy = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            dij = sb.Sigma[i, j]
            for k in range(n):
                Sig_dy[i, j, k] = dij.d(n + k).value
    scale = max(1.0, np.abs(Xi).max(), np.abs(Hm).max(), np.abs(Sig).max(), np.abs(Xi_dy).max())
    out = {
        "R00": float(np.abs(Sig + Sig.T).max()),
        "R01": float(np.abs(y @ Sig + Xi / (n + 1.0)).max()),
        "R02": float(np.abs(y @ Xi_dy + Xi).max()),
        "R1": float(np.abs(Xi_dy + Xi_dy.T - 4.0 * Hm).max()),
        "R2": float(np.abs(Xi_dy - Xi_dy.T - 2.0 * (n + 1.0) * Sig).max()),
        "R3": float(np.abs(np.einsum("i,ijk->jk", y, Sig_dy) + 2.0 * Hm / (n + 1.0)).max()),
        "R4": float(np.abs(Xi_dy - 2.0 * Hm - (n + 1.0) * Sig).max()),
        "R5": float(np.abs(Xi + (n + 1.0) * (y @ Sig)).max()),
    }
    return {k: v / scale for k, v in out.items()}


def custom_test_volume(n: int) -> VolumeForm:
    """sigma = 1 + 0.1 x^1: the fixed custom form for independence tests."""

    def fn(xs):
        return 1.0 + 0.1 * xs[0]

    return VolumeForm(n=n, sigma_fn=fn, tag="custom")

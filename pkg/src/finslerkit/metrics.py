"""Metric model containers.

A MetricModel wraps the scalar field F on the slit tangent bundle.
Metrics of Randers type additionally carry the defining Riemannian
matrix and one-form as jet closures, which unlocks the closed-form
routes (Levi-Civita data, Busemann-Hausdorff density, S-curvature) next
to the always-available generic spray route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidSpec
from .jets import Jet, JetContext, ScalarField, lift_point


@dataclass(frozen=True)
class RiemannianSpec:
    """Symmetric positive definite matrix field a_ij(x) as a jet closure."""

    n: int
    matrix_fn: Callable[[Sequence[Jet]], np.ndarray]
    name: str = ""

    def matrix(self, xs: Sequence[Jet]) -> np.ndarray:
        a = self.matrix_fn(xs)
        if a.shape != (self.n, self.n):
            raise InvalidSpec(f"matrix closure returned shape {a.shape}, wanted {(self.n, self.n)}")
        return a


@dataclass(frozen=True)
class OneFormSpec:
    """Covector field b_i(x) as a jet closure."""

    n: int
    covector_fn: Callable[[Sequence[Jet]], np.ndarray]
    name: str = ""

    def covector(self, xs: Sequence[Jet]) -> np.ndarray:
        b = self.covector_fn(xs)
        if b.shape != (self.n,):
            raise InvalidSpec(f"covector closure returned shape {b.shape}, wanted {(self.n,)}")
        return b


@dataclass(frozen=True)
class RandersPayload:
    """Defining data of a Randers metric F = alpha + beta."""

    a: RiemannianSpec
    b: OneFormSpec

    def __post_init__(self):
        if self.a.n != self.b.n:
            raise InvalidSpec("alpha and beta dimensions disagree")

    @property
    def n(self) -> int:
        return self.a.n


@dataclass(frozen=True)
class VolumeForm:
    """Volume density sigma(x) > 0 as a jet closure on base coordinates."""

    n: int
    sigma_fn: Callable[[Sequence[Jet]], Jet]
    tag: str = "custom"

    def sigma(self, xs: Sequence[Jet]) -> Jet:
        return self.sigma_fn(xs)


def coordinate_volume(n: int) -> VolumeForm:
    """sigma = 1: the coordinate volume form."""

    def fn(xs):
        space = xs[0].space
        return Jet.constant(space, 1.0)

    return VolumeForm(n=n, sigma_fn=fn, tag="coordinate")


@dataclass(frozen=True)
class MetricModel:
    """A Finsler metric presented to the engine.

    ``F`` must be positively 1-homogeneous in y with positive definite
    fundamental tensor on the sampled domain; these are checked by the
    verification drivers, not at construction.  ``batch_fn``, when
    present, evaluates F(x, Y) over a batch of fiber vectors with plain
    floats (used by the indicatrix volume integrator).
    """

    n: int
    F: ScalarField
    kind: str = "generic"
    randers: Optional[RandersPayload] = None
    isotropy_c: Optional[float] = None
    batch_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.F.n != self.n:
            raise InvalidSpec("scalar field dimension disagrees with metric dimension")
        if self.randers is not None and self.randers.n != self.n:
            raise InvalidSpec("Randers payload dimension disagrees with metric dimension")

    def value(self, x: Sequence[float], y: Sequence[float]) -> float:
        return self.F.value(x, y)

    def batch_value(self, x: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """F(x, Y_k) for a batch of fiber vectors, plain float path."""
        if self.batch_fn is not None:
            return self.batch_fn(np.asarray(x, dtype=float), np.asarray(Y, dtype=float))
        out = np.empty(len(Y))
        for k, y in enumerate(Y):
            out[k] = self.value(x, y)
        return out

    def F_jet(self, ctx: JetContext) -> Jet:
        xs, ys = lift_point(ctx)
        return self.F(xs, ys)

"""Vector fields polynomial in x, and their complete lifts.

The projective machinery only ever needs fields through second x-derivatives,
and every classical family involved (Killing fields of space forms, the
projective algebra of flat space) is at most quadratic, so fields are stored
as V^i = b^i + A^i_k x^k + C^i_{jk} x^j x^k with C symmetric in (j, k).

The complete lift to the tangent bundle is
    V-hat = V^i d/dx^i + y^k (dV^i/dx^k) d/dy^i,
which acts on scalars f(x, y) as
    V-hat(f) = V^k df/dx^k + y^m (dV^k/dx^m) df/dy^k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidSpec
from .geometry import Frame
from .jets import Jet
from .tensors import jet_array, jsum


@dataclass(frozen=True)
class PolyVectorField:
    """V^i(x) = b^i + A^i_k x^k + C^i_{jk} x^j x^k, with C[i] symmetric."""

    n: int
    b: tuple
    A: tuple
    C: tuple
    name: str = ""

    @staticmethod
    def make(n: int, b=None, A=None, C=None, name: str = "") -> "PolyVectorField":
        bb = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        AA = np.zeros((n, n)) if A is None else np.asarray(A, dtype=float)
        CC = np.zeros((n, n, n)) if C is None else np.asarray(C, dtype=float)
        if bb.shape != (n,) or AA.shape != (n, n) or CC.shape != (n, n, n):
            raise InvalidSpec("field coefficient shapes do not match the dimension")
        CC = 0.5 * (CC + np.swapaxes(CC, 1, 2))
        return PolyVectorField(
            n=n,
            b=tuple(bb.tolist()),
            A=tuple(map(tuple, AA.tolist())),
            C=tuple(tuple(map(tuple, plane)) for plane in CC.tolist()),
            name=name,
        )

    @property
    def b_arr(self) -> np.ndarray:
        return np.asarray(self.b, dtype=float)

    @property
    def A_arr(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float)

    @property
    def C_arr(self) -> np.ndarray:
        return np.asarray(self.C, dtype=float)

    def __call__(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.b_arr + self.A_arr @ x + np.einsum("ijk,j,k->i", self.C_arr, x, x)

    def jacobian(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.A_arr + 2.0 * np.einsum("ijk,k->ij", self.C_arr, x)

    def hessian(self) -> np.ndarray:
        """d^2 V^i / dx^j dx^k, constant for quadratic fields."""
        return 2.0 * self.C_arr

    def scaled(self, t: float) -> "PolyVectorField":
        return PolyVectorField.make(
            self.n, t * self.b_arr, t * self.A_arr, t * self.C_arr, name=self.name
        )

    def plus(self, other: "PolyVectorField", name: str = "") -> "PolyVectorField":
        return PolyVectorField.make(
            self.n,
            self.b_arr + other.b_arr,
            self.A_arr + other.A_arr,
            self.C_arr + other.C_arr,
            name=name,
        )


class CompleteLift:
    """The lift V-hat of a polynomial field, bound to nothing until applied
    at a frame.  Supplies the component jets and the scalar action."""

    def __init__(self, V: PolyVectorField):
        self.V = V

    def components(self, frame: Frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(V^i jets, dV^i/dx^j jets, fiber components y^m dV^i/dx^m jets)
        in the frame's jet space.  Cached on the frame."""
        key = ("lift", self.V)
        got = frame._cache.get(key)
        if got is not None:
            return got
        n = self.V.n
        xs, ys = frame.xs, frame.ys
        A, b, C = self.V.A_arr, self.V.b_arr, self.V.C_arr
        comp = jet_array((n,))
        jac = jet_array((n, n))
        for i in range(n):
            comp[i] = b[i] + jsum(A[i, k] * xs[k] for k in range(n)) + jsum(
                C[i, j, k] * xs[j] * xs[k] for j in range(n) for k in range(n)
            )
            for j in range(n):
                jac[i, j] = A[i, j] + 2.0 * jsum(C[i, j, k] * xs[k] for k in range(n))
        fiber = jet_array((n,))
        for i in range(n):
            fiber[i] = jsum(ys[m] * jac[i, m] for m in range(n))
        frame._cache[key] = (comp, jac, fiber)
        return comp, jac, fiber

    def scalar(self, frame: Frame, f: Jet) -> Jet:
        """V-hat(f) = V^k df/dx^k + y^m dV^k/dx^m df/dy^k."""
        n = self.V.n
        comp, _, fiber = self.components(frame)
        return jsum(comp[k] * f.d(k) for k in range(n)) + jsum(
            fiber[k] * f.d(n + k) for k in range(n)
        )


def complete_lift(V: PolyVectorField) -> CompleteLift:
    return CompleteLift(V)

"""Helpers for working with arrays of jets and reporting tensor values.

Arrays of jets are numpy object arrays; elementwise dunders make +, -, *
work directly, and these helpers add contraction, matrix inversion with
a conditioning guard, and value extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotPositiveDefinite, SingularMetric, UnsupportedVariance
from .jets import Jet, JetSpace

COND_LIMIT = 1e12


def jet_array(shape) -> np.ndarray:
    return np.empty(shape, dtype=object)


def jzeros(space: JetSpace, shape) -> np.ndarray:
    out = jet_array(shape)
    flat = out.reshape(-1)
    for i in range(flat.size):
        flat[i] = Jet.constant(space, 0.0)
    return out


def jsum(items) -> Jet:
    items = list(items)
    out = items[0]
    for it in items[1:]:
        out = out + it
    return out


def values(jets: np.ndarray | Jet) -> np.ndarray | float:
    """Value parts of an object array of jets (or a single jet)."""
    if isinstance(jets, Jet):
        return jets.value
    out = np.empty(jets.shape)
    flat_in = jets.reshape(-1)
    flat_out = out.reshape(-1)
    for i in range(flat_in.size):
        flat_out[i] = flat_in[i].value
    return out


def truncate_all(jets: np.ndarray, order: int) -> np.ndarray:
    out = jet_array(jets.shape)
    fi, fo = jets.reshape(-1), out.reshape(-1)
    for i in range(fi.size):
        fo[i] = fi[i].truncate(order)
    return out


def jet_matrix_inverse(M: np.ndarray, *, what: str = "matrix") -> np.ndarray:
    """Invert a square object-array of jets by Gauss-Jordan elimination
    with partial pivoting on value parts.  Rejects matrices whose value
    part has condition number above COND_LIMIT."""
    n = M.shape[0]
    vals = values(M)
    if not np.all(np.isfinite(vals)):
        raise SingularMetric(f"{what} has non-finite entries")
    cond = np.linalg.cond(vals)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMetric(f"{what} condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    space = M[0, 0].space
    aug = jet_array((n, 2 * n))
    for i in range(n):
        for j in range(n):
            aug[i, j] = M[i, j]
        for j in range(n):
            aug[i, n + j] = Jet.constant(space, 1.0 if i == j else 0.0)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r, col].value))
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        inv_piv = aug[col, col].reciprocal()
        for j in range(col, 2 * n):
            aug[col, j] = aug[col, j] * inv_piv
        for r in range(n):
            if r == col:
                continue
            factor = aug[r, col]
            if abs(factor.value) == 0.0 and not np.any(factor.c):
                continue
            for j in range(col, 2 * n):
                aug[r, j] = aug[r, j] - factor * aug[col, j]
    return aug[:, n:].copy()


def check_positive_definite(vals: np.ndarray, *, what: str = "matrix") -> None:
    eigs = np.linalg.eigvalsh(0.5 * (vals + vals.T))
    scale = max(1.0, float(np.abs(vals).max()))
    if eigs.min() <= 1e-12 * scale:
        raise NotPositiveDefinite(f"{what} eigenvalues {eigs} not positive")


VALID_VARIANCE = {
    "", "u", "l", "uu", "ul", "lu", "ll",
    "ull", "lll", "llll", "ulll", "lu", "ul",
}


@dataclass(frozen=True)
class TensorValue:
    """Numeric tensor components at one point plus index variance.

    ``variance`` is one character per index: 'u' (contravariant) or
    'l' (covariant), e.g. "ulll" for a curvature-type tensor.
    """

    components: np.ndarray
    variance: str
    name: str = ""

    def __post_init__(self):
        if self.components.ndim != len(self.variance):
            raise UnsupportedVariance(
                f"rank {self.components.ndim} does not match variance {self.variance!r}"
            )

    @property
    def rank(self) -> int:
        return self.components.ndim

    def max_abs(self) -> float:
        return float(np.abs(self.components).max()) if self.components.size else 0.0

    def antisymmetry_residual(self, i: int, j: int) -> float:
        sw = np.swapaxes(self.components, i, j)
        return float(np.abs(self.components + sw).max())

    def symmetry_residual(self, i: int, j: int) -> float:
        sw = np.swapaxes(self.components, i, j)
        return float(np.abs(self.components - sw).max())

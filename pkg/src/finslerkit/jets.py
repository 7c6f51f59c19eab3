"""Truncated multivariate Taylor arithmetic (jets).

A jet stores the Taylor coefficients of a smooth function around a base
point in ``nvars`` variables, up to total degree ``order``.  Arithmetic
(+, -, *, /), analytic functions (sqrt, log, real powers) and partial
derivatives are exact on the retained coefficients, so nested partial
derivatives of any pipeline built from these operations are exact up to
the truncation order: this is forward-mode AD with one pass per point,
not finite differencing.

Multi-indices are enumerated in graded order (total degree ascending,
fixed order inside each degree), so the leading ``N_k`` coefficients of
a jet of order ``K >= k`` are exactly the order-``k`` jet.  Products are
computed through precomputed index triples and ``np.bincount``; analytic
functions go through univariate Taylor expansion around the value part
composed with powers of the zero-constant part.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DivisionByZeroValue, DomainError, InvalidSpec, OrderExceeded

DIV_FLOOR = 1e-15


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> "JetSpace":
    """Shared combinatorial tables for jets of a given shape."""
    return JetSpace(nvars, order)


class JetSpace:
    """Exponent enumeration plus product/derivative index tables.

    Do not build directly; go through :func:`jet_space` so jets of the
    same shape share one instance (operand alignment relies on it).
    """

    def __init__(self, nvars: int, order: int):
        if nvars < 1 or order < 0:
            raise InvalidSpec(f"jet space needs nvars >= 1, order >= 0, got {nvars}, {order}")
        self.nvars = nvars
        self.order = order
        rows = []
        starts = [0]
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                rows.append(e)
            starts.append(len(rows))
        self.exponents = np.array(rows, dtype=np.int64)
        self.degree_starts = np.array(starts, dtype=np.int64)
        self.size = len(rows)
        # Injective integer key: components of exponent sums stay <= order,
        # so base (order + 1) gives carry-free encoding.
        self._base = order + 1
        self._pows = self._base ** np.arange(nvars, dtype=np.int64)
        self._keys = self.exponents @ self._pows
        self._key_order = np.argsort(self._keys, kind="stable")
        self._sorted_keys = self._keys[self._key_order]
        self._mul_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._deriv_maps: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def n_at(self, order: int) -> int:
        """Number of coefficients kept at a (possibly lower) order."""
        if order < 0 or order > self.order:
            raise OrderExceeded(f"order {order} outside [0, {self.order}]")
        return int(self.degree_starts[order + 1])

    def positions_of(self, exps: np.ndarray) -> np.ndarray:
        keys = exps @ self._pows
        idx = np.searchsorted(self._sorted_keys, keys)
        return self._key_order[idx]

    def index_of(self, alpha: Sequence[int]) -> int:
        e = np.asarray(alpha, dtype=np.int64)
        if e.shape != (self.nvars,) or (e < 0).any():
            raise InvalidSpec(f"bad multi-index {alpha!r} for {self.nvars} variables")
        if int(e.sum()) > self.order:
            raise OrderExceeded(f"|alpha| = {int(e.sum())} exceeds order {self.order}")
        return int(self.positions_of(e[None, :])[0])

    def mul_table(self, out_order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ia, ib, iout) triples with deg(ia) + deg(ib) <= out_order."""
        tab = self._mul_tables.get(out_order)
        if tab is not None:
            return tab
        ia_parts, ib_parts = [], []
        for da in range(out_order + 1):
            a_lo, a_hi = self.degree_starts[da], self.degree_starts[da + 1]
            for db in range(out_order + 1 - da):
                b_lo, b_hi = self.degree_starts[db], self.degree_starts[db + 1]
                ia, ib = np.meshgrid(
                    np.arange(a_lo, a_hi), np.arange(b_lo, b_hi), indexing="ij"
                )
                ia_parts.append(ia.ravel())
                ib_parts.append(ib.ravel())
        ia = np.concatenate(ia_parts)
        ib = np.concatenate(ib_parts)
        keys = self._keys[ia] + self._keys[ib]
        idx = np.searchsorted(self._sorted_keys, keys)
        iout = self._key_order[idx]
        tab = (ia, ib, iout)
        self._mul_tables[out_order] = tab
        return tab

    def deriv_map(self, var: int) -> tuple[np.ndarray, np.ndarray]:
        """(src, scale): coefficient c'[t] = c[src[t]] * scale[t], one order down."""
        got = self._deriv_maps.get(var)
        if got is not None:
            return got
        if self.order == 0:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        n_sub = self.n_at(self.order - 1)
        exps = self.exponents[:n_sub].copy()
        exps[:, var] += 1
        src = self.positions_of(exps)
        scale = exps[:, var].astype(np.float64)
        got = (src, scale)
        self._deriv_maps[var] = got
        return got


class Jet:
    """Taylor coefficients of one scalar quantity at one base point.

    Coefficients are raw Taylor coefficients (derivative / alpha!).  The
    value part is ``c[0]``.  Combining jets taken at different base
    points is meaningless and not detected; all public constructors in
    this package derive every jet of a computation from one
    :class:`JetContext`.
    """

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, c: np.ndarray):
        self.space = space
        self.c = c

    # -- constructors ------------------------------------------------

    @staticmethod
    def constant(space: JetSpace, value: float) -> "Jet":
        c = np.zeros(space.size)
        c[0] = float(value)
        return Jet(space, c)

    @staticmethod
    def variable(space: JetSpace, var: int, value: float) -> "Jet":
        if space.order < 1:
            raise OrderExceeded("variables need order >= 1")
        c = np.zeros(space.size)
        c[0] = float(value)
        c[space.index_of([1 if i == var else 0 for i in range(space.nvars)])] = 1.0
        return Jet(space, c)

    # -- basic queries -----------------------------------------------

    @property
    def value(self) -> float:
        return float(self.c[0])

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def nvars(self) -> int:
        return self.space.nvars

    def coefficient(self, alpha: Sequence[int]) -> float:
        """Raw Taylor coefficient for the multi-index ``alpha``."""
        return float(self.c[self.space.index_of(alpha)])

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise OrderExceeded(f"cannot extend order {self.order} jet to {order}")
        sub = jet_space(self.nvars, order)
        return Jet(sub, self.c[: sub.size].copy())

    # -- arithmetic ----------------------------------------------------

    def _align(self, other: "Jet") -> tuple["Jet", "Jet"]:
        if self.space is other.space:
            return self, other
        if self.nvars != other.nvars:
            raise InvalidSpec("jets live in different variable counts")
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.space, a.c + b.c)
        c = self.c.copy()
        c[0] += float(other)
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return Jet(a.space, a.c - b.c)
        c = self.c.copy()
        c[0] -= float(other)
        return Jet(self.space, c)

    def __rsub__(self, other):
        c = -self.c
        c[0] += float(other)
        return Jet(self.space, c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            ia, ib, iout = a.space.mul_table(a.order)
            prod = a.c[ia] * b.c[ib]
            return Jet(a.space, np.bincount(iout, weights=prod, minlength=a.space.size))
        return Jet(self.space, self.c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            a, b = self._align(other)
            return a * b.reciprocal()
        v = float(other)
        if abs(v) < DIV_FLOOR:
            raise DivisionByZeroValue(f"division by scalar {v!r}")
        return Jet(self.space, self.c / v)

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, p):
        if isinstance(p, int) and 0 <= p <= 4:
            out = Jet.constant(self.space, 1.0)
            for _ in range(p):
                out = out * self
            return out
        return self.power(float(p))

    # -- analytic functions -------------------------------------------

    def _compose_series(self, coeffs: np.ndarray) -> "Jet":
        """sum_j coeffs[j] * (self - value)^j via Horner."""
        u = Jet(self.space, self.c.copy())
        u.c[0] = 0.0
        out = Jet.constant(self.space, coeffs[-1])
        for j in range(len(coeffs) - 2, -1, -1):
            out = out * u + coeffs[j]
        return out

    def reciprocal(self) -> "Jet":
        a0 = self.value
        if abs(a0) < DIV_FLOOR:
            raise DivisionByZeroValue(f"division by jet with value {a0!r}")
        k = self.order
        coeffs = np.empty(k + 1)
        coeffs[0] = 1.0 / a0
        for j in range(1, k + 1):
            coeffs[j] = -coeffs[j - 1] / a0
        return self._compose_series(coeffs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def power(self, p: float) -> "Jet":
        a0 = self.value
        if a0 <= 0.0:
            raise DomainError(f"power base must be positive, value = {a0!r}")
        k = self.order
        coeffs = np.empty(k + 1)
        coeffs[0] = a0 ** p
        for j in range(1, k + 1):
            coeffs[j] = coeffs[j - 1] * (p - j + 1) / (j * a0)
        return self._compose_series(coeffs)

    def log(self) -> "Jet":
        a0 = self.value
        if a0 <= 0.0:
            raise DomainError(f"log argument must be positive, value = {a0!r}")
        k = self.order
        coeffs = np.empty(k + 1)
        coeffs[0] = math.log(a0)
        for j in range(1, k + 1):
            coeffs[j] = ((-1) ** (j + 1)) / (j * a0 ** j)
        return self._compose_series(coeffs)

    # -- differentiation -----------------------------------------------

    def d(self, var: int) -> "Jet":
        """Partial derivative with respect to variable ``var``; result is
        one order lower (each extraction consumes one retained order)."""
        src, scale = self.space.deriv_map(var)
        sub = jet_space(self.nvars, self.order - 1)
        return Jet(sub, self.c[src] * scale)

    def dvalue(self, var: int) -> float:
        """Value of the first partial d/d var, without building the jet."""
        src, scale = self.space.deriv_map(var)
        return float(self.c[src[0]] * scale[0])


@dataclass(frozen=True)
class JetContext:
    """A base point on the slit tangent bundle plus a truncation order.

    ``x`` and ``y`` each have length ``n``; coordinates are ordered
    (x_1 .. x_n, y_1 .. y_n) in the underlying 2n-variable jet space.
    """

    n: int
    x: tuple[float, ...]
    y: tuple[float, ...]
    order: int = 7

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec(f"dimension must be >= 1, got {self.n}")
        if len(self.x) != self.n or len(self.y) != self.n:
            raise InvalidSpec("x and y must both have length n")
        if self.order < 1:
            raise InvalidSpec("jet order must be >= 1")
        if math.sqrt(sum(v * v for v in self.y)) < 1e-12:
            raise DomainError("fiber vector y must be nonzero (slit bundle)")

    @staticmethod
    def at(x: Sequence[float], y: Sequence[float], order: int = 7) -> "JetContext":
        x = tuple(float(v) for v in x)
        y = tuple(float(v) for v in y)
        return JetContext(n=len(x), x=x, y=y, order=order)

    @property
    def space(self) -> JetSpace:
        return jet_space(2 * self.n, self.order)


def lift_point(ctx: JetContext) -> tuple[list[Jet], list[Jet]]:
    """Seed the 2n coordinate jets (identity Jacobian) at the context point."""
    space = ctx.space
    xs = [Jet.variable(space, i, ctx.x[i]) for i in range(ctx.n)]
    ys = [Jet.variable(space, ctx.n + i, ctx.y[i]) for i in range(ctx.n)]
    return xs, ys


@dataclass(frozen=True)
class ScalarField:
    """A scalar quantity on the slit tangent bundle, evaluated on jets.

    ``fn`` receives the lifted coordinate jets (xs, ys) and must build its
    result from them with jet arithmetic only, so that derivatives of any
    order up to the context truncation are exact.
    """

    n: int
    fn: Callable[[Sequence[Jet], Sequence[Jet]], Jet]
    name: str = ""

    def __call__(self, xs: Sequence[Jet], ys: Sequence[Jet]) -> Jet:
        return self.fn(xs, ys)

    def at(self, ctx: JetContext) -> Jet:
        if ctx.n != self.n:
            raise InvalidSpec(f"field has n = {self.n}, context has n = {ctx.n}")
        xs, ys = lift_point(ctx)
        return self.fn(xs, ys)

    def value(self, x: Sequence[float], y: Sequence[float]) -> float:
        return self.at(JetContext.at(x, y, order=1)).value


def partial(f: ScalarField, ctx: JetContext, alpha: Sequence[int]) -> float:
    """Partial derivative d^|alpha| f / dz^alpha at the context point,
    where z = (x_1..x_n, y_1..y_n) and alpha is a 2n multi-index."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 2 * ctx.n:
        raise InvalidSpec(f"alpha must have length {2 * ctx.n}")
    total = sum(alpha)
    if total > ctx.order:
        raise OrderExceeded(f"|alpha| = {total} exceeds context order {ctx.order}")
    jet = f.at(ctx)
    fact = 1.0
    for a in alpha:
        fact *= math.factorial(a)
    return jet.coefficient(alpha) * fact

"""Built-in metrics and vector field families.

Metrics: Euclidean, Minkowski-Randers (flat alpha, constant beta), the
Klein metric on the unit ball (constant curvature -1), the generalized
Funk metrics

    F = sqrt(|y|^2 - (|x|^2 |y|^2 - <x,y>^2)) / (1 - |x|^2)
        +- <x,y> / (1 - |x|^2)  +- <a,y> / (1 + <a,x>),      |a| < 1,

and seeded polynomial Randers metrics for perturbation studies.

Field families: Killing fields of flat/hyperbolic space forms,
    V^i = Q^i_k x^k + C^i + k <x,C> x^i   (Q skew),
and the projective algebra of flat space, V = A x + b + <c,x> x,
of dimension n(n+2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidSpec, UnsupportedCurvature
from .fields import PolyVectorField
from .jets import Jet
from .metrics import MetricModel, OneFormSpec, RiemannianSpec
from .randers import randers_metric, riemannian_metric
from .tensors import jet_array, jsum


@dataclass(frozen=True)
class FunkSpec:
    """Parameters of a generalized Funk metric on the unit ball."""

    n: int
    sign1: int = 1
    sign2: int = 1
    a: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpec("Funk metrics need n >= 2")
        if self.sign1 not in (-1, 1) or self.sign2 not in (-1, 1):
            raise InvalidSpec("signs must be +1 or -1")
        a = self.a_arr
        if a.shape != (self.n,):
            raise InvalidSpec(f"drift vector must have length {self.n}")
        if np.linalg.norm(a) >= 1.0:
            raise InvalidSpec(f"|a| = {np.linalg.norm(a):.4f} must be < 1")

    @property
    def a_arr(self) -> np.ndarray:
        if not self.a:
            return np.zeros(self.n)
        return np.asarray(self.a, dtype=float)


@dataclass(frozen=True)
class SpaceFormSpec:
    """Flat (k = 0) or hyperbolic (k = -1) model on the unit ball."""

    n: int
    k: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpec("space forms need n >= 2")
        if self.k not in (0, -1):
            raise UnsupportedCurvature(f"curvature k = {self.k} not in {{0, -1}}")


def _euclidean_matrix(n: int) -> RiemannianSpec:
    def fn(xs):
        space = xs[0].space
        out = jet_array((n, n))
        for i in range(n):
            for j in range(n):
                out[i, j] = Jet.constant(space, 1.0 if i == j else 0.0)
        return out

    return RiemannianSpec(n=n, matrix_fn=fn, name="euclidean")


def _klein_matrix(n: int) -> RiemannianSpec:
    """a_ij = [(1 - |x|^2) delta_ij + x_i x_j] / (1 - |x|^2)^2."""

    def fn(xs):
        u = 1.0 - jsum(xs[k] * xs[k] for k in range(n))
        if u.value <= 0.0:
            raise DomainError("Klein metric needs |x| < 1")
        uinv = u.reciprocal()
        uinv2 = uinv * uinv
        out = jet_array((n, n))
        for i in range(n):
            for j in range(i, n):
                num = xs[i] * xs[j] + (u if i == j else 0.0)
                out[i, j] = out[j, i] = num * uinv2
        return out

    return RiemannianSpec(n=n, matrix_fn=fn, name="klein")


def euclidean(n: int) -> MetricModel:
    """F = |y|: flat Riemannian metric (zero one-form payload)."""
    m = riemannian_metric(_euclidean_matrix(n), name="euclidean")
    return MetricModel(
        n=n, F=m.F, kind="riemannian", randers=m.randers, isotropy_c=0.0,
        batch_fn=m.batch_fn, name="euclidean",
    )


def klein(spec: SpaceFormSpec) -> MetricModel:
    """Space-form metric: Euclidean for k = 0, Klein ball for k = -1."""
    if spec.k == 0:
        return euclidean(spec.n)
    m = riemannian_metric(_klein_matrix(spec.n), name="klein")
    return MetricModel(
        n=spec.n, F=m.F, kind="riemannian", randers=m.randers, isotropy_c=0.0,
        batch_fn=m.batch_fn, name="klein",
    )


def minkowski_randers(n: int, b: Sequence[float]) -> MetricModel:
    """F = |y| + <b, y> with constant b, |b| < 1: locally Minkowski."""
    bv = np.asarray(b, dtype=float)
    if bv.shape != (n,):
        raise InvalidSpec(f"b must have length {n}")
    if np.linalg.norm(bv) >= 1.0:
        raise InvalidSpec(f"|b| = {np.linalg.norm(bv):.4f} must be < 1")
    bt = tuple(bv.tolist())

    def form(xs):
        space = xs[0].space
        out = jet_array((n,))
        for i in range(n):
            out[i] = Jet.constant(space, bt[i])
        return out

    return randers_metric(
        _euclidean_matrix(n),
        OneFormSpec(n=n, covector_fn=form, name="constant"),
        name="minkowski-randers",
        isotropy_c=0.0,
    )


def funk(spec: FunkSpec) -> MetricModel:
    """Generalized Funk metric; Randers payload alpha = Klein metric,
    b_i = sign1 * x_i/(1 - |x|^2) + sign2 * a_i/(1 + <a,x>)."""
    n = spec.n
    s1, s2 = float(spec.sign1), float(spec.sign2)
    av = tuple(spec.a_arr.tolist())

    def form(xs):
        u = 1.0 - jsum(xs[k] * xs[k] for k in range(n))
        if u.value <= 0.0:
            raise DomainError("Funk metric needs |x| < 1")
        w = 1.0 + jsum(av[k] * xs[k] for k in range(n))
        uinv = u.reciprocal()
        winv = w.reciprocal()
        out = jet_array((n,))
        for i in range(n):
            out[i] = s1 * xs[i] * uinv + (s2 * av[i]) * winv
        return out

    name = f"funk({'+' if spec.sign1 > 0 else '-'}{'+' if spec.sign2 > 0 else '-'})"
    # S = (n+1) c F with c = sign1/2 holds when the two signs agree (or the
    # drift vanishes, making sign2 irrelevant); mixed pairs with drift are
    # legitimate Randers metrics near the origin but not of isotropic S.
    iso = 0.5 * spec.sign1 if (spec.sign1 == spec.sign2 or not spec.a_arr.any()) else None
    return randers_metric(
        _klein_matrix(n),
        OneFormSpec(n=n, covector_fn=form, name="funk-form"),
        name=name,
        isotropy_c=iso,
    )


# -- polynomial Randers metrics ----------------------------------------------

PolyTerm = tuple[tuple[int, ...], float]


def _check_table(n: int, terms: Sequence[PolyTerm], max_degree: int = 4) -> tuple[PolyTerm, ...]:
    out = []
    for powers, coeff in terms:
        powers = tuple(int(p) for p in powers)
        if len(powers) != n or any(p < 0 for p in powers):
            raise InvalidSpec(f"bad powers {powers!r} for dimension {n}")
        if sum(powers) > max_degree:
            raise InvalidSpec(f"term degree {sum(powers)} exceeds {max_degree}")
        out.append((powers, float(coeff)))
    return tuple(out)


def _poly_eval(xs, terms: Sequence[PolyTerm]) -> Jet:
    space = xs[0].space
    total = Jet.constant(space, 0.0)
    for powers, coeff in terms:
        term = Jet.constant(space, coeff)
        for v, p in enumerate(powers):
            for _ in range(p):
                term = term * xs[v]
        total = total + term
    return total


def polynomial_randers(
    n: int,
    a_tables: Sequence[Sequence[Sequence[PolyTerm]]] | None,
    b_tables: Sequence[Sequence[PolyTerm]],
    *,
    name: str = "polynomial-randers",
) -> MetricModel:
    """Randers metric from coefficient tables: a_tables[i][j] and
    b_tables[i] are lists of (powers, coeff) with total degree <= 4.
    ``a_tables = None`` means the Euclidean matrix."""
    if a_tables is None:
        a_spec = _euclidean_matrix(n)
    else:
        if len(a_tables) != n or any(len(row) != n for row in a_tables):
            raise InvalidSpec("a_tables must be an n x n nest")
        checked = [[_check_table(n, a_tables[i][j]) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                if sorted(checked[i][j]) != sorted(checked[j][i]):
                    raise InvalidSpec(f"a_tables not symmetric at ({i}, {j})")
        frozen_a = tuple(tuple(row) for row in checked)

        def matrix_fn(xs):
            out = jet_array((n, n))
            for i in range(n):
                for j in range(i, n):
                    out[i, j] = out[j, i] = _poly_eval(xs, frozen_a[i][j])
            return out

        a_spec = RiemannianSpec(n=n, matrix_fn=matrix_fn, name=name + "-alpha")
    if len(b_tables) != n:
        raise InvalidSpec("b_tables must have length n")
    frozen_b = tuple(_check_table(n, t) for t in b_tables)

    def covector_fn(xs):
        out = jet_array((n,))
        for i in range(n):
            out[i] = _poly_eval(xs, frozen_b[i])
        return out

    b_spec = OneFormSpec(n=n, covector_fn=covector_fn, name=name + "-beta")
    return randers_metric(a_spec, b_spec, name=name)


def perturbed_randers(n: int, seed: int = 0, amplitude: float = 0.12) -> MetricModel:
    """Euclidean alpha with a seeded random quadratic one-form: generic
    enough to break isotropy and every special symmetry, small enough to
    keep ||beta|| < 1 on |x| <= 0.7."""
    rng = np.random.default_rng(seed)
    b_tables = []
    for i in range(n):
        terms: list[PolyTerm] = []
        const = 0.25 * rng.uniform(-1.0, 1.0)
        terms.append(((0,) * n, const))
        for j in range(n):
            powers = [0] * n
            powers[j] = 1
            terms.append((tuple(powers), amplitude * rng.uniform(-1.0, 1.0)))
        for j in range(n):
            for k in range(j, n):
                powers = [0] * n
                powers[j] += 1
                powers[k] += 1
                terms.append((tuple(powers), amplitude * rng.uniform(-1.0, 1.0)))
        b_tables.append(terms)
    return polynomial_randers(
        n, None, b_tables, name=f"perturbed-randers(seed={seed})"
    )


# -- vector field families ------------------------------------------------------


def killing_basis(spec: SpaceFormSpec) -> list[PolyVectorField]:
    """Killing fields of the space form: n(n+1)/2 fields
    V^i = Q^i_k x^k + C^i + k <x, C> x^i with Q skew-symmetric."""
    n, k = spec.n, spec.k
    out: list[PolyVectorField] = []
    for i in range(n):
        for j in range(i + 1, n):
            Q = np.zeros((n, n))
            Q[i, j] = 1.0
            Q[j, i] = -1.0
            out.append(PolyVectorField.make(n, A=Q, name=f"rotation({i},{j})"))
    for i in range(n):
        C = np.zeros(n)
        C[i] = 1.0
        Cq = np.zeros((n, n, n))
        if k != 0:
            # k <x, C> x^i  ->  C^i_{jk} symmetric coefficients
            for a_ in range(n):
                Cq[a_, a_, i] += 0.5 * k
                Cq[a_, i, a_] += 0.5 * k
        out.append(PolyVectorField.make(n, b=C, C=Cq, name=f"translation({i},k={k})"))
    return out


def flat_projective_basis(n: int) -> list[PolyVectorField]:
    """Basis of the projective algebra of flat R^n: V = A x + b + <c,x> x,
    dimension n(n+2)."""
    out: list[PolyVectorField] = []
    for i in range(n):
        b = np.zeros(n)
        b[i] = 1.0
        out.append(PolyVectorField.make(n, b=b, name=f"translation({i})"))
    for i in range(n):
        for j in range(n):
            A = np.zeros((n, n))
            A[i, j] = 1.0
            out.append(PolyVectorField.make(n, A=A, name=f"linear({i},{j})"))
    for kk in range(n):
        C = np.zeros((n, n, n))
        for i in range(n):
            C[i, i, kk] += 0.5
            C[i, kk, i] += 0.5
        out.append(PolyVectorField.make(n, C=C, name=f"quadratic({kk})"))
    return out


def random_quadratic_field(n: int, seed: int, scale: float = 1.0) -> PolyVectorField:
    rng = np.random.default_rng(seed)
    return PolyVectorField.make(
        n,
        b=scale * rng.uniform(-1, 1, size=n),
        A=scale * rng.uniform(-1, 1, size=(n, n)),
        C=scale * rng.uniform(-1, 1, size=(n, n, n)),
        name=f"random({seed})",
    )

"""Built-in metrics and vector-field families."""

import math

import numpy as np
from pytest import approx, mark, raises

from finslerkit.errors import DomainError, InvalidSpec, UnsupportedCurvature
from finslerkit.geometry import get_frame
from finslerkit.jets import JetContext
from finslerkit.library import (
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
from finslerkit.fields import PolyVectorField
from finslerkit.projective import lie_tensor_values, projective_residual
from finslerkit.randers import randers_data
from finslerkit.sampling import sample_points
from finslerkit.tensors import values


def funk_direct(x, y, sign1, sign2, a):
    """Direct evaluation of the generalized Funk formula, test-side.

    The first sign rides on the <x, y> term (Funk vs reverse Funk), the
    second on the drift term; the radical is the Klein norm either way.
    """
    x, y, a = map(np.asarray, (x, y, a))
    x2, y2, xy = x @ x, y @ y, x @ y
    core = (math.sqrt(y2 - (x2 * y2 - xy * xy)) + sign1 * xy) / (1.0 - x2)
    return core + sign2 * (a @ y) / (1.0 + a @ x)


def field_coeff_vector(V):
    return np.concatenate([V.b_arr.ravel(), V.A_arr.ravel(), V.C_arr.ravel()])


class TestFunk:
    def test_plain_origin_is_norm(self, funk2_plain):
        assert funk2_plain.value([0.0, 0.0], [3.0, 4.0]) == approx(5.0)

    def test_pinned_drift_value(self, funk2):
        assert funk2.value([0.0, 0.0], [1.0, 0.0]) == approx(1.5)

    @mark.parametrize("signs", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
    def test_assembly_matches_direct_formula(self, signs):
        s1, s2 = signs
        a = (0.2, -0.3)
        metric = funk(FunkSpec(n=2, sign1=s1, sign2=s2, a=a))
        for x, y in sample_points(2, 10, seed=101):
            direct = funk_direct(x, y, s1, s2, a)
            assert metric.value(x, y) == approx(direct, abs=1e-12)

    def test_names_and_isotropy_tags(self):
        assert funk(FunkSpec(n=2)).name == "funk(++)"
        assert funk(FunkSpec(n=2, sign1=-1, sign2=-1)).isotropy_c == -0.5
        assert funk(FunkSpec(n=2, a=(0.4, 0.0))).isotropy_c == 0.5
        # mixed signs with drift: no constant-c tag
        assert funk(FunkSpec(n=2, sign1=1, sign2=-1, a=(0.4, 0.0))).isotropy_c is None
        # mixed signs without drift: sign2 is inert
        assert funk(FunkSpec(n=2, sign1=-1, sign2=1)).isotropy_c == -0.5

    def test_domain_boundary(self, funk2):
        with raises(DomainError):
            funk2.value([1.0, 0.2], [1.0, 0.0])

    def test_spec_validation(self):
        with raises(InvalidSpec):
            FunkSpec(n=1)
        with raises(InvalidSpec):
            FunkSpec(n=2, sign1=2)
        with raises(InvalidSpec):
            FunkSpec(n=2, a=(1.2, 0.0))
        with raises(InvalidSpec):
            FunkSpec(n=2, a=(0.5,))


class TestKlein:
    def test_identity_at_origin(self, klein2):
        data = randers_data(klein2, ([0.0, 0.0], [1.0, 0.0]))
        np.testing.assert_allclose(data.a, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(data.b, 0.0, atol=1e-14)

    def test_positive_curvature_rejected(self):
        with raises(UnsupportedCurvature):
            SpaceFormSpec(n=2, k=1)

    def test_flat_spec_is_euclidean(self):
        m = klein(SpaceFormSpec(n=2, k=0))
        data = randers_data(m, ([0.3, 0.2], [1.0, 1.0]))
        np.testing.assert_allclose(data.a, np.eye(2), atol=1e-14)

    def test_name(self, klein3):
        assert klein3.name.startswith("klein")


class TestMinkowski:
    def test_zero_form_is_euclidean(self):
        m = minkowski_randers(2, (0.0, 0.0))
        assert m.value([0.4, 0.1], [3.0, 4.0]) == approx(5.0)

    def test_randers_bound_enforced(self):
        with raises(InvalidSpec):
            minkowski_randers(2, (1.0, 0.2))

    def test_name(self, mink2):
        assert mink2.name == "minkowski-randers"


class TestPolynomialRanders:
    def test_degree_cap(self):
        with raises(InvalidSpec):
            polynomial_randers(2, None, [[((5, 0), 0.1)], []])

    def test_asymmetric_matrix_rejected(self):
        a_tables = [
            [[((0, 0), 1.0)], [((1, 0), 0.2)]],
            [[((0, 1), 0.2)], [((0, 0), 1.0)]],
        ]
        with raises(InvalidSpec):
            polynomial_randers(2, a_tables, [[], []])

    def test_wrong_b_length(self):
        with raises(InvalidSpec):
            polynomial_randers(2, None, [[]])

    def test_evaluates_polynomial_entries(self):
        # b_1 = 0.1 + 0.2 x_2, Euclidean alpha
        m = polynomial_randers(2, None, [[((0, 0), 0.1), ((0, 1), 0.2)], []])
        data = randers_data(m, ([0.0, 0.5], [1.0, 0.0]))
        assert data.b[0] == approx(0.2)
        assert m.value([0.0, 0.5], [1.0, 0.0]) == approx(1.2)


class TestPerturbed:
    def test_deterministic_per_seed(self):
        m1 = perturbed_randers(2, seed=9)
        m2 = perturbed_randers(2, seed=9)
        m3 = perturbed_randers(2, seed=10)
        at = ([0.3, -0.2], [0.8, 0.6])
        assert m1.value(*at) == m2.value(*at)
        assert m1.value(*at) != m3.value(*at)

    def test_valid_randers_inside_ball(self):
        m = perturbed_randers(3, seed=4)
        for x, y in sample_points(3, 10, seed=102):
            data = randers_data(m, (x, y))
            assert data.b_norm2 < 1.0
            assert m.value(x, y) > 0.0


class TestKillingBasis:
    @mark.parametrize("n,k", [(2, 0), (2, -1), (3, 0), (3, -1)])
    def test_count(self, n, k):
        assert len(killing_basis(SpaceFormSpec(n=n, k=k))) == n * (n + 1) // 2

    @mark.parametrize("n,k,fixture", [(2, -1, "klein2"), (3, -1, "klein3"), (2, 0, "euclid2")])
    def test_killing_residual(self, n, k, fixture, request):
        metric = request.getfixturevalue(fixture)
        worst = 0.0
        for V in killing_basis(SpaceFormSpec(n=n, k=k)):
            for x, y in sample_points(n, 5, seed=103):
                fr = get_frame(metric, JetContext.at(x, y, order=3))
                la = lie_tensor_values(fr, V, fr.g, "ll")
                scale = max(1.0, np.abs(values(fr.g)).max())
                worst = max(worst, np.abs(la).max() / scale)
        assert worst < 1e-8

    def test_linear_independence(self):
        basis = killing_basis(SpaceFormSpec(n=3, k=-1))
        M = np.stack([field_coeff_vector(V) for V in basis])
        assert np.linalg.matrix_rank(M) == len(basis)


class TestFlatProjectiveBasis:
    @mark.parametrize("n,count", [(2, 8), (3, 15)])
    def test_count_is_n_times_n_plus_2(self, n, count):
        assert len(flat_projective_basis(n)) == count

    def test_linear_independence(self):
        basis = flat_projective_basis(3)
        M = np.stack([field_coeff_vector(V) for V in basis])
        assert np.linalg.matrix_rank(M) == 15

    @mark.parametrize("fixture", ["euclid2", "klein2", "funk2_plain"])
    def test_projective_on_projectively_flat_models(self, fixture, request):
        metric = request.getfixturevalue(fixture)
        pts = sample_points(2, 5, seed=104)
        for V in flat_projective_basis(2):
            assert projective_residual(V, metric, pts) < 1e-6, V.name

    def test_projective_on_funk3_plain(self, funk3_plain):
        pts = sample_points(3, 4, seed=105)
        for V in flat_projective_basis(3):
            assert projective_residual(V, funk3_plain, pts) < 1e-6, V.name

    def test_skew_combination_lies_in_killing_span(self):
        """The rotation (skew combination of flat-basis members) is a
        Killing field of the k = -1 space form."""
        flat = np.stack([field_coeff_vector(V) for V in flat_projective_basis(2)])
        kill = np.stack(
            [field_coeff_vector(V) for V in killing_basis(SpaceFormSpec(n=2, k=-1))]
        )
        rot = field_coeff_vector(
            PolyVectorField.make(2, A=[[0.0, -1.0], [1.0, 0.0]])
        )
        # the rotation is inside the flat family and inside the Killing span
        for M in (flat, kill):
            coef, _, _, _ = np.linalg.lstsq(M.T, rot, rcond=None)
            assert np.abs(M.T @ coef - rot).max() < 1e-12


class TestRandomQuadratic:
    def test_deterministic(self):
        V1 = random_quadratic_field(3, seed=21)
        V2 = random_quadratic_field(3, seed=21)
        assert np.array_equal(field_coeff_vector(V1), field_coeff_vector(V2))
        assert not np.array_equal(
            field_coeff_vector(V1), field_coeff_vector(random_quadratic_field(3, seed=22))
        )

    def test_scale(self):
        V = random_quadratic_field(2, seed=5)
        W = random_quadratic_field(2, seed=5, scale=2.0)
        np.testing.assert_allclose(field_coeff_vector(W), 2.0 * field_coeff_vector(V))

    def test_quadratic_part_symmetric(self):
        C = random_quadratic_field(3, seed=8).C_arr
        np.testing.assert_allclose(C, C.transpose(0, 2, 1))

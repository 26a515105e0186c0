import math

import numpy as np
import pytest

from symkernel.errors import ModelError
from symkernel.models import (
    COSET,
    HYPERBOLOID,
    CartanCoordinate,
    apply,
    basepoint,
    boost,
    cartan_plus,
    coordinate_along,
    distance,
    make_point,
    random_isometry,
    random_stabilizer,
    rotation,
)
from symkernel.rootdata import chamber_vector


class TestPoints:
    def test_basepoints(self):
        assert basepoint(HYPERBOLOID, 3).data == (1.0, 0.0, 0.0, 0.0)
        assert np.array_equal(basepoint(COSET, 3).array, np.eye(3))

    def test_off_hyperboloid(self):
        with pytest.raises(ModelError, match="hyperboloid"):
            make_point(HYPERBOLOID, [2.0, 0.0, 0.0])

    def test_lower_sheet(self):
        with pytest.raises(ModelError, match="lower sheet"):
            make_point(HYPERBOLOID, [-1.0, 0.0, 0.0])

    def test_coset_needs_unit_determinant(self):
        with pytest.raises(ModelError, match="unimodular"):
            make_point(COSET, 2.0 * np.eye(3))

    def test_unknown_model(self):
        with pytest.raises(ModelError):
            make_point("poincare-disk", [0.0, 0.0])

    def test_distance_across_models(self):
        with pytest.raises(ModelError):
            distance(basepoint(HYPERBOLOID, 2), basepoint(COSET, 2))


class TestDistance:
    @pytest.mark.parametrize("r", [1e-10, 0.3, 2.0, 15.0])
    def test_boost_moves_basepoint_by_its_length(self, r):
        o = basepoint(HYPERBOLOID, 3)
        assert distance(o, apply(boost(3, 1, r), o)) == pytest.approx(r, rel=1e-9)

    def test_distance_to_self_is_zero(self):
        x = apply(random_isometry(HYPERBOLOID, 3, seed=4), basepoint(HYPERBOLOID, 3))
        assert distance(x, x) == 0.0

    def test_coset_distance(self):
        o = basepoint(COSET, 3)
        g = make_point(COSET, np.diag([math.e, 1.0, 1.0 / math.e]))
        assert distance(o, g) == pytest.approx(math.sqrt(2.0), rel=1e-12)

    @pytest.mark.parametrize("model,n", [(HYPERBOLOID, 2), (HYPERBOLOID, 3), (COSET, 3)])
    def test_isometry_invariance(self, model, n):
        o = basepoint(model, n)
        x = apply(random_isometry(model, n, seed=1), o)
        y = apply(random_isometry(model, n, seed=2), o)
        g = random_isometry(model, n, seed=3)
        before = distance(x, y)
        after = distance(apply(g, x), apply(g, y))
        assert after == pytest.approx(before, rel=1e-8)

    def test_symmetric(self):
        o = basepoint(COSET, 3)
        x = apply(random_isometry(COSET, 3, seed=10), o)
        y = apply(random_isometry(COSET, 3, seed=11), o)
        assert distance(x, y) == pytest.approx(distance(y, x), rel=1e-10)

    @pytest.mark.parametrize("model,n", [(HYPERBOLOID, 3), (COSET, 3)])
    @pytest.mark.parametrize("seed", range(20))
    def test_triangle_inequality(self, model, n, seed):
        o = basepoint(model, n)
        x, y, z = (apply(random_isometry(model, n, seed=3 * seed + i), o) for i in range(3))
        assert distance(x, z) <= distance(x, y) + distance(y, z) + 1e-9


class TestCartanProjection:
    def test_diagonal_coset(self, sl3r):
        coord = cartan_plus(make_point(COSET, np.diag([2.0, 1.0, 0.5])))
        ln2 = math.log(2.0)
        assert coord.x_plus.coords == pytest.approx((ln2, 0.0, -ln2), abs=1e-12)
        assert coord.distance == pytest.approx(math.sqrt(2.0) * ln2, rel=1e-12)

    def test_hyperboloid(self):
        x = apply(boost(3, 2, 4.0), basepoint(HYPERBOLOID, 3))
        coord = cartan_plus(x)
        assert coord.x_plus.coords == pytest.approx((4.0,), rel=1e-12)
        assert coord.distance == pytest.approx(4.0, rel=1e-12)

    def test_basepoint_projects_to_origin(self):
        assert cartan_plus(basepoint(HYPERBOLOID, 2)).distance == 0.0
        assert cartan_plus(basepoint(COSET, 3)).distance == 0.0

    @pytest.mark.parametrize("seed", range(100))
    def test_stabilizer_invariance_coset(self, seed):
        g = random_isometry(COSET, 3, seed=seed)
        k = random_stabilizer(COSET, 3, seed=seed + 100)
        plain = cartan_plus(make_point(COSET, g))
        left = cartan_plus(make_point(COSET, k @ g))
        right = cartan_plus(make_point(COSET, g @ k))
        assert left.x_plus.coords == pytest.approx(plain.x_plus.coords, abs=1e-10)
        assert right.x_plus.coords == pytest.approx(plain.x_plus.coords, abs=1e-10)

    @pytest.mark.parametrize("seed", range(100))
    def test_stabilizer_invariance_hyperboloid(self, seed):
        x = apply(random_isometry(HYPERBOLOID, 4, seed=8), basepoint(HYPERBOLOID, 4))
        k = random_stabilizer(HYPERBOLOID, 4, seed=seed + 200)
        assert cartan_plus(apply(k, x)).distance == pytest.approx(
            cartan_plus(x).distance, rel=1e-10
        )

    @pytest.mark.parametrize("model,n", [(HYPERBOLOID, 3), (COSET, 3), (COSET, 4)])
    def test_norm_equals_distance_to_basepoint(self, model, n):
        o = basepoint(model, n)
        x = apply(random_isometry(model, n, seed=5), o)
        coord = cartan_plus(x)
        assert coord.x_plus.norm == pytest.approx(distance(o, x), rel=1e-9)

    def test_rotation_fixes_basepoint(self):
        o = basepoint(HYPERBOLOID, 3)
        assert distance(o, apply(rotation(3, 1, 2, 0.7), o)) == 0.0

    @pytest.mark.parametrize("a,tol", [(10.0, 1e-9), (15.0, 1e-7)])
    def test_far_coset_point(self, a, tol):
        k = random_stabilizer(COSET, 3, seed=31)
        k_prime = random_stabilizer(COSET, 3, seed=32)
        x = make_point(COSET, k @ np.diag([math.exp(a), 1.0, math.exp(-a)]) @ k_prime)
        coord = cartan_plus(x)
        assert coord.x_plus.coords == pytest.approx((a, 0.0, -a), abs=tol)
        assert coord.distance == pytest.approx(math.sqrt(2.0) * a, abs=2.0 * tol)


class TestCartanCoordinate:
    def test_distance_must_match_norm(self, h3r):
        with pytest.raises(ModelError, match="does not match"):
            CartanCoordinate(chamber_vector(h3r, (3.0,)), 2.0)

    def test_along_interior_direction(self, sl3r):
        coord = coordinate_along(sl3r, 2.0 * math.sqrt(2.0))
        assert coord.x_plus.coords == pytest.approx((2.0, 0.0, -2.0), abs=1e-12)
        assert coord.distance == pytest.approx(2.0 * math.sqrt(2.0))

    def test_along_given_direction(self, sl3r):
        direction = chamber_vector(sl3r, (2.0, -1.0, -1.0))
        coord = coordinate_along(sl3r, 3.0, direction)
        assert coord.x_plus.norm == pytest.approx(3.0)


class TestGroupElements:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_random_isometry_is_deterministic(self, seed):
        assert np.array_equal(
            random_isometry(HYPERBOLOID, 3, seed), random_isometry(HYPERBOLOID, 3, seed)
        )

    def test_random_isometry_preserves_lorentz_form(self):
        g = random_isometry(HYPERBOLOID, 3, seed=12)
        form = np.diag([1.0, -1.0, -1.0, -1.0])
        assert np.allclose(g.T @ form @ g, form, atol=1e-9)

    def test_random_coset_element_is_unimodular(self):
        assert np.linalg.det(random_isometry(COSET, 4, seed=12)) == pytest.approx(1.0)

    def test_unknown_model(self):
        with pytest.raises(ModelError):
            random_isometry("klein", 3, seed=0)

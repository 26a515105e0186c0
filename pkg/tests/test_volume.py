import math

import numpy as np
import pytest

from symkernel.errors import DomainError
from symkernel.rootdata import ChamberVector, alpha_values, catalog_space, chamber_vector
from symkernel.volume import (
    chamber_grid,
    density_comparison,
    density_J,
    inner_ball,
    log_volume_envelope,
    rank_one_volume,
    volume_envelope,
    volume_quadrature,
)


class TestDensity:
    def test_sl3_interior_point(self, sl3r):
        h = chamber_vector(sl3r, (1.0, 0.0, -1.0))
        expected = math.sinh(1.0) ** 2 * math.sinh(2.0)
        assert density_J(sl3r, h) == pytest.approx(expected, rel=1e-12)

    def test_rank_one(self, h3r):
        assert density_J(h3r, chamber_vector(h3r, (2.0,))) == pytest.approx(math.sinh(2.0) ** 2)

    def test_vanishes_on_walls(self, sl3r):
        h = chamber_vector(sl3r, (2.0, -1.0, -1.0))
        assert density_J(sl3r, h) == 0.0

    def test_outside_chamber(self, h3r):
        with pytest.raises(DomainError):
            density_J(h3r, ChamberVector((-1.0,)))

    @pytest.mark.parametrize("scale", [0.5, 1.0, 5.0, 20.0, 200.0])
    def test_comparison_is_bounded(self, sl3r, scale):
        h = chamber_vector(sl3r, (scale, 0.0, -scale))
        assert 0.1 <= density_comparison(sl3r, h) <= 1.0

    def test_comparison_needs_interior(self, sl3r):
        with pytest.raises(DomainError):
            density_comparison(sl3r, chamber_vector(sl3r, (2.0, -1.0, -1.0)))


class TestEnvelope:
    def test_rank_one_value(self, h3r):
        envelope = volume_envelope(h3r, chamber_vector(h3r, (2.0,)), 0.5)
        expected = math.exp(4.0) * 0.5 * (2.5 / 3.0) ** 2
        assert envelope.value == pytest.approx(expected, rel=1e-12)
        assert envelope.epsilon == 0.5

    def test_sl3_origin(self, sl3r):
        origin = chamber_vector(sl3r, (0.0, 0.0, 0.0))
        assert volume_envelope(sl3r, origin, 0.5).value == pytest.approx(0.03125, rel=1e-12)

    def test_zero_radius(self, h3r):
        assert log_volume_envelope(h3r, chamber_vector(h3r, (1.0,)), 0.0) == -math.inf

    @pytest.mark.parametrize("epsilon", [-0.1, 1.0, 2.0])
    def test_epsilon_range(self, h3r, epsilon):
        with pytest.raises(DomainError, match="epsilon"):
            volume_envelope(h3r, chamber_vector(h3r, (1.0,)), epsilon)

    def test_far_points_stay_finite_in_log(self, sl3r):
        h = chamber_vector(sl3r, (400.0, 0.0, -400.0))
        assert math.isfinite(log_volume_envelope(sl3r, h, 0.5))

    def test_inner_ball_sits_inside(self, sl3r):
        x_plus = chamber_vector(sl3r, (2.0, -1.0, -1.0))
        center, radius = inner_ball(sl3r, x_plus, 0.4)
        assert np.linalg.norm(center.array - x_plus.array) + radius <= 0.4
        # the whole inner ball stays in the chamber
        assert np.min(alpha_values(sl3r, center)) / math.sqrt(2.0) >= radius


class TestGrid:
    def test_rank_one(self, h3r):
        grid = chamber_grid(h3r, [0.0, 1.0, 3.0])
        assert [h.coords for h in grid] == [(0.0,), (1.0,), (3.0,)]

    def test_sl3(self, sl3r):
        grid = chamber_grid(sl3r, [1.0, 3.0])
        assert len(grid) == 7
        for h in grid:
            assert np.all(alpha_values(sl3r, h) >= -1e-12)
        assert [h.norm for h in grid[1:4]] == pytest.approx([1.0, 1.0, 1.0])

    def test_negative_radius(self, h3r):
        with pytest.raises(DomainError):
            chamber_grid(h3r, [-1.0])


class TestMonteCarlo:
    def test_matches_rank_one_integral(self, h3r):
        estimate = volume_quadrature(h3r, chamber_vector(h3r, (2.0,)), 0.5, budget=200_000)
        exact = rank_one_volume(h3r, 2.0, 0.5)
        expected = (math.sinh(5.0) - math.sinh(3.0)) / 4.0 - 0.5
        assert exact == pytest.approx(expected, rel=1e-10)
        assert abs(estimate.value - exact) <= 3.0 * estimate.std_error
        assert estimate.samples == 200_000

    def test_origin_counts_half_the_interval(self, h3r):
        estimate = volume_quadrature(h3r, chamber_vector(h3r, (0.0,)), 0.5, budget=100_000)
        exact = rank_one_volume(h3r, 0.0, 0.5)
        assert exact == pytest.approx((math.sinh(1.0) / 4.0 - 0.25), rel=1e-10)
        assert abs(estimate.value - exact) <= 5.0 * estimate.std_error
        assert 0 < estimate.hits < estimate.samples

    def test_reproducible(self, sl3r):
        h = chamber_vector(sl3r, (1.0, 0.0, -1.0))
        first = volume_quadrature(sl3r, h, 0.3, budget=20_000, seed=11)
        second = volume_quadrature(sl3r, h, 0.3, budget=20_000, seed=11)
        assert first == second

    def test_seed_changes_estimate(self, sl3r):
        h = chamber_vector(sl3r, (1.0, 0.0, -1.0))
        first = volume_quadrature(sl3r, h, 0.3, budget=20_000, seed=1)
        second = volume_quadrature(sl3r, h, 0.3, budget=20_000, seed=2)
        assert first.value != second.value

    def test_thread_count_does_not_matter(self, sl3r):
        h = chamber_vector(sl3r, (2.0, 0.0, -2.0))
        single = volume_quadrature(sl3r, h, 0.5, budget=70_000, seed=3, threads=1)
        pooled = volume_quadrature(sl3r, h, 0.5, budget=70_000, seed=3, threads=4)
        assert single == pooled

    @pytest.mark.parametrize(
        "coords,epsilon",
        [((0.0, 0.0, 0.0), 0.5), ((1.0, 0.0, -1.0), 0.3), ((3.0, 0.0, -3.0), 0.9)],
    )
    def test_two_sided_envelope_sl3(self, sl3r, coords, epsilon):
        h = chamber_vector(sl3r, coords)
        estimate = volume_quadrature(sl3r, h, epsilon, budget=50_000)
        ratio = estimate.value / volume_envelope(sl3r, h, epsilon).value
        assert 1e-3 < ratio < 1e3

    @pytest.mark.parametrize("label,coords", [("H3R", (2.0,)), ("SL3R", (1.0, 0.0, -1.0))])
    def test_doubling_the_budget_is_consistent(self, label, coords):
        rs = catalog_space(label)
        h = chamber_vector(rs, coords)
        single = volume_quadrature(rs, h, 0.3, budget=20_000, seed=5)
        double = volume_quadrature(rs, h, 0.3, budget=40_000, seed=5)
        combined = math.hypot(single.std_error, double.std_error)
        assert abs(single.value - double.value) <= 3.0 * combined

    def test_small_budget(self, h3r):
        with pytest.raises(DomainError, match="budget"):
            volume_quadrature(h3r, chamber_vector(h3r, (1.0,)), 0.5, budget=100)

    def test_zero_radius_rejected(self, h3r):
        with pytest.raises(DomainError):
            volume_quadrature(h3r, chamber_vector(h3r, (1.0,)), 0.0)


class TestRhoOnBalls:
    @pytest.mark.parametrize("coords", [(0.0, 0.0, 0.0), (2.0, -1.0, -1.0), (3.0, 0.0, -3.0)])
    def test_rho_moves_by_at_most_its_norm(self, sl3r, coords):
        x_plus = chamber_vector(sl3r, coords)
        rng = np.random.default_rng(0)
        offsets = rng.uniform(-1.0, 1.0, size=(2000, sl3r.rank))
        offsets = offsets[np.sum(offsets**2, axis=1) < 0.9**2] @ sl3r.basis_matrix
        rho_at_center = float(sl3r.rho_vector @ x_plus.array)
        values = (x_plus.array + offsets) @ sl3r.rho_vector
        norm = math.sqrt(2.0)
        assert np.all(values >= rho_at_center - norm)
        assert np.all(values <= rho_at_center + norm)

import logging
import math

import numpy as np
import pytest
from scipy import special

from symkernel.envelopes import (
    TAIL_CONSTANT,
    OperatorSpec,
    SpectralParameter,
    calibrate_tail_constant,
    gaussian_tail_bound,
    green_envelope,
    heat_envelope,
    in_sharp_regime,
    log_green_envelope,
    log_heat_envelope,
    log_phi_t,
    phi_branch,
    phi_t,
)
from symkernel.errors import DomainError, HypothesisViolation
from symkernel.models import coordinate_along


class TestOperator:
    def test_scalar_laplacian_bottom(self, h3r, h2r, sl3r):
        assert OperatorSpec.scalar_laplacian(h3r).alpha0 == pytest.approx(1.0)
        assert OperatorSpec.scalar_laplacian(h2r).alpha0 == pytest.approx(0.25)
        assert OperatorSpec.scalar_laplacian(sl3r).alpha0 == pytest.approx(2.0)

    @pytest.mark.parametrize("s", [0.0, -1.0, -0.5 + 2.0j])
    def test_spectral_parameter_needs_positive_real_part(self, s):
        with pytest.raises(DomainError):
            SpectralParameter(s)


class TestGreenEnvelope:
    def test_h3(self, h3r):
        coord = coordinate_along(h3r, 3.0)
        assert green_envelope(h3r, coord, 1.0) == pytest.approx(math.exp(-6.0), rel=1e-12)

    def test_sl3_interior(self, sl3r):
        coord = coordinate_along(sl3r, 2.0 * math.sqrt(2.0))
        expected = math.exp(-4.0 - math.sqrt(2.0))
        assert green_envelope(sl3r, coord, 0.5) == pytest.approx(expected, rel=1e-12)

    def test_only_real_part_enters(self, h3r):
        coord = coordinate_along(h3r, 5.0)
        assert green_envelope(h3r, coord, 1.0 + 3.0j) == green_envelope(h3r, coord, 1.0)
        assert green_envelope(h3r, coord, SpectralParameter(1.0)) == green_envelope(
            h3r, coord, 1.0
        )

    def test_log_form_survives_underflow(self, h3r):
        coord = coordinate_along(h3r, 1000.0)
        assert green_envelope(h3r, coord, 1.0) == 0.0
        assert log_green_envelope(h3r, coord, 1.0) == pytest.approx(-2000.0)

    def test_hypothesis(self, h3r):
        with pytest.raises(HypothesisViolation):
            green_envelope(h3r, coordinate_along(h3r, 1.0), 1.0)

    def test_allow_outside_warns(self, h3r, caplog):
        with caplog.at_level(logging.WARNING, logger="SYMKERNEL"):
            value = green_envelope(h3r, coordinate_along(h3r, 1.0), 1.0, allow_outside=True)
        assert value == pytest.approx(math.exp(-2.0))
        assert "outside its hypothesis" in caplog.text

    def test_decreasing_in_distance(self, sl3r):
        values = [green_envelope(sl3r, coordinate_along(sl3r, r), 0.5) for r in range(2, 12)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestPhi:
    def test_far_branch(self, h3r):
        coord = coordinate_along(h3r, 4.0)
        assert phi_branch(coord, 2.0) == "far"
        expected = 4.0 * 2.0**-1.5 * (5.0 / 4.5)
        assert phi_t(h3r, coord, 2.0) == pytest.approx(expected, rel=1e-12)

    def test_near_branch(self, h3r):
        coord = coordinate_along(h3r, 2.0)
        assert phi_branch(coord, 100.0) == "near"
        assert phi_t(h3r, coord, 100.0) == pytest.approx(10.0 / 12.0, rel=1e-12)

    def test_boundary_belongs_to_far_branch(self, h3r):
        assert phi_branch(coordinate_along(h3r, 3.0), 3.0) == "far"

    @pytest.mark.parametrize("d", [2.0, 3.0, 7.5, 30.0])
    def test_branches_agree_up_to_a_constant_at_the_boundary(self, h3r, d):
        far = phi_t(h3r, coordinate_along(h3r, d), d)
        near = math.sqrt(d) / (d + math.sqrt(d))
        assert far == pytest.approx(d**-0.5, rel=1e-12)
        assert 1.0 <= far / near <= 1.71

    def test_positive_time(self, h3r):
        with pytest.raises(DomainError):
            log_phi_t(h3r, coordinate_along(h3r, 3.0), 0.0)


class TestHeatEnvelope:
    def test_h3(self, h3r):
        coord = coordinate_along(h3r, 4.0)
        op = OperatorSpec.scalar_laplacian(h3r)
        expected = 4.0 * 2.0**-1.5 * (5.0 / 4.5) * math.exp(-8.0)
        assert heat_envelope(h3r, coord, 2.0, op) == pytest.approx(expected, rel=1e-12)

    def test_custom_operator(self, h3r):
        coord = coordinate_along(h3r, 4.0)
        shifted = OperatorSpec(0.0)
        laplacian = OperatorSpec.scalar_laplacian(h3r)
        gap = log_heat_envelope(h3r, coord, 2.0, shifted) - log_heat_envelope(
            h3r, coord, 2.0, laplacian
        )
        assert gap == pytest.approx(2.0)

    def test_sl3_is_finite_far_out(self, sl3r):
        coord = coordinate_along(sl3r, 300.0)
        op = OperatorSpec.scalar_laplacian(sl3r)
        assert math.isfinite(log_heat_envelope(sl3r, coord, 0.5, op))

    def test_hypothesis(self, h3r):
        with pytest.raises(HypothesisViolation):
            heat_envelope(h3r, coordinate_along(h3r, 0.5), 1.0, OperatorSpec(1.0))

    @pytest.mark.parametrize(
        "d,t,sharp",
        [(3.0, 1.0, True), (3.0, 3.0, True), (1.0, 0.5, False), (3.0, 4.0, False)],
    )
    def test_sharp_regime(self, d, t, sharp):
        assert in_sharp_regime(d, t) is sharp


class TestGaussianTail:
    def test_lhs_matches_erfc(self):
        bound = gaussian_tail_bound(4.0, 1.0)
        assert bound.lhs == pytest.approx(math.sqrt(math.pi) * special.erfc(2.0), rel=1e-12)

    def test_zero_threshold(self):
        bound = gaussian_tail_bound(0.0, 4.0)
        assert bound.lhs == pytest.approx(math.sqrt(4.0 * math.pi), rel=1e-12)
        assert bound.rhs == pytest.approx(2.0 * TAIL_CONSTANT, rel=1e-12)

    @pytest.mark.parametrize("A", np.linspace(0.0, 50.0, 11).tolist())
    @pytest.mark.parametrize("t", [0.1, 1.0, 10.0, 100.0])
    def test_bound_holds(self, A, t):
        bound = gaussian_tail_bound(A, t)
        assert bound.log_lhs <= bound.log_rhs
        assert bound.ratio >= 0.25

    def test_calibrated_constant(self):
        As = np.linspace(0.0, 50.0, 200)
        ts = np.geomspace(0.1, 100.0, 50)
        constant = calibrate_tail_constant(As, ts)
        assert math.sqrt(math.pi) < constant <= TAIL_CONSTANT
        # the sup is approached near A / (2 sqrt t) = 1.35
        assert constant > 2.27

    def test_domain(self):
        with pytest.raises(DomainError):
            gaussian_tail_bound(-1.0, 1.0)
        with pytest.raises(DomainError):
            gaussian_tail_bound(1.0, 0.0)

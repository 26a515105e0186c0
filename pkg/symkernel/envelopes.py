"""
Upper envelopes for the resolvent and heat kernels.

Every envelope is returned with its multiplicative constant set to 1; the
``log_`` variants are what ratio computations use, since d^2/4t easily
exceeds the double-precision exponent range.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
from scipy import special

from .errors import DomainError, HypothesisViolation
from .models import CartanCoordinate
from .rootdata import RestrictedRootSystem, alpha_values, eval_rho, rho_norm

logger = logging.getLogger("SYMKERNEL")

MIN_DISTANCE = 2.0

# Sup over x >= 0 of sqrt(pi) * erfcx(x) * (2x + 1), attained near x = 1.35 where
# it is ~2.2822, rounded up. x = A / (2 sqrt(t)) maps the (A, t) grid onto x.
TAIL_CONSTANT = 2.283


@dataclass(frozen=True)
class OperatorSpec:
    """Scalar spectral data of L: the bottom alpha0 of its L2 spectrum"""

    alpha0: float

    @classmethod
    def scalar_laplacian(cls, rs: RestrictedRootSystem) -> "OperatorSpec":
        spec = cls(rho_norm(rs) ** 2)
        assert math.isclose(spec.alpha0, rho_norm(rs) ** 2)
        return spec


@dataclass(frozen=True)
class SpectralParameter:
    s: complex

    def __post_init__(self) -> None:
        if not complex(self.s).real > 0.0:
            raise DomainError(f"Spectral parameter needs Re(s) > 0, got {self.s}")

    @property
    def real(self) -> float:
        return float(complex(self.s).real)


SpectralLike = Union[SpectralParameter, complex, float]


def _spectral(s: SpectralLike) -> SpectralParameter:
    return s if isinstance(s, SpectralParameter) else SpectralParameter(complex(s))


def _check_hypothesis(coord: CartanCoordinate, allow_outside: bool) -> None:
    if coord.distance >= MIN_DISTANCE:
        return
    if not allow_outside:
        raise HypothesisViolation(
            f"d(x,o) = {coord.distance} is below {MIN_DISTANCE}; the bound does not apply"
        )
    logger.warning(f"Envelope evaluated outside its hypothesis at d = {coord.distance}")


def log_green_envelope(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    s: SpectralLike,
    allow_outside: bool = False,
) -> float:
    _check_hypothesis(coord, allow_outside)
    return -eval_rho(rs, coord.x_plus) - _spectral(s).real * coord.distance


def green_envelope(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    s: SpectralLike,
    allow_outside: bool = False,
) -> float:
    """e^{-rho(x+) - Re(s) d(x,o)}; only the real part of s enters"""
    return math.exp(log_green_envelope(rs, coord, s, allow_outside))


def phi_branch(coord: CartanCoordinate, t: float) -> str:
    """'far' when d >= t (the d >= t formula wins at d = t), else 'near'"""
    return "far" if coord.distance >= t else "near"


def log_phi_t(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    t: float,
    allow_outside: bool = False,
) -> float:
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    _check_hypothesis(coord, allow_outside)
    d = coord.distance
    if phi_branch(coord, t) == "near":
        root_t = math.sqrt(t)
        return math.log(root_t) - math.log(d + root_t)

    exponent = rs.dim + rs.rank
    alphas = np.maximum(alpha_values(rs, coord.x_plus), 0.0)
    product = 0.5 * float(
        rs.multiplicities @ (np.log1p(alphas) - np.log(t / d + alphas))
    )
    return (
        (exponent / 2.0 - 1.0) * math.log(d)
        - (exponent - 1) / 2.0 * math.log(t)
        + product
    )


def phi_t(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    t: float,
    allow_outside: bool = False,
) -> float:
    """Polynomial correction of the heat envelope, piecewise in d <= t / d >= t"""
    return math.exp(log_phi_t(rs, coord, t, allow_outside))


def log_heat_envelope(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    t: float,
    op: OperatorSpec,
    allow_outside: bool = False,
) -> float:
    log_phi = log_phi_t(rs, coord, t, allow_outside)
    d = coord.distance
    return -op.alpha0 * t - eval_rho(rs, coord.x_plus) - d * d / (4.0 * t) + log_phi


def heat_envelope(
    rs: RestrictedRootSystem,
    coord: CartanCoordinate,
    t: float,
    op: OperatorSpec,
    allow_outside: bool = False,
) -> float:
    """e^{-alpha0 t - rho(x+) - d^2/4t} phi_t(x)"""
    return math.exp(log_heat_envelope(rs, coord, t, op, allow_outside))


def in_sharp_regime(d: float, t: float) -> bool:
    """The regime d >= max(2, t) where the heat envelope is attained on H^n"""
    return d >= max(MIN_DISTANCE, t)


@dataclass(frozen=True)
class TailBound:
    lhs: float
    rhs: float
    log_lhs: float
    log_rhs: float

    @property
    def ratio(self) -> float:
        """lhs / rhs, computed in log space"""
        return math.exp(self.log_lhs - self.log_rhs)


def _tail_shape(x: np.ndarray) -> np.ndarray:
    return math.sqrt(math.pi) * special.erfcx(x) * (2.0 * x + 1.0)


def gaussian_tail_bound(A: float, t: float, constant: float = TAIL_CONSTANT) -> TailBound:
    """Both sides of int_A^inf e^{-xi^2/4t} dxi <= C sqrt(t)/(A/sqrt(t)+1) e^{-A^2/4t}"""
    if A < 0.0 or t <= 0.0:
        raise DomainError(f"Gaussian tail needs A >= 0 and t > 0, got A={A}, t={t}")
    x = A / (2.0 * math.sqrt(t))
    # int_A^inf e^{-xi^2/4t} = sqrt(pi t) erfc(x), with erfc(x) = erfcx(x) e^{-x^2}
    log_lhs = 0.5 * math.log(math.pi * t) + math.log(special.erfcx(x)) - x * x
    log_rhs = math.log(constant) + 0.5 * math.log(t) - math.log(2.0 * x + 1.0) - x * x
    return TailBound(
        lhs=math.exp(log_lhs),
        rhs=math.exp(log_rhs),
        log_lhs=log_lhs,
        log_rhs=log_rhs,
    )


def calibrate_tail_constant(As: Iterable[float], ts: Iterable[float]) -> float:
    """Smallest C for which the tail bound holds on the (A, t) grid"""
    A_grid, t_grid = np.meshgrid(np.asarray(list(As), float), np.asarray(list(ts), float))
    return float(np.max(_tail_shape(A_grid / (2.0 * np.sqrt(t_grid)))))

"""Budgeted adaptive Gauss-Kronrod quadrature on top of scipy.integrate."""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from scipy import integrate

from .errors import QuadratureError

logger = logging.getLogger("SYMKERNEL")

DEFAULT_BUDGET = 200
DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abserr: float

    @property
    def relerr(self) -> float:
        return self.abserr / abs(self.value) if self.value else float("inf")


def integrate_1d(
    func: Callable[[float], float],
    a: float,
    b: float,
    budget: int = DEFAULT_BUDGET,
    rtol: float = DEFAULT_RTOL,
    contract: float = 1e-8,
    points: Optional[Sequence[float]] = None,
) -> QuadratureResult:
    """Integrate func over [a, b] with at most ``budget`` subintervals

    QUADPACK is asked for ``rtol``; the result is accepted as long as its error
    estimate is within ``contract`` relative, otherwise QuadratureError carries
    the partial value.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        result = integrate.quad(
            func,
            a,
            b,
            epsabs=0.0,
            epsrel=rtol,
            limit=budget,
            points=points,
            full_output=1,
        )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3 and abserr > contract * abs(value):
        logger.warning(f"Quadrature on [{a}, {b}] stopped: {result[3]}")
        raise QuadratureError(
            f"Budget of {budget} subintervals exhausted (abserr {abserr:.3e})",
            partial=value,
            abserr=abserr,
        )
    return QuadratureResult(value, abserr)


def integrate_2d(
    func: Callable[[float, float], float],
    a: float,
    b: float,
    c: float,
    d: float,
    rtol: float = 1e-8,
) -> QuadratureResult:
    """Integrate func(y, x) over x in [a, b], y in [c, d] (scipy dblquad order)"""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr = integrate.dblquad(func, a, b, c, d, epsabs=0.0, epsrel=rtol)
    return QuadratureResult(float(value), float(abserr))

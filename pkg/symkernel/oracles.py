"""
Ground-truth kernels in rank one (plus Euclidean space).

Kernels are radial: they depend on the geodesic distance r only. Each oracle
exposes its log-kernel so that far-from-diagonal values, which underflow as
plain doubles, can still be compared with the envelopes.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, List, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gammaln

from .errors import DomainError
from .quadrature import integrate_1d, integrate_2d

logger = logging.getLogger("SYMKERNEL")

DIVERGENCE_SLACK = 1e-9
LOG_CUTOFF = 800.0


@dataclass(frozen=True)
class KernelSample:
    r: float
    t_or_s: Union[float, complex]
    value: float
    method: str  # closed-form | quadrature | laplace-transform
    log_value: float = math.nan


@dataclass(frozen=True)
class HeatOracle:
    """A radial heat kernel with its geometry

    ``gap`` is the bottom of the L2 spectrum of the Laplacian the kernel
    belongs to; it controls how fast h_t decays as t grows.
    """

    name: str
    dim: int
    gap: float
    geometry: str  # hyperbolic | euclidean
    log_kernel: Callable[[float, float], float]
    closed_form: bool

    def kernel(self, t: float, r: float) -> float:
        return math.exp(self.log_kernel(t, r))

    def log_surface(self, rho: float) -> float:
        """log of the area of the geodesic sphere of radius rho"""
        log_omega = math.log(2.0) + (self.dim / 2.0) * math.log(math.pi) - gammaln(self.dim / 2.0)
        if rho <= 0.0:
            return -math.inf
        radial = log_sinh(rho) if self.geometry == "hyperbolic" else math.log(rho)
        return log_omega + (self.dim - 1) * radial


def log_sinh(x: float) -> float:
    if x < 0.5:
        return math.log(math.sinh(x))
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)


def _check_time(t: float, r: float) -> None:
    if t <= 0.0:
        raise DomainError(f"Heat kernel needs t > 0, got {t}")
    if r < 0.0:
        raise DomainError(f"Distance must be nonnegative, got {r}")


def log_euclid_heat(n: int, t: float, r: float) -> float:
    _check_time(t, r)
    return -0.5 * n * math.log(4.0 * math.pi * t) - r * r / (4.0 * t)


def euclid_heat(n: int, t: float, r: float) -> float:
    """(4 pi t)^{-n/2} e^{-r^2/4t}"""
    return math.exp(log_euclid_heat(n, t, r))


def log_h3_heat(t: float, r: float) -> float:
    _check_time(t, r)
    if r == 0.0:
        log_ratio = 0.0
    elif r < 0.5:
        log_ratio = math.log(r / math.sinh(r))
    else:
        log_ratio = math.log(r) - log_sinh(r)
    return -1.5 * math.log(4.0 * math.pi * t) + log_ratio - t - r * r / (4.0 * t)


def h3_heat(t: float, r: float) -> float:
    """(4 pi t)^{-3/2} (r / sinh r) e^{-t - r^2/4t}"""
    return math.exp(log_h3_heat(t, r))


def _mckean_integrand(v: float, t: float, r: float) -> float:
    # u = r + v^2 removes the (cosh u - cosh r)^{-1/2} endpoint singularity;
    # the factors e^{-r^2/4t} and e^{-r/2} are taken out of the integral
    w = v * v
    a = r + w / 2.0
    log_num = -(2.0 * r * w + w * w) / (4.0 * t) - w / 4.0
    denominator = math.sqrt(-math.expm1(-2.0 * a) * math.sinh(w / 2.0))
    return 2.0 * v * (r + w) * math.exp(log_num) / denominator


def log_h2_heat_mckean(t: float, r: float, quad_budget: int = 200) -> float:
    _check_time(t, r)
    b = 2.0 * r + t
    w_max = (-b + math.sqrt(b * b + 720.0 * t)) / 2.0
    result = integrate_1d(
        partial(_mckean_integrand, t=t, r=r),
        0.0,
        math.sqrt(w_max),
        budget=quad_budget,
        rtol=1e-11,
        contract=1e-8,
    )
    prefactor = 0.5 * math.log(2.0) - 1.5 * math.log(4.0 * math.pi * t)
    return prefactor - t / 4.0 - r * r / (4.0 * t) - r / 2.0 + math.log(result.value)


def h2_heat_mckean(t: float, r: float, quad_budget: int = 200) -> float:
    """McKean's integral for the heat kernel of the hyperbolic plane"""
    return math.exp(log_h2_heat_mckean(t, r, quad_budget))


def log_h3_green(s: float, r: float) -> float:
    if r <= 0.0:
        raise DomainError("The resolvent kernel is singular at r = 0")
    return -s * r - math.log(4.0 * math.pi) - log_sinh(r)


def h3_green(s: float, r: float) -> float:
    """e^{-sr} / (4 pi sinh r), the resolvent of the shifted Laplacian on H^3"""
    return math.exp(log_h3_green(s, r))


def euclid3_green(s: float, r: float) -> float:
    """Yukawa kernel e^{-sr} / (4 pi r)"""
    if r <= 0.0:
        raise DomainError("The resolvent kernel is singular at r = 0")
    return math.exp(-s * r) / (4.0 * math.pi * r)


H3_HEAT = HeatOracle("H3", 3, 1.0, "hyperbolic", log_h3_heat, closed_form=True)
H2_HEAT = HeatOracle("H2", 2, 0.25, "hyperbolic", log_h2_heat_mckean, closed_form=False)


def euclid_oracle(n: int) -> HeatOracle:
    return HeatOracle(
        f"R{n}", n, 0.0, "euclidean", partial(log_euclid_heat, n), closed_form=True
    )


def green_from_heat(
    heat_oracle: HeatOracle,
    alpha0: float,
    s: Union[float, complex],
    r: float,
    quad_budget: int = 200,
) -> Union[float, complex]:
    """G_s(r) = int_0^inf e^{(alpha0 - s^2) t} h_t(r) dt, by quadrature in log t

    Returns a float for real s and a complex number otherwise.
    """
    s = complex(s)
    if s.real <= 0.0:
        raise DomainError(f"Resolvent needs Re(s) > 0, got {s}")
    if r <= 0.0:
        raise DomainError("The resolvent kernel is singular at r = 0")
    s2 = s * s
    decay = s2.real - alpha0 + heat_oracle.gap
    if decay <= DIVERGENCE_SLACK:
        raise DomainError(
            f"Laplace transform diverges: Re(s^2) = {s2.real} does not clear the gap"
        )

    t_peak = r / (2.0 * math.sqrt(decay))
    t_lo = r * r / (4.0 * (LOG_CUTOFF + r * math.sqrt(decay)))
    t_hi = t_peak + LOG_CUTOFF / decay

    def part(u: float, phase: Callable[[float], float]) -> float:
        t = math.exp(u)
        log_value = (alpha0 - s2.real) * t + heat_oracle.log_kernel(t, r) + u
        return math.exp(log_value) * phase(t)

    bounds = (math.log(t_lo), math.log(t_hi))
    real = integrate_1d(
        lambda u: part(u, lambda t: math.cos(s2.imag * t)),
        *bounds,
        budget=quad_budget,
        rtol=1e-12,
        points=[math.log(t_peak)],
    )
    if s2.imag == 0.0:
        return real.value
    imag = integrate_1d(
        lambda u: part(u, lambda t: -math.sin(s2.imag * t)),
        *bounds,
        budget=quad_budget,
        rtol=1e-12,
        points=[math.log(t_peak)],
    )
    return complex(real.value, imag.value)


def total_mass(heat_oracle: HeatOracle, t: float, quad_budget: int = 200) -> float:
    """int_X h_t(x, o) dx in geodesic polar coordinates"""
    peak = 2.0 * math.sqrt(heat_oracle.gap) * t
    upper = peak + 20.0 * math.sqrt(t) + 10.0

    def integrand(rho: float) -> float:
        return math.exp(heat_oracle.log_surface(rho) + heat_oracle.log_kernel(t, rho))

    points = [peak] if 0.0 < peak < upper else None
    return integrate_1d(integrand, 0.0, upper, budget=quad_budget, points=points).value


def _radial_profile(heat_oracle: HeatOracle, t: float, r_max: float) -> Callable[[float], float]:
    """log h_t as a function of distance, tabulated when there is no closed form"""
    if heat_oracle.closed_form:
        return partial(heat_oracle.log_kernel, t)
    nodes = np.linspace(0.0, r_max, 401)
    values = np.array([heat_oracle.log_kernel(t, float(d)) for d in nodes])
    spline = CubicSpline(nodes, values)
    return lambda d: float(spline(d))


def _third_side(geometry: str, a: float, b: float, cos_angle: float) -> float:
    if geometry == "hyperbolic":
        cosh_c = math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * cos_angle
        return math.acosh(max(cosh_c, 1.0))
    return math.sqrt(max(a * a + b * b - 2.0 * a * b * cos_angle, 0.0))


def semigroup_defect(heat_oracle: HeatOracle, t: float, s: float, r: float) -> float:
    """Relative error of int h_t(x,z) h_s(z,y) dz against h_{t+s}(x,y), d(x,y) = r"""
    target = heat_oracle.log_kernel(t + s, r)
    longest = max(t, s)
    width = 2.0 * math.sqrt(heat_oracle.gap) * longest + 20.0 * math.sqrt(longest) + 10.0
    if heat_oracle.dim == 1:
        log_ht = partial(heat_oracle.log_kernel, t)
        log_hs = partial(heat_oracle.log_kernel, s)
        result = integrate_1d(
            lambda z: math.exp(log_ht(abs(z)) + log_hs(abs(z - r)) - target),
            min(0.0, r) - width,
            max(0.0, r) + width,
            rtol=1e-13,
            contract=1e-11,
            points=[0.0, r] if r > 0.0 else [0.0],
        )
        return abs(result.value - 1.0)

    log_ht = _radial_profile(heat_oracle, t, width + r)
    log_hs_profile = _radial_profile(heat_oracle, s, width + 2.0 * r)
    n = heat_oracle.dim
    # sphere area over the angular integral of sin^{n-2}
    log_angular = math.log(math.sqrt(math.pi)) + gammaln((n - 1) / 2.0) - gammaln(n / 2.0)

    def integrand(theta: float, rho: float) -> float:
        if rho <= 0.0:
            return 0.0
        d = _third_side(heat_oracle.geometry, rho, r, math.cos(theta))
        log_weight = heat_oracle.log_surface(rho) - log_angular
        log_sine = (n - 2) * math.log(math.sin(theta)) if n > 2 else 0.0
        return math.exp(log_weight + log_sine + log_ht(rho) + log_hs_profile(d) - target)

    result = integrate_2d(integrand, 0.0, width + r, 0.0, math.pi, rtol=1e-7)
    return abs(result.value - 1.0)


def heat_samples(
    heat_oracle: HeatOracle, grid: Iterable[Tuple[float, float]]
) -> List[KernelSample]:
    """h_t(r) on (r, t) pairs, keeping the log value next to the (possibly underflowed) value"""
    method = "closed-form" if heat_oracle.closed_form else "quadrature"
    samples = []
    for r, t in grid:
        log_value = heat_oracle.log_kernel(t, r)
        samples.append(KernelSample(r, t, math.exp(log_value), method, log_value))
    return samples
